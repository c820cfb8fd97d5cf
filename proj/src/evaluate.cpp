#include "labelaudit/evaluate.hpp"
#include "labelaudit/confidence.hpp"
#include "labelaudit/errors.hpp"
#include "labelaudit/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace labelaudit {

std::size_t Histogram::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

Histogram Histogram::build(const std::vector<double>& values,
                           std::size_t bins, double lo, double hi) {
    if (bins == 0) throw ArgumentError("histogram needs at least one bin");
    if (hi < lo) throw ArgumentError("histogram range is inverted");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(bins, 0);
    if (values.empty()) return h;
    const double width = hi - lo;
    for (double v : values) {
        std::size_t b = 0;
        if (width > 0.0) {
            const double f = (v - lo) / width;
            b = std::min(bins - 1, static_cast<std::size_t>(
                                       std::max(0.0, f * static_cast<double>(
                                                             bins))));
        }
        ++h.counts[b];
    }
    return h;
}

double detection_accuracy(const std::vector<uint64_t>& ranking,
                          const NoiseReport& noise, double t) {
    if (!(t > 0.0 && t <= 1.0)) throw ArgumentError("t must be in (0, 1]");
    const std::size_t E = noise.count();
    if (E == 0) throw MetricError("no injected errors; accuracy undefined");
    const auto prefix = static_cast<std::size_t>(
        std::ceil(t * static_cast<double>(E)));
    if (prefix > ranking.size())
        throw ArgumentError("ranking shorter than evaluation prefix");
    std::unordered_set<uint64_t> corrupted;
    corrupted.reserve(E);
    for (const auto& e : noise.entries) corrupted.insert(e.id);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < prefix; ++i)
        if (corrupted.count(ranking[i])) ++hit;
    return static_cast<double>(hit) / static_cast<double>(prefix);
}

DetectionCurve detection_curve(const std::string& method,
                               const std::vector<uint64_t>& ranking,
                               const NoiseReport& noise) {
    DetectionCurve c;
    c.method = method;
    for (int i = 1; i <= 10; ++i) {
        const double t = static_cast<double>(i) / 10.0;
        c.points.emplace_back(t, detection_accuracy(ranking, noise, t));
    }
    return c;
}

double error_reduction_rate(const Dataset& before, const Dataset& after) {
    if (!before.true_labels || !after.true_labels)
        throw ArgumentError("error reduction rate needs true labels");
    std::unordered_map<uint64_t, std::size_t> after_rows;
    after_rows.reserve(after.size());
    for (std::size_t i = 0; i < after.size(); ++i)
        after_rows[after.ids[i]] = i;

    std::size_t errors_before = 0;
    std::size_t errors_after = 0;
    for (std::size_t i = 0; i < before.size(); ++i) {
        const bool wrong_before =
            before.labels[i] != (*before.true_labels)[i];
        if (wrong_before) ++errors_before;
        auto it = after_rows.find(before.ids[i]);
        if (it == after_rows.end()) continue; // removed: counts as resolved
        const std::size_t j = it->second;
        if (after.labels[j] != (*after.true_labels)[j]) ++errors_after;
    }
    if (errors_before == 0)
        throw MetricError("no label errors before cleaning; rate undefined");
    return (static_cast<double>(errors_before) -
            static_cast<double>(errors_after)) /
           static_cast<double>(errors_before);
}

double retrain_delta(const Dataset& cleaned, const Dataset& val,
                     const Dataset& test, const ModelConfig& cfg,
                     double baseline_acc) {
    const auto result = train(cleaned, val, cfg);
    return accuracy(result.best(), test) - baseline_acc;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& scores) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b];
    });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) /
                               2.0 + 1.0;
        for (std::size_t q = i; q <= j; ++q) ranks[order[q]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = static_cast<double>(a.size());
    double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double num = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va == 0.0 || vb == 0.0)
        throw MetricError("constant ranks; correlation undefined");
    return num / std::sqrt(va * vb);
}

} // namespace

double spearman(const std::vector<uint64_t>& ids1,
                const std::vector<double>& scores1,
                const std::vector<uint64_t>& ids2,
                const std::vector<double>& scores2) {
    if (ids1.size() != scores1.size() || ids2.size() != scores2.size())
        throw ArgumentError("score/id count mismatch");
    if (ids1.size() < 2)
        throw ArgumentError("spearman needs at least 2 examples");
    std::unordered_map<uint64_t, double> m2;
    m2.reserve(ids2.size());
    for (std::size_t i = 0; i < ids2.size(); ++i) m2[ids2[i]] = scores2[i];
    if (m2.size() != ids1.size())
        throw ArgumentError("spearman id sets must be identical");
    std::vector<double> aligned2(ids1.size());
    for (std::size_t i = 0; i < ids1.size(); ++i) {
        auto it = m2.find(ids1[i]);
        if (it == m2.end())
            throw ArgumentError("spearman id sets must be identical");
        aligned2[i] = it->second;
    }
    return pearson(average_ranks(scores1), average_ranks(aligned2));
}

std::vector<std::vector<double>> spearman_matrix(
    const std::vector<ScoreTable>& tables) {
    const std::size_t k = tables.size();
    auto unpack = [](const ScoreTable& t) {
        std::vector<uint64_t> ids;
        std::vector<double> scores;
        for (const auto& e : t.entries) {
            ids.push_back(e.id);
            scores.push_back(e.score);
        }
        return std::make_pair(ids, scores);
    };
    std::vector<std::vector<double>> m(k, std::vector<double>(k, 1.0));
    for (std::size_t i = 0; i < k; ++i) {
        auto [ids_i, s_i] = unpack(tables[i]);
        for (std::size_t j = i + 1; j < k; ++j) {
            auto [ids_j, s_j] = unpack(tables[j]);
            m[i][j] = m[j][i] = spearman(ids_i, s_i, ids_j, s_j);
        }
    }
    return m;
}

namespace {

HistogramPair paired_histograms(std::vector<double> in_vals,
                                std::vector<double> out_vals) {
    HistogramPair pair;
    if (in_vals.empty() && out_vals.empty()) {
        pair.in_group = Histogram::build({}, 64, 0.0, 0.0);
        pair.out_group = Histogram::build({}, 64, 0.0, 0.0);
        return pair;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : in_vals) { lo = std::min(lo, v); hi = std::max(hi, v); }
    for (double v : out_vals) { lo = std::min(lo, v); hi = std::max(hi, v); }
    pair.in_group = Histogram::build(in_vals, 64, lo, hi);
    pair.out_group = Histogram::build(out_vals, 64, lo, hi);
    auto mean = [](const std::vector<double>& v) {
        return v.empty() ? 0.0
                         : std::accumulate(v.begin(), v.end(), 0.0) /
                               static_cast<double>(v.size());
    };
    pair.mean_in = mean(in_vals);
    pair.mean_out = mean(out_vals);
    return pair;
}

} // namespace

HistogramPair similarity_histograms(const Dataset& d, const NoiseReport& noise,
                                    const ModelCheckpoint& model,
                                    SimilarityMeasure measure, int threads) {
    if (!d.true_labels)
        throw ArgumentError("similarity histograms need true labels");
    const auto phi = penultimate_features(model, d, threads);
    const std::size_t feat = model.feature_dim();

    std::unordered_set<uint64_t> corrupted_ids;
    for (const auto& e : noise.entries) corrupted_ids.insert(e.id);

    std::vector<std::size_t> corrupted, clean;
    for (std::size_t i = 0; i < d.size(); ++i)
        (corrupted_ids.count(d.ids[i]) ? corrupted : clean).push_back(i);

    std::vector<double> same_vals, other_vals;
    for (std::size_t ci : corrupted) {
        std::span<const double> a{phi.data() + ci * feat, feat};
        const uint32_t truth = (*d.true_labels)[ci];
        for (std::size_t cj : clean) {
            std::span<const double> b{phi.data() + cj * feat, feat};
            const double s = similarity(a, b, measure);
            ((*d.true_labels)[cj] == truth ? same_vals : other_vals)
                .push_back(s);
        }
    }
    return paired_histograms(std::move(same_vals), std::move(other_vals));
}

HistogramPair norm_histograms(const Dataset& d, const NoiseReport& noise,
                              const ModelCheckpoint& model, int threads) {
    const auto phi = penultimate_features(model, d, threads);
    const std::size_t feat = model.feature_dim();
    std::unordered_set<uint64_t> corrupted_ids;
    for (const auto& e : noise.entries) corrupted_ids.insert(e.id);

    std::vector<double> noisy_norms, clean_norms;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < feat; ++j) {
            const double v = phi[i * feat + j];
            s += v * v;
        }
        (corrupted_ids.count(d.ids[i]) ? noisy_norms : clean_norms)
            .push_back(std::sqrt(s));
    }
    return paired_histograms(std::move(noisy_norms), std::move(clean_norms));
}

TheoryRatio theory_ratio_check(const Dataset& d, const ModelCheckpoint& model,
                               std::size_t pairs, uint64_t seed) {
    if (pairs < 2) throw ArgumentError("need at least 2 sampled pairs");
    // Clean points only: the alpha/eps model describes confident, correctly
    // labeled predictions.
    std::vector<std::size_t> clean;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (!d.true_labels || d.labels[i] == (*d.true_labels)[i])
            clean.push_back(i);
    if (clean.size() < 2)
        throw ArgumentError("not enough clean points for the ratio check");

    std::vector<ProbRecord> records(clean.size());
    double conf = 0.0;
    for (std::size_t q = 0; q < clean.size(); ++q) {
        const std::size_t i = clean[q];
        records[q] = {d.ids[i], d.labels[i], model.predict_proba(d.row(i))};
        conf += records[q].probs[d.labels[i]];
    }

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, clean.size() - 1);
    double sum_same = 0.0, sum_diff = 0.0;
    std::size_t n_same = 0, n_diff = 0;
    for (std::size_t it = 0; it < pairs; ++it) {
        const std::size_t a = pick(rng);
        std::size_t b = pick(rng);
        if (a == b) continue;
        const double g = empirical_g(records[a], records[b]);
        if (records[a].label == records[b].label) {
            sum_same += std::abs(g);
            ++n_same;
        } else {
            sum_diff += std::abs(g);
            ++n_diff;
        }
    }
    if (n_same == 0 || n_diff == 0)
        throw ArgumentError("sampled pairs missed one of the label cases");

    TheoryRatio r;
    r.same_pairs = n_same;
    r.diff_pairs = n_diff;
    r.mean_confidence = conf / static_cast<double>(clean.size());
    r.analytic = static_cast<double>(d.num_classes) - 1.0;
    const double mean_same = sum_same / static_cast<double>(n_same);
    const double mean_diff = sum_diff / static_cast<double>(n_diff);
    if (mean_diff == 0.0)
        throw MetricError("different-label kernel mean is zero");
    r.empirical = mean_same / mean_diff;
    return r;
}

namespace {

nlohmann::json histogram_json(const Histogram& h) {
    return {{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}};
}

void write_histogram_csv(const HistogramPair& p, const std::string& in_name,
                         const std::string& out_name,
                         const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot write " + path.string());
    os << "bin_lo,bin_hi," << in_name << ',' << out_name << "\n";
    const std::size_t bins = p.in_group.counts.size();
    const double width =
        bins ? (p.in_group.hi - p.in_group.lo) / static_cast<double>(bins)
             : 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        os << p.in_group.lo + width * static_cast<double>(b) << ','
           << p.in_group.lo + width * static_cast<double>(b + 1) << ','
           << p.in_group.counts[b] << ',' << p.out_group.counts[b] << "\n";
    }
}

} // namespace

void AuditReport::write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    for (const auto& c : curves) {
        nlohmann::json pts = nlohmann::json::array();
        for (auto [t, acc] : c.points) pts.push_back({{"t", t}, {"acc", acc}});
        j["detection_curves"][c.method] = pts;
    }
    j["error_reduction_rate"] = error_reduction;
    j["baseline_accuracy"] = baseline_accuracy;
    j["retrain_accuracy"] = retrain_accuracy;
    j["spearman"] = {{"methods", methods}, {"matrix", spearman}};
    j["similarity_histograms"] = {
        {"true_class", histogram_json(similarity.in_group)},
        {"other_class", histogram_json(similarity.out_group)},
        {"mean_true_class", similarity.mean_in},
        {"mean_other_class", similarity.mean_out}};
    j["norm_histograms"] = {{"noisy", histogram_json(norms.in_group)},
                            {"clean", histogram_json(norms.out_group)},
                            {"mean_noisy", norms.mean_in},
                            {"mean_clean", norms.mean_out}};
    j["theory_ratio"] = {{"empirical", theory.empirical},
                         {"analytic", theory.analytic},
                         {"mean_confidence", theory.mean_confidence},
                         {"same_pairs", theory.same_pairs},
                         {"diff_pairs", theory.diff_pairs}};
    std::ofstream os(dir / "report.json");
    if (!os) throw FormatError("cannot write report.json");
    os << j.dump(2) << "\n";

    {
        std::ofstream cs(dir / "detection_curves.csv");
        cs << "method,t,accuracy\n";
        for (const auto& c : curves)
            for (auto [t, acc] : c.points)
                cs << c.method << ',' << t << ',' << acc << "\n";
    }
    write_histogram_csv(similarity, "true_class", "other_class",
                        dir / "similarity_histograms.csv");
    write_histogram_csv(norms, "noisy", "clean", dir / "norm_histograms.csv");
    if (!curves.empty())
        write_curve_svg(curves, dir / "detection_curves.svg");
    write_histogram_svg(similarity, "true class", "other class",
                        dir / "similarity_histograms.svg");
    write_histogram_svg(norms, "noisy", "clean", dir / "norm_histograms.svg");
}

namespace {

constexpr double kW = 800.0, kH = 500.0;
constexpr double kMargin = 60.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                          "#bcbd22"};

void svg_header(std::ofstream& os) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" "
          "height=\"500\" viewBox=\"0 0 800 500\">\n"
       << "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
}

} // namespace

void write_curve_svg(const std::vector<DetectionCurve>& curves,
                     const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot write " + path.string());
    svg_header(os);
    auto px = [](double t) { return kMargin + t * (kW - 2 * kMargin); };
    auto py = [](double a) { return kH - kMargin - a * (kH - 2 * kMargin); };
    os << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\""
       << px(1) << "\" y2=\"" << py(0) << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\""
       << px(0) << "\" y2=\"" << py(1) << "\" stroke=\"black\"/>\n";
    std::size_t ci = 0;
    for (const auto& c : curves) {
        const char* color = kPalette[ci % 9];
        os << "<polyline fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"2\" points=\"";
        for (auto [t, acc] : c.points) os << px(t) << ',' << py(acc) << ' ';
        os << "\"/>\n<text x=\"" << kW - kMargin + 5 << "\" y=\""
           << 20 + 16 * static_cast<double>(ci) << "\" fill=\"" << color
           << "\" font-size=\"12\">" << c.method << "</text>\n";
        ++ci;
    }
    os << "</svg>\n";
}

void write_histogram_svg(const HistogramPair& pair,
                         const std::string& label_in,
                         const std::string& label_out,
                         const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot write " + path.string());
    svg_header(os);
    const std::size_t bins = pair.in_group.counts.size();
    std::size_t peak = 1;
    for (std::size_t b = 0; b < bins; ++b)
        peak = std::max({peak, pair.in_group.counts[b],
                         pair.out_group.counts[b]});
    const double bw = (kW - 2 * kMargin) / static_cast<double>(bins ? bins : 1);
    auto bar = [&](std::size_t b, std::size_t count, const char* color,
                   double offset) {
        const double h =
            (kH - 2 * kMargin) * static_cast<double>(count) /
            static_cast<double>(peak);
        os << "<rect x=\"" << kMargin + bw * static_cast<double>(b) + offset
           << "\" y=\"" << kH - kMargin - h << "\" width=\"" << bw / 2.0
           << "\" height=\"" << h << "\" fill=\"" << color
           << "\" fill-opacity=\"0.7\"/>\n";
    };
    for (std::size_t b = 0; b < bins; ++b) {
        bar(b, pair.in_group.counts[b], "#1f77b4", 0.0);
        bar(b, pair.out_group.counts[b], "#d62728", bw / 2.0);
    }
    os << "<text x=\"" << kMargin << "\" y=\"20\" fill=\"#1f77b4\" "
          "font-size=\"12\">" << label_in << "</text>\n"
       << "<text x=\"" << kMargin << "\" y=\"36\" fill=\"#d62728\" "
          "font-size=\"12\">" << label_out << "</text>\n</svg>\n";
}

} // namespace labelaudit
