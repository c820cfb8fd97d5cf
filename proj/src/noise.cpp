#include "labelaudit/noise.hpp"
#include "labelaudit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

namespace labelaudit {

void NoiseReport::save_csv(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot write " + path.string());
    os << "id,original_label,corrupted_label\n";
    for (const auto& e : entries)
        os << e.id << ',' << e.original_label << ',' << e.corrupted_label
           << "\n";
}

NoiseReport NoiseReport::load_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line) ||
        line != "id,original_label,corrupted_label")
        throw FormatError("bad noise report header in " + path.string());
    NoiseReport r;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') ||
            !std::getline(ss, c, ','))
            throw FormatError("bad noise report row in " + path.string());
        try {
            r.entries.push_back({std::stoull(a),
                                 static_cast<uint32_t>(std::stoul(b)),
                                 static_cast<uint32_t>(std::stoul(c))});
        } catch (const std::exception&) {
            throw FormatError("unparseable noise report row in " +
                              path.string());
        }
    }
    return r;
}

namespace {

void check_rate(double rate) {
    if (!(rate > 0.0 && rate <= 1.0))
        throw ArgumentError("noise rate must be in (0, 1]");
}

std::unordered_map<uint64_t, std::size_t> index_by_id(const Dataset& d) {
    std::unordered_map<uint64_t, std::size_t> m;
    m.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m[d.ids[i]] = i;
    return m;
}

double sqdist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

} // namespace

std::pair<Dataset, NoiseReport> inject_uniform(const Dataset& d, double rate,
                                               uint64_t seed) {
    check_rate(rate);
    if (d.num_classes < 2)
        throw ArgumentError("uniform noise needs at least 2 classes");
    const std::size_t n = d.size();
    const auto count = static_cast<std::size_t>(rate * static_cast<double>(n));

    Dataset out = d;
    NoiseReport report{NoiseKind::uniform, rate, seed, {}};
    if (count == 0) return {std::move(out), std::move(report)};

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);

    std::uniform_int_distribution<uint32_t> pick(0, d.num_classes - 2);
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t i = idx[j];
        const uint32_t orig = out.labels[i];
        uint32_t flipped = pick(rng);
        if (flipped >= orig) ++flipped; // skip the original class
        out.labels[i] = flipped;
        report.entries.push_back({out.ids[i], orig, flipped});
    }
    return {std::move(out), std::move(report)};
}

std::vector<uint32_t> cyclic_shift_mapping(uint32_t num_classes) {
    std::vector<uint32_t> h(num_classes);
    for (uint32_t i = 0; i < num_classes; ++i) h[i] = (i + 1) % num_classes;
    return h;
}

std::pair<Dataset, NoiseReport> inject_ambiguity(
    const Dataset& d, double rate, const std::vector<uint32_t>& mapping,
    uint64_t seed) {
    check_rate(rate);
    const uint32_t N = d.num_classes;
    if (mapping.size() != N)
        throw ArgumentError("ambiguity mapping must cover all classes");
    std::vector<char> hit(N, 0);
    for (uint32_t i = 0; i < N; ++i) {
        if (mapping[i] >= N) throw ArgumentError("mapping target out of range");
        if (mapping[i] == i)
            throw ArgumentError("ambiguity mapping must have no fixed points");
        if (hit[mapping[i]]++)
            throw ArgumentError("ambiguity mapping must be injective");
    }

    Dataset out = d;
    NoiseReport report{NoiseKind::ambiguity, rate, seed, {}};
    std::mt19937_64 rng(seed);

    for (uint32_t c = 0; c < N; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < d.size(); ++i)
            if (d.labels[i] == c) members.push_back(i);
        const auto take = static_cast<std::size_t>(
            rate * static_cast<double>(members.size()));
        if (take == 0) continue;
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t j = 0; j < take; ++j) {
            const std::size_t i = members[j];
            out.labels[i] = mapping[c];
            report.entries.push_back({out.ids[i], c, mapping[c]});
        }
    }
    return {std::move(out), std::move(report)};
}

std::pair<Dataset, NoiseReport> inject_concentrated(const Dataset& d,
                                                    double rate,
                                                    uint32_t source_class,
                                                    uint32_t target_class,
                                                    uint64_t seed) {
    check_rate(rate);
    if (source_class >= d.num_classes || target_class >= d.num_classes)
        throw ArgumentError("source/target class out of range");
    if (source_class == target_class)
        throw ArgumentError("source and target class must differ");

    const auto count =
        static_cast<std::size_t>(rate * static_cast<double>(d.size()));
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d.labels[i] == source_class) members.push_back(i);
    if (members.size() < count)
        throw ArgumentError("source class has only " +
                            std::to_string(members.size()) +
                            " members, need " + std::to_string(count));

    Dataset out = d;
    NoiseReport report{NoiseKind::concentrated, rate, seed, {}};
    if (count == 0) return {std::move(out), std::move(report)};

    // Density seed: the member with the smallest mean distance to its 10
    // nearest same-class neighbors. Ties break on ascending id.
    std::size_t densest = members[0];
    double best_density = std::numeric_limits<double>::infinity();
    for (std::size_t i : members) {
        std::vector<double> dists;
        dists.reserve(members.size());
        for (std::size_t j : members)
            if (j != i) dists.push_back(std::sqrt(sqdist(d.row(i), d.row(j))));
        const std::size_t kk = std::min<std::size_t>(10, dists.size());
        if (kk == 0) continue;
        std::partial_sort(dists.begin(), dists.begin() + kk, dists.end());
        double mean = std::accumulate(dists.begin(), dists.begin() + kk, 0.0) /
                      static_cast<double>(kk);
        if (mean < best_density ||
            (mean == best_density && d.ids[i] < d.ids[densest])) {
            best_density = mean;
            densest = i;
        }
    }

    // Grow the poisoned set by proximity to the densest point.
    std::vector<std::pair<double, std::size_t>> by_dist;
    by_dist.reserve(members.size());
    for (std::size_t i : members)
        by_dist.emplace_back(sqdist(d.row(densest), d.row(i)), i);
    std::sort(by_dist.begin(), by_dist.end(),
              [&](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first < b.first;
                  return d.ids[a.second] < d.ids[b.second];
              });

    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t i = by_dist[j].second;
        out.labels[i] = target_class;
        report.entries.push_back({out.ids[i], source_class, target_class});
    }
    return {std::move(out), std::move(report)};
}

Dataset replay_noise(const Dataset& original, const NoiseReport& report) {
    Dataset out = original;
    auto by_id = index_by_id(out);
    for (const auto& e : report.entries) {
        auto it = by_id.find(e.id);
        if (it == by_id.end())
            throw ArgumentError("noise report id " + std::to_string(e.id) +
                                " not present in dataset");
        if (out.labels[it->second] != e.original_label)
            throw ArgumentError("noise report original label mismatch at id " +
                                std::to_string(e.id));
        out.labels[it->second] = e.corrupted_label;
    }
    return out;
}

} // namespace labelaudit
