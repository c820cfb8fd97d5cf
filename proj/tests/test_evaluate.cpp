#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "labelaudit/dataset.hpp"
#include "labelaudit/errors.hpp"
#include "labelaudit/evaluate.hpp"
#include "labelaudit/noise.hpp"

using namespace labelaudit;
namespace fs = std::filesystem;

namespace {

NoiseReport report_for(std::initializer_list<uint64_t> ids) {
    NoiseReport r;
    for (uint64_t id : ids) r.entries.push_back({id, 0, 1});
    return r;
}

Dataset labeled(std::vector<uint32_t> labels, std::vector<uint32_t> truth) {
    Dataset d;
    d.dim = 1;
    d.num_classes = 4;
    d.labels = std::move(labels);
    d.true_labels = std::move(truth);
    d.features.assign(d.labels.size(), 0.0);
    d.ids.resize(d.labels.size());
    for (std::size_t i = 0; i < d.ids.size(); ++i) d.ids[i] = i;
    return d;
}

} // namespace

TEST_CASE("detection accuracy is precision over the top ceil(t*E)") {
    // E = 4 errors; ranking puts 3 of them in the top 4
    const NoiseReport noise = report_for({10, 11, 12, 13});
    const std::vector<uint64_t> ranking{10, 11, 99, 12, 98, 13, 97, 96};
    CHECK(detection_accuracy(ranking, noise, 0.5) == 1.0);  // top 2: both
    CHECK(detection_accuracy(ranking, noise, 0.75) ==
          doctest::Approx(2.0 / 3.0));                      // top 3: 2 of 3
    CHECK(detection_accuracy(ranking, noise, 1.0) == 0.75); // top 4: 3 of 4
    // ceil(0.1 * 4) = 1
    CHECK(detection_accuracy(ranking, noise, 0.1) == 1.0);

    CHECK_THROWS_AS(detection_accuracy(ranking, NoiseReport{}, 0.5),
                    MetricError);
    CHECK_THROWS_AS(detection_accuracy(ranking, noise, 0.0), ArgumentError);
    CHECK_THROWS_AS(detection_accuracy(ranking, noise, 1.5), ArgumentError);
}

TEST_CASE("detection curve samples t from 0.1 to 1.0") {
    const NoiseReport noise = report_for({1, 2});
    const std::vector<uint64_t> ranking{1, 5, 2, 6};
    const DetectionCurve c = detection_curve("sim-cos", ranking, noise);
    CHECK(c.method == "sim-cos");
    REQUIRE(c.points.size() == 10);
    CHECK(c.points.front().first == doctest::Approx(0.1));
    CHECK(c.points.back().first == doctest::Approx(1.0));
    CHECK(c.points.front().second == 1.0); // top 1 is an error
    CHECK(c.points.back().second == 0.5);  // top 2 holds 1 of 2
}

TEST_CASE("a random ranking scores close to chance") {
    const std::size_t n = 2000, e = 200;
    NoiseReport noise;
    for (uint64_t id = 0; id < e; ++id) noise.entries.push_back({id, 0, 1});
    std::vector<uint64_t> ranking(n);
    for (std::size_t i = 0; i < n; ++i) ranking[i] = i;
    double mean = 0.0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 rng(t);
        std::shuffle(ranking.begin(), ranking.end(), rng);
        mean += detection_accuracy(ranking, noise, 1.0);
    }
    mean /= trials;
    CHECK(std::abs(mean - static_cast<double>(e) / n) <= 0.03);
}

TEST_CASE("error reduction rate") {
    SUBCASE("fixing half the disagreements gives 0.5") {
        const Dataset before = labeled({1, 1, 0, 0}, {0, 0, 0, 0});
        Dataset after = before;
        after.labels = {0, 1, 0, 0};
        CHECK(error_reduction_rate(before, after) == 0.5);
    }
    SUBCASE("removing an erroneous row counts as resolved") {
        const Dataset before = labeled({1, 1, 0}, {0, 0, 0});
        Dataset after = labeled({1, 0}, {0, 0});
        after.ids = {0, 2};
        after.true_labels = std::vector<uint32_t>{0, 0};
        after.labels = {1, 0};
        CHECK(error_reduction_rate(before, after) == 0.5);
    }
    SUBCASE("introducing new errors can go negative") {
        const Dataset before = labeled({1, 0, 0, 0}, {0, 0, 0, 0});
        Dataset after = before;
        after.labels = {1, 1, 1, 0};
        CHECK(error_reduction_rate(before, after) == -2.0);
    }
    SUBCASE("a clean before-set is a metric error") {
        const Dataset clean = labeled({0, 0}, {0, 0});
        CHECK_THROWS_AS(error_reduction_rate(clean, clean), MetricError);
    }
}

TEST_CASE("spearman correlation") {
    const std::vector<uint64_t> ids{1, 2, 3, 4, 5};
    const std::vector<double> s1{0.1, 0.2, 0.3, 0.4, 0.5};
    SUBCASE("identical order gives 1") {
        CHECK(spearman(ids, s1, ids, s1) == doctest::Approx(1.0));
        const std::vector<double> scaled{1, 2, 3, 4, 5};
        CHECK(spearman(ids, s1, ids, scaled) == doctest::Approx(1.0));
    }
    SUBCASE("reversed order gives -1") {
        const std::vector<double> rev{0.5, 0.4, 0.3, 0.2, 0.1};
        CHECK(spearman(ids, s1, ids, rev) == doctest::Approx(-1.0));
    }
    SUBCASE("hand-worked example with a tie") {
        // ranks1 = 1..4; scores2 = {2, 2, 1, 3} -> average ranks
        // {2.5, 2.5, 1, 4}; pearson of those is 1.5 / sqrt(5 * 4.5)
        const std::vector<uint64_t> id4{1, 2, 3, 4};
        const std::vector<double> a{1, 2, 3, 4};
        const std::vector<double> b{2, 2, 1, 3};
        const double r = spearman(id4, a, id4, b);
        CHECK(r == doctest::Approx(1.5 / std::sqrt(22.5)).epsilon(1e-12));
    }
    SUBCASE("mismatched id sets are rejected") {
        const std::vector<uint64_t> other{1, 2, 3, 4, 6};
        CHECK_THROWS_AS(spearman(ids, s1, other, s1), ArgumentError);
        CHECK_THROWS_AS(spearman({1}, {0.5}, {1}, {0.5}), ArgumentError);
    }
    SUBCASE("order of the id vectors does not matter") {
        const std::vector<uint64_t> shuffled{3, 1, 5, 2, 4};
        const std::vector<double> s2{0.3, 0.1, 0.5, 0.2, 0.4};
        CHECK(spearman(ids, s1, shuffled, s2) == doctest::Approx(1.0));
    }
}

TEST_CASE("spearman matrix is symmetric with unit diagonal") {
    std::vector<ScoreTable> tables;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const char* name : {"a", "b", "c"}) {
        std::vector<uint64_t> ids(50);
        std::vector<double> scores(50);
        for (std::size_t i = 0; i < 50; ++i) {
            ids[i] = i;
            scores[i] = u(rng);
        }
        tables.push_back(ScoreTable::from_scores(name, ids, scores));
    }
    const auto mat = spearman_matrix(tables);
    REQUIRE(mat.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(mat[i][i] == doctest::Approx(1.0));
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(mat[i][j] == doctest::Approx(mat[j][i]).epsilon(1e-12));
    }
}

TEST_CASE("histogram build clamps and counts everything") {
    const std::vector<double> vals{0.0, 0.5, 1.0, 1.0, -5.0, 5.0};
    const Histogram h = Histogram::build(vals, 4, 0.0, 1.0);
    CHECK(h.total() == vals.size());
    CHECK(h.counts.size() == 4);
    CHECK(h.counts[0] == 2);       // 0.0 and the clamped -5.0
    CHECK(h.counts[3] == 3);       // 1.0 twice plus the clamped 5.0
    CHECK_THROWS_AS(Histogram::build(vals, 0, 0.0, 1.0), ArgumentError);
    CHECK_THROWS_AS(Histogram::build(vals, 4, 1.0, 0.0), ArgumentError);
}

TEST_CASE("similarity histograms separate true-class from other-class") {
    SynthSpec spec{4, 8, 150, 6.0, 1.0, 4};
    const Dataset clean = generate_synthetic(spec);
    auto [noisy, report] = inject_uniform(clean, 0.1, 5);

    ModelCheckpoint m;
    m.input_dim = clean.dim;
    m.num_classes = clean.num_classes;
    m.head_w.assign(clean.num_classes * clean.dim, 0.0);
    m.head_b.assign(clean.num_classes, 0.0);

    const HistogramPair hp =
        similarity_histograms(noisy, report, m, SimilarityMeasure::cos);
    CHECK(hp.in_group.total() > 0);
    CHECK(hp.out_group.total() > 0);
    // raw features: corrupted points still sit near their true class
    CHECK(hp.mean_in > hp.mean_out);

    const HistogramPair norms = norm_histograms(noisy, report, m);
    CHECK(norms.in_group.total() == report.count());
    CHECK(norms.out_group.total() == noisy.size() - report.count());
}

TEST_CASE("theory ratio check populates both sides") {
    SynthSpec spec{4, 8, 100, 5.0, 1.0, 6};
    const Dataset d = generate_synthetic(spec);
    ModelCheckpoint m;
    m.input_dim = d.dim;
    m.num_classes = d.num_classes;
    m.head_w.assign(d.num_classes * d.dim, 0.0);
    m.head_b.assign(d.num_classes, 0.0);

    const TheoryRatio r = theory_ratio_check(d, m, 2000, 7);
    CHECK(r.analytic == 3.0);
    CHECK(r.same_pairs > 0);
    CHECK(r.diff_pairs > 0);
    CHECK(r.empirical > 0.0);
    // the uniform model predicts with confidence 1/N
    CHECK(r.mean_confidence == doctest::Approx(0.25).epsilon(1e-12));

    const TheoryRatio r2 = theory_ratio_check(d, m, 2000, 7);
    CHECK(r.empirical == r2.empirical); // seeded sampling
}

TEST_CASE("audit report writes parseable json and figures") {
    AuditReport rep;
    DetectionCurve c;
    c.method = "sim-cos";
    for (int i = 1; i <= 10; ++i)
        c.points.emplace_back(i / 10.0, 0.5 + 0.05 * i);
    rep.curves.push_back(c);
    rep.error_reduction = 0.8;
    rep.baseline_accuracy = 0.9;
    rep.retrain_accuracy["rectified"] = 0.95;
    rep.methods = {"sim-cos", "sc"};
    rep.spearman = {{1.0, 0.4}, {0.4, 1.0}};
    rep.similarity.in_group = Histogram::build({0.1, 0.9}, 8, 0.0, 1.0);
    rep.similarity.out_group = Histogram::build({0.2, 0.3}, 8, 0.0, 1.0);
    rep.norms = rep.similarity;
    rep.theory = {2.9, 3.0, 0.93, 100, 100};

    const fs::path dir = fs::temp_directory_path() / "la_report_test";
    fs::remove_all(dir);
    rep.write(dir);

    std::ifstream is(dir / "report.json");
    REQUIRE(is.good());
    const auto j = nlohmann::json::parse(is);
    CHECK(j["error_reduction_rate"].get<double>() == 0.8);
    CHECK(j["theory_ratio"]["analytic"].get<double>() == 3.0);
    CHECK(j["detection_curves"]["sim-cos"].size() == 10);
    CHECK(j["detection_curves"]["sim-cos"][0]["t"].get<double>() == 0.1);

    for (const char* name :
         {"detection_curves.csv", "detection_curves.svg",
          "similarity_histograms.csv", "similarity_histograms.svg",
          "norm_histograms.csv", "norm_histograms.svg"})
        CHECK(fs::exists(dir / name));

    // svg sanity: well-formed root element with the fixed canvas
    std::ifstream svg(dir / "detection_curves.svg");
    std::string body((std::istreambuf_iterator<char>(svg)),
                     std::istreambuf_iterator<char>());
    CHECK(body.find("<svg") != std::string::npos);
    CHECK(body.find("width=\"800\"") != std::string::npos);
    CHECK(body.find("height=\"500\"") != std::string::npos);
    CHECK(body.rfind("</svg>") != std::string::npos);
}
