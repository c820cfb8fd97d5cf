#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "labelaudit/dataset.hpp"
#include "labelaudit/detector.hpp"
#include "labelaudit/model.hpp"
#include "labelaudit/noise.hpp"
#include "labelaudit/score_table.hpp"

namespace labelaudit {

/// Detection precision at growing prefixes: the point at fraction t
/// evaluates the top ceil(t * E) ranked suspects against the E injected
/// errors.
struct DetectionCurve {
    std::string method;
    std::vector<std::pair<double, double>> points; // (t, accuracy)
};

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::size_t> counts;

    std::size_t total() const;
    static Histogram build(const std::vector<double>& values,
                           std::size_t bins, double lo, double hi);
};

struct HistogramPair {
    Histogram in_group;  // e.g. true-class similarities, or noisy norms
    Histogram out_group; // other-class similarities, or clean norms
    double mean_in = 0.0;
    double mean_out = 0.0;
};

double detection_accuracy(const std::vector<uint64_t>& ranking,
                          const NoiseReport& noise, double t);

DetectionCurve detection_curve(const std::string& method,
                               const std::vector<uint64_t>& ranking,
                               const NoiseReport& noise);

// Relative reduction of true-label disagreements; removed erroneous ids
// count as resolved.
double error_reduction_rate(const Dataset& before, const Dataset& after);

double retrain_delta(const Dataset& cleaned, const Dataset& val,
                     const Dataset& test, const ModelConfig& cfg,
                     double baseline_acc);

// Spearman rank correlation of two score vectors over identical id sets;
// ties get average ranks.
double spearman(const std::vector<uint64_t>& ids1,
                const std::vector<double>& scores1,
                const std::vector<uint64_t>& ids2,
                const std::vector<double>& scores2);

std::vector<std::vector<double>> spearman_matrix(
    const std::vector<ScoreTable>& tables);

// Similarities of each corrupted point to clean true-class points (in_group)
// and clean other-class points (out_group), 64 uniform bins over the
// observed range.
HistogramPair similarity_histograms(const Dataset& d, const NoiseReport& noise,
                                    const ModelCheckpoint& model,
                                    SimilarityMeasure measure,
                                    int threads = 1);

// L2 norms of penultimate features, corrupted vs clean.
HistogramPair norm_histograms(const Dataset& d, const NoiseReport& noise,
                              const ModelCheckpoint& model, int threads = 1);

struct TheoryRatio {
    double empirical = 0.0;
    double analytic = 0.0; // N - 1
    double mean_confidence = 0.0;
    std::size_t same_pairs = 0;
    std::size_t diff_pairs = 0;
};

// mean |G| over sampled same-label clean pairs divided by mean |G| over
// different-label clean pairs, next to the analytic N - 1.
TheoryRatio theory_ratio_check(const Dataset& d, const ModelCheckpoint& model,
                               std::size_t pairs, uint64_t seed);

struct AuditReport {
    std::vector<DetectionCurve> curves;
    double error_reduction = 0.0;
    double baseline_accuracy = 0.0;
    std::map<std::string, double> retrain_accuracy; // "removed", "rectified"
    std::vector<std::string> methods;               // spearman axis order
    std::vector<std::vector<double>> spearman;
    HistogramPair similarity; // same vs other class
    HistogramPair norms;      // noisy vs clean
    TheoryRatio theory;

    // report.json plus per-figure CSVs and 800x500 SVGs in `dir`.
    void write(const std::filesystem::path& dir) const;
};

void write_curve_svg(const std::vector<DetectionCurve>& curves,
                     const std::filesystem::path& path);
void write_histogram_svg(const HistogramPair& pair, const std::string& label_in,
                         const std::string& label_out,
                         const std::filesystem::path& path);

} // namespace labelaudit
