#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "labelaudit/dataset.hpp"
#include "labelaudit/model.hpp"
#include "labelaudit/score_table.hpp"

namespace labelaudit {

enum class SimilarityMeasure { cos, dot };

struct Neighbor {
    uint64_t aux_id = 0;
    double similarity = 0.0;
    uint32_t aux_label = 0;
};

/// The k auxiliary points most similar to one query, best first.
struct NeighborSet {
    uint64_t query_id = 0;
    std::vector<Neighbor> neighbors; // similarity non-increasing
};

struct RectifyConfig {
    std::size_t k = 100;
    double p = 0.1;       // fraction of the ranked set to touch
    double tau = 0.8;     // Mode threshold, strict >
    bool remove = false;  // remove instead of rectify
    void validate(std::size_t aux_size) const;
};

double similarity(std::span<const double> a, std::span<const double> b,
                  SimilarityMeasure measure);

// Exact search over the auxiliary features (m x dim row-major). Ties break
// on ascending aux id. Throws on k > m or a zero vector under cosine.
NeighborSet knn(std::span<const double> query,
                const std::vector<double>& aux_features,
                const std::vector<uint32_t>& aux_labels,
                const std::vector<uint64_t>& aux_ids, std::size_t dim,
                std::size_t k, SimilarityMeasure measure,
                uint64_t query_id = 0);

// Plain full-sort search, kept as the reference the heap-based kernel and
// the parallel path are checked against.
NeighborSet knn_serial_reference(std::span<const double> query,
                                 const std::vector<double>& aux_features,
                                 const std::vector<uint32_t>& aux_labels,
                                 const std::vector<uint64_t>& aux_ids,
                                 std::size_t dim, std::size_t k,
                                 SimilarityMeasure measure,
                                 uint64_t query_id = 0);

// All queries (n x dim) against the auxiliary set; OpenMP over queries.
std::vector<NeighborSet> knn_all(const std::vector<double>& queries,
                                 std::size_t n,
                                 const std::vector<double>& aux_features,
                                 const std::vector<uint32_t>& aux_labels,
                                 const std::vector<uint64_t>& aux_ids,
                                 std::size_t dim, std::size_t k,
                                 SimilarityMeasure measure,
                                 const std::vector<uint64_t>& query_ids,
                                 int threads = 1);

// Fraction of neighbors agreeing with the observed label.
double label_agreement_score(const NeighborSet& ns, uint32_t label);

// Ids ordered by ascending score, ties by ascending id.
std::vector<uint64_t> rank_suspicious(const std::vector<uint64_t>& ids,
                                      const std::vector<double>& scores);

// Mode rule: majority neighbor label if its frequency strictly exceeds tau,
// otherwise the current label. Frequency ties pick the smallest class index.
uint32_t mode_rectify(const NeighborSet& ns, uint32_t current_label,
                      double tau);

struct RectifyRecord {
    uint64_t id = 0;
    uint32_t old_label = 0;
    uint32_t new_label = 0;
    double score = 0.0;
    enum class Decision { rectified, removed, kept } decision =
        Decision::kept;
};

struct AuditResult {
    Dataset cleaned;
    ScoreTable scores;
    std::vector<RectifyRecord> log;
};

void save_rectify_log(const std::vector<RectifyRecord>& log,
                      const std::filesystem::path& path);

// Algorithm end to end: penultimate features, kNN label-agreement scores,
// ascending ranking, then rectify/remove the first ceil(p*n) entries.
AuditResult audit(const Dataset& d, const AuxiliarySet& aux,
                  const ModelCheckpoint& model, const RectifyConfig& cfg,
                  SimilarityMeasure measure, int threads = 1);

} // namespace labelaudit
