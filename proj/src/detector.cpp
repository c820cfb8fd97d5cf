#include "labelaudit/detector.hpp"
#include "labelaudit/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string_view>

namespace labelaudit {

void RectifyConfig::validate(std::size_t aux_size) const {
    if (k < 1 || k > aux_size)
        throw ArgumentError("k must lie in [1, aux size]");
    if (!(p > 0.0 && p <= 1.0)) throw ArgumentError("p must be in (0, 1]");
    if (!(tau > 0.0 && tau <= 1.0)) throw ArgumentError("tau must be in (0, 1]");
}

double similarity(std::span<const double> a, std::span<const double> b,
                  SimilarityMeasure measure) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    if (measure == SimilarityMeasure::dot) return dot;
    double na = 0.0, nb = 0.0;
    for (double v : a) na += v * v;
    for (double v : b) nb += v * v;
    if (na == 0.0 || nb == 0.0)
        throw NumericError("cosine similarity undefined for zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

bool better(double sim_a, uint64_t id_a, double sim_b, uint64_t id_b) {
    if (sim_a != sim_b) return sim_a > sim_b;
    return id_a < id_b;
}

} // namespace

NeighborSet knn_serial_reference(std::span<const double> query,
                                 const std::vector<double>& aux_features,
                                 const std::vector<uint32_t>& aux_labels,
                                 const std::vector<uint64_t>& aux_ids,
                                 std::size_t dim, std::size_t k,
                                 SimilarityMeasure measure,
                                 uint64_t query_id) {
    const std::size_t m = aux_ids.size();
    if (k < 1 || k > m) throw ArgumentError("k must lie in [1, aux size]");
    std::vector<Neighbor> all(m);
    for (std::size_t j = 0; j < m; ++j) {
        std::span<const double> row{aux_features.data() + j * dim, dim};
        all[j] = {aux_ids[j], similarity(query, row, measure), aux_labels[j]};
    }
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        return better(a.similarity, a.aux_id, b.similarity, b.aux_id);
    });
    all.resize(k);
    return {query_id, std::move(all)};
}

NeighborSet knn(std::span<const double> query,
                const std::vector<double>& aux_features,
                const std::vector<uint32_t>& aux_labels,
                const std::vector<uint64_t>& aux_ids, std::size_t dim,
                std::size_t k, SimilarityMeasure measure, uint64_t query_id) {
    const std::size_t m = aux_ids.size();
    if (k < 1 || k > m) throw ArgumentError("k must lie in [1, aux size]");

    // Bounded selection: keep the current top-k in a max-at-front vector,
    // replacing the worst entry when a candidate beats it.
    auto worse = [](const Neighbor& a, const Neighbor& b) {
        return better(a.similarity, a.aux_id, b.similarity, b.aux_id);
    };
    std::vector<Neighbor> heap;
    heap.reserve(k + 1);
    for (std::size_t j = 0; j < m; ++j) {
        std::span<const double> row{aux_features.data() + j * dim, dim};
        Neighbor cand{aux_ids[j], similarity(query, row, measure),
                      aux_labels[j]};
        if (heap.size() < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end(), worse);
        } else if (better(cand.similarity, cand.aux_id,
                          heap.front().similarity, heap.front().aux_id)) {
            std::pop_heap(heap.begin(), heap.end(), worse);
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end(), worse);
        }
    }
    std::sort_heap(heap.begin(), heap.end(), worse); // best first
    return {query_id, std::move(heap)};
}

std::vector<NeighborSet> knn_all(const std::vector<double>& queries,
                                 std::size_t n,
                                 const std::vector<double>& aux_features,
                                 const std::vector<uint32_t>& aux_labels,
                                 const std::vector<uint64_t>& aux_ids,
                                 std::size_t dim, std::size_t k,
                                 SimilarityMeasure measure,
                                 const std::vector<uint64_t>& query_ids,
                                 int threads) {
    std::vector<NeighborSet> out(n);
#ifdef _OPENMP
#pragma omp parallel for num_threads(std::max(threads, 1)) schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        std::span<const double> q{queries.data() + idx * dim, dim};
        out[idx] = knn(q, aux_features, aux_labels, aux_ids, dim, k, measure,
                       query_ids[idx]);
    }
    return out;
}

double label_agreement_score(const NeighborSet& ns, uint32_t label) {
    if (ns.neighbors.empty()) throw ArgumentError("empty neighbor set");
    std::size_t agree = 0;
    for (const auto& nb : ns.neighbors)
        if (nb.aux_label == label) ++agree;
    return static_cast<double>(agree) /
           static_cast<double>(ns.neighbors.size());
}

std::vector<uint64_t> rank_suspicious(const std::vector<uint64_t>& ids,
                                      const std::vector<double>& scores) {
    if (ids.size() != scores.size())
        throw ArgumentError("score/id count mismatch");
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] < scores[b];
        return ids[a] < ids[b];
    });
    std::vector<uint64_t> out;
    out.reserve(ids.size());
    for (std::size_t i : order) out.push_back(ids[i]);
    return out;
}

uint32_t mode_rectify(const NeighborSet& ns, uint32_t current_label,
                      double tau) {
    if (ns.neighbors.empty()) throw ArgumentError("empty neighbor set");
    uint32_t max_label = 0;
    for (const auto& nb : ns.neighbors)
        max_label = std::max(max_label, nb.aux_label);
    std::vector<std::size_t> freq(max_label + 1, 0);
    for (const auto& nb : ns.neighbors) ++freq[nb.aux_label];
    uint32_t mode = 0;
    for (uint32_t c = 1; c <= max_label; ++c)
        if (freq[c] > freq[mode]) mode = c; // ties keep the smaller index
    const double share = static_cast<double>(freq[mode]) /
                         static_cast<double>(ns.neighbors.size());
    return share > tau ? mode : current_label;
}

void save_rectify_log(const std::vector<RectifyRecord>& log,
                      const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot write " + path.string());
    os << "id,old_label,new_label,score,decision\n";
    char buf[64];
    for (const auto& r : log) {
        const char* d = r.decision == RectifyRecord::Decision::rectified
                            ? "rectified"
                            : r.decision == RectifyRecord::Decision::removed
                                  ? "removed"
                                  : "kept";
        auto res = std::to_chars(buf, buf + sizeof(buf), r.score,
                                 std::chars_format::general, 17);
        os << r.id << ',' << r.old_label << ',' << r.new_label << ','
           << std::string_view(buf, res.ptr - buf) << ',' << d << "\n";
    }
}

AuditResult audit(const Dataset& d, const AuxiliarySet& aux,
                  const ModelCheckpoint& model, const RectifyConfig& cfg,
                  SimilarityMeasure measure, int threads) {
    d.validate();
    aux.check_disjoint(d);
    cfg.validate(aux.size());

    const auto query_phi = penultimate_features(model, d, threads);
    const auto aux_phi = penultimate_features(model, aux.data, threads);
    const std::size_t feat = model.feature_dim();

    const auto neighbor_sets =
        knn_all(query_phi, d.size(), aux_phi, aux.data.labels, aux.data.ids,
                feat, cfg.k, measure, d.ids, threads);

    std::vector<double> scores(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        scores[i] = label_agreement_score(neighbor_sets[i], d.labels[i]);

    const char* method =
        measure == SimilarityMeasure::cos ? "sim-cos" : "sim-dot";
    AuditResult result;
    result.scores = ScoreTable::from_scores(method, d.ids, scores);

    const auto prefix = static_cast<std::size_t>(
        std::ceil(cfg.p * static_cast<double>(d.size())));

    std::vector<std::size_t> by_id(d.size());
    {
        std::vector<std::size_t> idx(d.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return d.ids[a] < d.ids[b];
        });
        by_id = std::move(idx);
    }
    auto find_row = [&](uint64_t id) {
        auto it = std::lower_bound(by_id.begin(), by_id.end(), id,
                                   [&](std::size_t r, uint64_t v) {
                                       return d.ids[r] < v;
                                   });
        return *it;
    };

    Dataset cleaned = d;
    std::vector<char> removed(d.size(), 0);
    for (std::size_t r = 0; r < prefix && r < result.scores.entries.size();
         ++r) {
        const auto& entry = result.scores.entries[r];
        const std::size_t row = find_row(entry.id);
        RectifyRecord rec;
        rec.id = entry.id;
        rec.old_label = d.labels[row];
        rec.score = entry.score;
        if (cfg.remove) {
            removed[row] = 1;
            rec.new_label = rec.old_label;
            rec.decision = RectifyRecord::Decision::removed;
        } else {
            const uint32_t fixed =
                mode_rectify(neighbor_sets[row], d.labels[row], cfg.tau);
            rec.new_label = fixed;
            rec.decision = fixed != rec.old_label
                               ? RectifyRecord::Decision::rectified
                               : RectifyRecord::Decision::kept;
            cleaned.labels[row] = fixed;
        }
        result.log.push_back(rec);
    }

    if (cfg.remove) {
        Dataset kept;
        kept.dim = cleaned.dim;
        kept.num_classes = cleaned.num_classes;
        if (cleaned.true_labels) kept.true_labels = std::vector<uint32_t>{};
        for (std::size_t i = 0; i < cleaned.size(); ++i) {
            if (removed[i]) continue;
            auto row = cleaned.row(i);
            kept.features.insert(kept.features.end(), row.begin(), row.end());
            kept.labels.push_back(cleaned.labels[i]);
            if (cleaned.true_labels)
                kept.true_labels->push_back((*cleaned.true_labels)[i]);
            kept.ids.push_back(cleaned.ids[i]);
        }
        cleaned = std::move(kept);
    }
    result.cleaned = std::move(cleaned);
    return result;
}

} // namespace labelaudit
