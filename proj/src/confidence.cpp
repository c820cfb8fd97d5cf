#include "labelaudit/confidence.hpp"
#include "labelaudit/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <limits>

namespace labelaudit {

void ProbRecord::validate() const {
    if (probs.empty()) throw ArgumentError("empty probability vector");
    if (label >= probs.size())
        throw ArgumentError("observed label out of range");
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw ArgumentError("negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ArgumentError("probabilities do not sum to 1");
}

double self_confidence(const ProbRecord& r) {
    r.validate();
    return r.probs[r.label];
}

double normalized_margin(const ProbRecord& r) {
    r.validate();
    if (r.probs.size() < 2)
        throw ArgumentError("normalized margin needs at least 2 classes");
    double best_other = -1.0;
    for (std::size_t j = 0; j < r.probs.size(); ++j)
        if (j != r.label) best_other = std::max(best_other, r.probs[j]);
    return r.probs[r.label] - best_other;
}

double normalized_entropy(const std::vector<double>& probs) {
    const std::size_t N = probs.size();
    if (N < 2) throw ArgumentError("entropy needs at least 2 classes");
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return h / std::log(static_cast<double>(N));
}

double confidence_weighted_entropy(const ProbRecord& r) {
    r.validate();
    const double h = normalized_entropy(r.probs);
    if (h == 0.0) return std::numeric_limits<double>::max();
    return r.probs[r.label] / h;
}

std::vector<ProbRecord> prob_records(const ModelCheckpoint& m,
                                     const Dataset& d, int threads) {
    std::vector<ProbRecord> out(d.size());
#ifdef _OPENMP
#pragma omp parallel for num_threads(std::max(threads, 1)) schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(d.size()); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        out[idx] = {d.ids[idx], d.labels[idx], m.predict_proba(d.row(idx))};
    }
    return out;
}

ScoreTable confidence_scores(const std::vector<ProbRecord>& records,
                             const std::string& method) {
    double (*fn)(const ProbRecord&) = nullptr;
    if (method == "sc") fn = self_confidence;
    else if (method == "nm") fn = normalized_margin;
    else if (method == "ce") fn = confidence_weighted_entropy;
    else throw ArgumentError("unknown confidence method " + method);

    std::vector<uint64_t> ids;
    std::vector<double> scores;
    ids.reserve(records.size());
    scores.reserve(records.size());
    for (const auto& r : records) {
        ids.push_back(r.id);
        scores.push_back(fn(r));
    }
    return ScoreTable::from_scores(method, ids, scores);
}

} // namespace labelaudit
