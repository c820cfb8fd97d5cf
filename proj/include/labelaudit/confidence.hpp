#pragma once

#include <cstdint>
#include <vector>

#include "labelaudit/dataset.hpp"
#include "labelaudit/model.hpp"
#include "labelaudit/score_table.hpp"

namespace labelaudit {

/// One example's predicted distribution together with its observed label.
struct ProbRecord {
    uint64_t id = 0;
    uint32_t label = 0;
    std::vector<double> probs;

    void validate() const; // distribution sums to 1 within 1e-9
};

// SC(z, p) = p_k. Lower means more suspicious.
double self_confidence(const ProbRecord& r);

// NM(z, p) = p_k - max_{j != k} p_j.
double normalized_margin(const ProbRecord& r);

// Normalized entropy H_N(p) = -(1/log N) sum p log p, with 0 log 0 = 0.
double normalized_entropy(const std::vector<double>& probs);

// CE(z, p) = p_k / H_N(p). A one-hot p (H = 0) maps to the maximum
// representable score instead of failing.
double confidence_weighted_entropy(const ProbRecord& r);

std::vector<ProbRecord> prob_records(const ModelCheckpoint& m,
                                     const Dataset& d, int threads = 1);

// method is one of "sc", "nm", "ce".
ScoreTable confidence_scores(const std::vector<ProbRecord>& records,
                             const std::string& method);

} // namespace labelaudit
