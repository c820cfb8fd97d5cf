#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "labelaudit/dataset.hpp"

namespace labelaudit {

enum class NoiseKind { uniform, ambiguity, concentrated };

struct NoiseEntry {
    uint64_t id;
    uint32_t original_label;
    uint32_t corrupted_label;
};

/// Ground truth of an injection: which ids were flipped and from what.
struct NoiseReport {
    NoiseKind kind = NoiseKind::uniform;
    double rate = 0.0;
    uint64_t seed = 0;
    std::vector<NoiseEntry> entries;

    std::size_t count() const { return entries.size(); }
    void save_csv(const std::filesystem::path& path) const;
    static NoiseReport load_csv(const std::filesystem::path& path);
};

// Flips floor(rate*n) uniformly chosen labels to a uniformly random
// different class.
std::pair<Dataset, NoiseReport> inject_uniform(const Dataset& d, double rate,
                                               uint64_t seed);

// Within each class c, flips floor(rate * class size) members to mapping[c].
// The mapping must be a derangement over [0, N).
std::pair<Dataset, NoiseReport> inject_ambiguity(
    const Dataset& d, double rate, const std::vector<uint32_t>& mapping,
    uint64_t seed);

// Derangement used when no mapping is given: h(i) = (i+1) mod N.
std::vector<uint32_t> cyclic_shift_mapping(uint32_t num_classes);

// Poisoning model: flips the floor(rate*n) source-class points nearest to the
// densest source-class point (smallest mean distance to its 10 same-class
// neighbors), all to target_class.
std::pair<Dataset, NoiseReport> inject_concentrated(const Dataset& d,
                                                    double rate,
                                                    uint32_t source_class,
                                                    uint32_t target_class,
                                                    uint64_t seed);

// Re-applies a report's flips to a pristine dataset.
Dataset replay_noise(const Dataset& original, const NoiseReport& report);

} // namespace labelaudit
