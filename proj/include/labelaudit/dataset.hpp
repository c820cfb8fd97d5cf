#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace labelaudit {

/// A labeled feature matrix. Rows are either raw inputs or precomputed
/// penultimate features of an audited external dataset. Immutable after
/// construction by convention; all pipeline stages return fresh copies.
struct Dataset {
    std::vector<double> features;             // n x dim, row-major
    std::vector<uint32_t> labels;             // observed, possibly noisy
    std::optional<std::vector<uint32_t>> true_labels; // evaluation only
    uint32_t num_classes = 0;
    std::size_t dim = 0;
    std::vector<uint64_t> ids;

    std::size_t size() const { return ids.size(); }
    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * dim, dim};
    }

    // Throws FormatError if any invariant fails (label range, NaN/Inf,
    // duplicate ids, shape mismatches).
    void validate() const;
};

/// A small trusted set, id-disjoint from the audited dataset, whose labels
/// are treated as reference truth by the neighbor-based detector.
struct AuxiliarySet {
    Dataset data;

    std::size_t size() const { return data.size(); }

    static AuxiliarySet from_trusted(Dataset d);
    // Throws ArgumentError if any id also appears in `audited`.
    void check_disjoint(const Dataset& audited) const;
};

/// Gaussian-mixture generator settings. Class means sit at
/// separation * e_c for c < dim; when num_classes > dim the axes cycle
/// through a seeded random orthogonal rotation per cycle.
struct SynthSpec {
    uint32_t num_classes = 2;
    std::size_t dim = 2;
    std::size_t per_class = 100;
    double separation = 5.0;
    double stddev = 1.0;
    uint64_t seed = 0;

    void validate() const; // throws ArgumentError
};

enum class FileFormat { binary, csv };

Dataset generate_synthetic(const SynthSpec& spec);

// Removes m examples (sampled without replacement) into a trusted
// auxiliary set; the remainder is returned as the audited set.
std::pair<Dataset, AuxiliarySet> split_aux(const Dataset& d, std::size_t m,
                                           uint64_t seed);

// `expected_classes` pins N for formats that do not carry it (CSV infers
// max label + 1 when 0); labels at or above it are a validation error.
Dataset load_features(const std::filesystem::path& path, FileFormat format,
                      uint32_t expected_classes = 0);
void save_features(const Dataset& d, const std::filesystem::path& path,
                   FileFormat format);

} // namespace labelaudit
