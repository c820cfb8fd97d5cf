#include "labelaudit/dataset.hpp"
#include "labelaudit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

namespace labelaudit {

namespace {

constexpr char kMagic[4] = {'L', 'N', 'F', '1'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const char* what) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw FormatError(std::string("truncated file reading ") + what);
    return v;
}

} // namespace

void Dataset::validate() const {
    const std::size_t n = ids.size();
    if (labels.size() != n)
        throw FormatError("label count does not match id count");
    if (features.size() != n * dim)
        throw FormatError("feature matrix shape does not match n x dim");
    if (num_classes == 0) throw FormatError("num_classes must be positive");
    for (double v : features)
        if (!std::isfinite(v))
            throw FormatError("non-finite feature value");
    for (uint32_t y : labels)
        if (y >= num_classes)
            throw FormatError("label " + std::to_string(y) +
                              " out of range for " +
                              std::to_string(num_classes) + " classes");
    if (true_labels) {
        if (true_labels->size() != n)
            throw FormatError("true_label count does not match id count");
        for (uint32_t y : *true_labels)
            if (y >= num_classes)
                throw FormatError("true_label out of class range");
    }
    std::unordered_set<uint64_t> seen;
    seen.reserve(n);
    for (uint64_t id : ids)
        if (!seen.insert(id).second)
            throw FormatError("duplicate id " + std::to_string(id));
}

AuxiliarySet AuxiliarySet::from_trusted(Dataset d) {
    d.validate();
    if (d.size() == 0) throw ArgumentError("auxiliary set must be non-empty");
    return AuxiliarySet{std::move(d)};
}

void AuxiliarySet::check_disjoint(const Dataset& audited) const {
    std::unordered_set<uint64_t> aux_ids(data.ids.begin(), data.ids.end());
    for (uint64_t id : audited.ids)
        if (aux_ids.count(id))
            throw ArgumentError("auxiliary set shares id " +
                                std::to_string(id) + " with audited set");
}

void SynthSpec::validate() const {
    if (num_classes == 0) throw ArgumentError("num_classes must be positive");
    if (dim == 0) throw ArgumentError("dim must be positive");
    if (per_class == 0) throw ArgumentError("per_class must be positive");
    if (!(separation > 0.0)) throw ArgumentError("separation must be > 0");
    if (!(stddev > 0.0)) throw ArgumentError("stddev must be > 0");
}

namespace {

// Random orthogonal matrix via Gram-Schmidt on a seeded Gaussian matrix.
std::vector<double> random_orthogonal(std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> q(d * d);
    for (std::size_t c = 0; c < d; ++c) {
        std::vector<double> v(d);
        for (auto& x : v) x = gauss(rng);
        for (std::size_t p = 0; p < c; ++p) {
            double dot = 0.0;
            for (std::size_t i = 0; i < d; ++i) dot += v[i] * q[p * d + i];
            for (std::size_t i = 0; i < d; ++i) v[i] -= dot * q[p * d + i];
        }
        double nrm = 0.0;
        for (double x : v) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (nrm < 1e-12) { --c; continue; } // retry a degenerate draw
        for (std::size_t i = 0; i < d; ++i) q[c * d + i] = v[i] / nrm;
    }
    return q;
}

} // namespace

Dataset generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const std::size_t d = spec.dim;
    const uint32_t N = spec.num_classes;

    // Mean directions: e_{c mod d}, rotated by a fresh orthogonal matrix for
    // every full cycle through the axes.
    std::vector<std::vector<double>> means(N, std::vector<double>(d, 0.0));
    std::vector<double> rotation; // identity for the first cycle
    for (uint32_t c = 0; c < N; ++c) {
        const std::size_t axis = c % d;
        if (axis == 0 && c > 0) rotation = random_orthogonal(d, rng);
        if (rotation.empty()) {
            means[c][axis] = spec.separation;
        } else {
            for (std::size_t i = 0; i < d; ++i)
                means[c][i] = spec.separation * rotation[axis * d + i];
        }
    }

    Dataset out;
    out.dim = d;
    out.num_classes = N;
    const std::size_t n = static_cast<std::size_t>(N) * spec.per_class;
    out.features.resize(n * d);
    out.labels.resize(n);
    out.true_labels = std::vector<uint32_t>(n);
    out.ids.resize(n);

    std::size_t row = 0;
    for (uint32_t c = 0; c < N; ++c) {
        for (std::size_t j = 0; j < spec.per_class; ++j, ++row) {
            for (std::size_t i = 0; i < d; ++i)
                out.features[row * d + i] = means[c][i] + spec.stddev * gauss(rng);
            out.labels[row] = c;
            (*out.true_labels)[row] = c;
            out.ids[row] = row;
        }
    }
    out.validate();
    return out;
}

std::pair<Dataset, AuxiliarySet> split_aux(const Dataset& d, std::size_t m,
                                           uint64_t seed) {
    const std::size_t n = d.size();
    if (m >= n)
        throw ArgumentError("auxiliary size m must be smaller than n");
    if (m == 0) throw ArgumentError("auxiliary size m must be positive");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);

    std::vector<char> in_aux(n, 0);
    for (std::size_t j = 0; j < m; ++j) in_aux[idx[j]] = 1;

    auto take = [&](bool aux) {
        Dataset s;
        s.dim = d.dim;
        s.num_classes = d.num_classes;
        if (d.true_labels) s.true_labels = std::vector<uint32_t>{};
        for (std::size_t i = 0; i < n; ++i) {
            if (static_cast<bool>(in_aux[i]) != aux) continue;
            auto r = d.row(i);
            s.features.insert(s.features.end(), r.begin(), r.end());
            s.labels.push_back(d.labels[i]);
            if (d.true_labels) s.true_labels->push_back((*d.true_labels)[i]);
            s.ids.push_back(d.ids[i]);
        }
        return s;
    };

    Dataset audited = take(false);
    AuxiliarySet aux = AuxiliarySet::from_trusted(take(true));
    aux.check_disjoint(audited);
    return {std::move(audited), std::move(aux)};
}

namespace {

Dataset load_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("bad magic in " + path.string());
    const auto version = read_pod<uint32_t>(is, "version");
    if (version != kVersion)
        throw FormatError("unsupported feature file version " +
                          std::to_string(version));
    const auto n = read_pod<uint64_t>(is, "n");
    const auto d = read_pod<uint64_t>(is, "d");
    const auto N = read_pod<uint32_t>(is, "num_classes");
    const auto flags = read_pod<uint32_t>(is, "flags");

    Dataset out;
    out.dim = static_cast<std::size_t>(d);
    out.num_classes = N;
    out.features.resize(static_cast<std::size_t>(n * d));
    for (auto& v : out.features) v = read_pod<float>(is, "feature");
    out.labels.resize(n);
    if (flags & 1u) {
        for (auto& y : out.labels) y = read_pod<uint32_t>(is, "label");
    }
    if (flags & 2u) {
        out.true_labels = std::vector<uint32_t>(n);
        for (auto& y : *out.true_labels) y = read_pod<uint32_t>(is, "true_label");
    }
    out.ids.resize(n);
    std::iota(out.ids.begin(), out.ids.end(), uint64_t{0});
    out.validate();
    return out;
}

void save_binary(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot write " + path.string());
    os.write(kMagic, 4);
    write_pod<uint32_t>(os, kVersion);
    write_pod<uint64_t>(os, d.size());
    write_pod<uint64_t>(os, d.dim);
    write_pod<uint32_t>(os, d.num_classes);
    uint32_t flags = 1u | (d.true_labels ? 2u : 0u);
    write_pod<uint32_t>(os, flags);
    for (double v : d.features) write_pod<float>(os, static_cast<float>(v));
    for (uint32_t y : d.labels) write_pod<uint32_t>(os, y);
    if (d.true_labels)
        for (uint32_t y : *d.true_labels) write_pod<uint32_t>(os, y);
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw FormatError("empty CSV " + path.string());

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 3 || header[0] != "id" || header[1] != "label")
        throw FormatError("CSV header must start with id,label[,true_label]");
    bool has_true = header[2] == "true_label";
    const std::size_t first_feat = has_true ? 3 : 2;
    const std::size_t d = header.size() - first_feat;
    if (d == 0) throw FormatError("CSV has no feature columns");

    Dataset out;
    out.dim = d;
    if (has_true) out.true_labels = std::vector<uint32_t>{};

    uint32_t max_label = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != header.size())
            throw FormatError("CSV row has " + std::to_string(cells.size()) +
                              " cells, expected " + std::to_string(header.size()));
        try {
            out.ids.push_back(std::stoull(cells[0]));
            out.labels.push_back(static_cast<uint32_t>(std::stoul(cells[1])));
            if (has_true)
                out.true_labels->push_back(
                    static_cast<uint32_t>(std::stoul(cells[2])));
            for (std::size_t i = first_feat; i < cells.size(); ++i)
                out.features.push_back(std::stod(cells[i]));
        } catch (const std::exception&) {
            throw FormatError("unparseable CSV cell in " + path.string());
        }
        max_label = std::max(max_label, out.labels.back());
        if (has_true) max_label = std::max(max_label, out.true_labels->back());
    }
    out.num_classes = max_label + 1;
    out.validate();
    return out;
}

void save_csv(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot write " + path.string());
    os << "id,label";
    if (d.true_labels) os << ",true_label";
    for (std::size_t i = 0; i < d.dim; ++i) os << ",f" << i;
    os << "\n";
    char buf[64];
    for (std::size_t r = 0; r < d.size(); ++r) {
        os << d.ids[r] << ',' << d.labels[r];
        if (d.true_labels) os << ',' << (*d.true_labels)[r];
        for (double v : d.row(r)) {
            auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                     std::chars_format::general, 17);
            os << ',' << std::string_view(buf, res.ptr - buf);
        }
        os << "\n";
    }
}

} // namespace

Dataset load_features(const std::filesystem::path& path, FileFormat format,
                      uint32_t expected_classes) {
    Dataset d = format == FileFormat::binary ? load_binary(path)
                                             : load_csv(path);
    if (expected_classes > 0) {
        if (d.num_classes > expected_classes)
            throw FormatError("file contains label >= declared class count " +
                              std::to_string(expected_classes));
        d.num_classes = expected_classes;
    }
    return d;
}

void save_features(const Dataset& d, const std::filesystem::path& path,
                   FileFormat format) {
    d.validate();
    if (format == FileFormat::binary)
        save_binary(d, path);
    else
        save_csv(d, path);
}

} // namespace labelaudit
