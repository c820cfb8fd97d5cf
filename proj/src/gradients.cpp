#include "labelaudit/gradients.hpp"
#include "labelaudit/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

namespace labelaudit {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

} // namespace

double LastLayerGradient::norm() const {
    return norm2(residual) * norm2(feature);
}

std::vector<double> LastLayerGradient::flattened() const {
    std::vector<double> g(residual.size() * feature.size());
    for (std::size_t c = 0; c < residual.size(); ++c)
        for (std::size_t j = 0; j < feature.size(); ++j)
            g[c * feature.size() + j] = residual[c] * feature[j];
    return g;
}

LastLayerGradient last_layer_gradient(const ModelCheckpoint& m,
                                      std::span<const double> x,
                                      uint32_t label, uint64_t id) {
    if (label >= m.num_classes)
        throw ArgumentError("label out of range for checkpoint");
    LastLayerGradient g;
    g.id = id;
    g.feature = m.penultimate(x);
    g.residual = m.predict_proba(x);
    g.residual[label] -= 1.0;
    return g;
}

std::vector<LastLayerGradient> last_layer_gradients(const ModelCheckpoint& m,
                                                    const Dataset& d,
                                                    int threads) {
    std::vector<LastLayerGradient> out(d.size());
#ifdef _OPENMP
#pragma omp parallel for num_threads(std::max(threads, 1)) schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(d.size()); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        out[idx] =
            last_layer_gradient(m, d.row(idx), d.labels[idx], d.ids[idx]);
    }
    return out;
}

double grad_dot(const LastLayerGradient& a, const LastLayerGradient& b) {
    if (a.residual.size() != b.residual.size() ||
        a.feature.size() != b.feature.size())
        throw ArgumentError("gradients from incompatible models");
    return dot(a.residual, b.residual) * dot(a.feature, b.feature);
}

double grad_cos(const LastLayerGradient& a, const LastLayerGradient& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0)
        throw NumericError("cosine undefined for zero gradient");
    return grad_dot(a, b) / (na * nb);
}

double tracin(const std::vector<LastLayerGradient>& a_epochs,
              const std::vector<LastLayerGradient>& b_epochs,
              const std::vector<double>& etas) {
    if (a_epochs.size() != b_epochs.size() || a_epochs.size() != etas.size())
        throw ArgumentError("tracin epoch lists must align");
    if (a_epochs.empty()) throw ArgumentError("tracin needs >= 1 epoch");
    double s = 0.0;
    for (std::size_t t = 0; t < etas.size(); ++t)
        s += etas[t] * grad_dot(a_epochs[t], b_epochs[t]);
    return s;
}

double influence_function(const LastLayerGradient& a,
                          const LastLayerGradient& b,
                          const InverseHvp& h_inv_vp, std::size_t n_train) {
    if (n_train == 0) throw ArgumentError("training size must be positive");
    const std::vector<double> solved = h_inv_vp(b.flattened());
    return -dot(a.flattened(), solved) / static_cast<double>(n_train);
}

std::vector<double> lissa_hvp_inverse(const std::vector<double>& v,
                                      const LissaConfig& cfg,
                                      const StochasticHvp& hvp) {
    if (cfg.depth < 1) throw ArgumentError("lissa depth must be >= 1");
    if (cfg.repeats < 1) throw ArgumentError("lissa repeats must be >= 1");
    if (!(cfg.scale > 0.0)) throw ArgumentError("lissa scale must be > 0");

    const double vnorm = norm2(v);
    std::vector<double> avg(v.size(), 0.0);
    for (std::size_t rep = 0; rep < cfg.repeats; ++rep) {
        std::mt19937_64 rng(cfg.seed + rep);
        std::vector<double> r(v.size(), 0.0);
        for (std::size_t step = 0; step < cfg.depth; ++step) {
            const std::vector<double> hr = hvp(r, rng);
            for (std::size_t i = 0; i < r.size(); ++i)
                r[i] = v[i] + r[i] - hr[i] / cfg.scale;
            if (norm2(r) > 1e6 * std::max(vnorm, 1.0))
                throw NumericError(
                    "lissa diverged; increase scale or damping");
        }
        for (std::size_t i = 0; i < r.size(); ++i)
            avg[i] += r[i] / cfg.scale;
    }
    for (double& x : avg) x /= static_cast<double>(cfg.repeats);
    return avg;
}

LastLayerHessian::LastLayerHessian(const ModelCheckpoint& m, const Dataset& d,
                                   double damping, int threads)
    : n_(d.size()),
      num_classes_(m.num_classes),
      feat_dim_(m.feature_dim()),
      damping_(damping),
      threads_(std::max(threads, 1)) {
    if (damping < 0.0) throw ArgumentError("hessian damping must be >= 0");
    if (n_ == 0) throw ArgumentError("hessian needs a non-empty dataset");
    probs_.resize(n_ * num_classes_);
    features_.resize(n_ * feat_dim_);
#ifdef _OPENMP
#pragma omp parallel for num_threads(threads_) schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(n_); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const auto p = m.predict_proba(d.row(idx));
        const auto phi = m.penultimate(d.row(idx));
        std::copy(p.begin(), p.end(), probs_.begin() + idx * num_classes_);
        std::copy(phi.begin(), phi.end(), features_.begin() + idx * feat_dim_);
    }
}

// Per-example GN block applied to V: ((diag(p) - p p^T) V phi) phi^T.
std::vector<double> LastLayerHessian::hvp_one(const std::vector<double>& v,
                                              std::size_t i) const {
    const double* p = probs_.data() + i * num_classes_;
    const double* phi = features_.data() + i * feat_dim_;

    std::vector<double> t(num_classes_, 0.0); // V phi
    for (std::size_t c = 0; c < num_classes_; ++c) {
        const double* row = v.data() + c * feat_dim_;
        double s = 0.0;
        for (std::size_t j = 0; j < feat_dim_; ++j) s += row[j] * phi[j];
        t[c] = s;
    }
    double pt = 0.0;
    for (std::size_t c = 0; c < num_classes_; ++c) pt += p[c] * t[c];

    std::vector<double> out(v.size(), 0.0);
    for (std::size_t c = 0; c < num_classes_; ++c) {
        const double a = p[c] * (t[c] - pt);
        double* row = out.data() + c * feat_dim_;
        for (std::size_t j = 0; j < feat_dim_; ++j) row[j] = a * phi[j];
    }
    return out;
}

std::vector<double> LastLayerHessian::hvp(const std::vector<double>& v) const {
    if (v.size() != dim()) throw ArgumentError("hvp dimension mismatch");
    std::vector<double> acc(v.size(), 0.0);
#ifdef _OPENMP
#pragma omp parallel num_threads(threads_)
    {
        std::vector<double> local(v.size(), 0.0);
#pragma omp for schedule(static) nowait
        for (long long i = 0; i < static_cast<long long>(n_); ++i) {
            const auto one = hvp_one(v, static_cast<std::size_t>(i));
            for (std::size_t j = 0; j < local.size(); ++j) local[j] += one[j];
        }
#pragma omp critical
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += local[j];
    }
#else
    for (std::size_t i = 0; i < n_; ++i) {
        const auto one = hvp_one(v, i);
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += one[j];
    }
#endif
    for (std::size_t j = 0; j < acc.size(); ++j)
        acc[j] = acc[j] / static_cast<double>(n_) + damping_ * v[j];
    return acc;
}

std::vector<double> LastLayerHessian::sampled_hvp(const std::vector<double>& v,
                                                  std::mt19937_64& rng) const {
    if (v.size() != dim()) throw ArgumentError("hvp dimension mismatch");
    std::uniform_int_distribution<std::size_t> pick(0, n_ - 1);
    auto out = hvp_one(v, pick(rng));
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += damping_ * v[j];
    return out;
}

std::vector<double> LastLayerHessian::dense() const {
    const std::size_t D = dim();
    std::vector<double> h(D * D);
    std::vector<double> e(D, 0.0);
    for (std::size_t c = 0; c < D; ++c) {
        e[c] = 1.0;
        const auto col = hvp(e);
        for (std::size_t r = 0; r < D; ++r) h[r * D + c] = col[r];
        e[c] = 0.0;
    }
    return h;
}

TheoryKernel theory_kernel_values(double alpha, uint32_t num_classes) {
    if (num_classes < 2) throw ArgumentError("need at least 2 classes");
    const double N = static_cast<double>(num_classes);
    if (!(alpha > 1.0 / N && alpha < 1.0))
        throw ArgumentError("alpha must lie in (1/N, 1)");
    const double eps = (1.0 - alpha) / (N - 1.0);
    TheoryKernel k;
    k.g_same = (1.0 - alpha) * (1.0 - alpha) + eps * eps * (N - 1.0);
    k.g_diff = -eps * eps * N;
    k.ratio = std::abs(k.g_same) / std::abs(k.g_diff);
    return k;
}

double empirical_g(const ProbRecord& a, const ProbRecord& b) {
    a.validate();
    b.validate();
    if (a.probs.size() != b.probs.size())
        throw ArgumentError("class count mismatch");
    double s = 0.0;
    for (std::size_t c = 0; c < a.probs.size(); ++c) {
        const double ra = a.probs[c] - (c == a.label ? 1.0 : 0.0);
        const double rb = b.probs[c] - (c == b.label ? 1.0 : 0.0);
        s += ra * rb;
    }
    return s;
}

namespace {

ScoreTable aggregate_pairwise(const std::vector<LastLayerGradient>& train,
                              const std::vector<LastLayerGradient>& ref,
                              InfluenceMethod method, int threads,
                              const char* name) {
    if (ref.empty()) throw ArgumentError("reference set must be non-empty");
    std::vector<double> scores(train.size(), 0.0);
    std::size_t skipped = 0;
#ifdef _OPENMP
#pragma omp parallel for num_threads(std::max(threads, 1)) schedule(static) \
    reduction(+ : skipped)
#endif
    for (long long i = 0; i < static_cast<long long>(train.size()); ++i) {
        const auto& gi = train[static_cast<std::size_t>(i)];
        double s = 0.0;
        if (method == InfluenceMethod::GC && gi.norm() == 0.0) {
            ++skipped;
        } else {
            for (const auto& gj : ref) {
                if (method == InfluenceMethod::GD) {
                    s += grad_dot(gi, gj);
                } else { // GC
                    if (gj.norm() == 0.0) continue;
                    s += grad_cos(gi, gj);
                }
            }
        }
        scores[static_cast<std::size_t>(i)] = s;
    }
    if (skipped > 0)
        std::cerr << "warning: " << name << " skipped " << skipped
                  << " zero-gradient record(s)\n";
    std::vector<uint64_t> ids;
    ids.reserve(train.size());
    for (const auto& g : train) ids.push_back(g.id);
    return ScoreTable::from_scores(name, ids, scores);
}

} // namespace

ScoreTable aggregate_influence(const std::vector<LastLayerGradient>& train,
                               const std::vector<LastLayerGradient>& ref,
                               InfluenceMethod method, int threads) {
    switch (method) {
        case InfluenceMethod::GD:
            return aggregate_pairwise(train, ref, method, threads, "gd");
        case InfluenceMethod::GC:
            return aggregate_pairwise(train, ref, method, threads, "gc");
        default:
            throw ArgumentError(
                "use aggregate_tracin / aggregate_if for this method");
    }
}

ScoreTable aggregate_tracin(
    const std::vector<std::vector<LastLayerGradient>>& train_by_epoch,
    const std::vector<std::vector<LastLayerGradient>>& ref_by_epoch,
    const std::vector<double>& etas, int threads) {
    if (train_by_epoch.size() != ref_by_epoch.size() ||
        train_by_epoch.size() != etas.size())
        throw ArgumentError("tracin epoch lists must align");
    if (etas.empty()) throw ArgumentError("tracin needs >= 1 epoch");
    if (ref_by_epoch[0].empty())
        throw ArgumentError("reference set must be non-empty");

    const std::size_t n = train_by_epoch[0].size();
    std::vector<double> scores(n, 0.0);
#ifdef _OPENMP
#pragma omp parallel for num_threads(std::max(threads, 1)) schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        double s = 0.0;
        for (std::size_t t = 0; t < etas.size(); ++t)
            for (const auto& gj : ref_by_epoch[t])
                s += etas[t] * grad_dot(train_by_epoch[t][idx], gj);
        scores[idx] = s;
    }
    std::vector<uint64_t> ids;
    ids.reserve(n);
    for (const auto& g : train_by_epoch[0]) ids.push_back(g.id);
    return ScoreTable::from_scores("tracin", ids, scores);
}

ScoreTable aggregate_if(const std::vector<LastLayerGradient>& train,
                        const std::vector<LastLayerGradient>& ref,
                        const LastLayerHessian& hessian,
                        const LissaConfig& lissa, std::size_t n_train,
                        int threads) {
    if (ref.empty()) throw ArgumentError("reference set must be non-empty");
    if (n_train == 0) throw ArgumentError("training size must be positive");

    // IF is linear in the reference gradient, so one solve on the summed
    // reference gradient covers the whole aggregation.
    std::vector<double> ref_sum(hessian.dim(), 0.0);
    for (const auto& g : ref) {
        const auto flat = g.flattened();
        for (std::size_t j = 0; j < flat.size(); ++j) ref_sum[j] += flat[j];
    }
    const auto solved = lissa_hvp_inverse(
        ref_sum, lissa,
        [&](const std::vector<double>& v, std::mt19937_64&) {
            return hessian.hvp(v);
        });

    const std::size_t feat = train.empty() ? 0 : train[0].feature.size();
    std::vector<double> scores(train.size(), 0.0);
#ifdef _OPENMP
#pragma omp parallel for num_threads(std::max(threads, 1)) schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(train.size()); ++i) {
        const auto& g = train[static_cast<std::size_t>(i)];
        // <r phi^T, S> = r^T S phi without materializing the outer product
        double s = 0.0;
        for (std::size_t c = 0; c < g.residual.size(); ++c) {
            const double* row = solved.data() + c * feat;
            double acc = 0.0;
            for (std::size_t j = 0; j < feat; ++j) acc += row[j] * g.feature[j];
            s += g.residual[c] * acc;
        }
        scores[static_cast<std::size_t>(i)] =
            -s / static_cast<double>(n_train);
    }
    std::vector<uint64_t> ids;
    ids.reserve(train.size());
    for (const auto& g : train) ids.push_back(g.id);
    return ScoreTable::from_scores("if", ids, scores);
}

} // namespace labelaudit
