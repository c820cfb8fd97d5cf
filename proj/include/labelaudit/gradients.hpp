#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "labelaudit/confidence.hpp"
#include "labelaudit/dataset.hpp"
#include "labelaudit/model.hpp"
#include "labelaudit/score_table.hpp"

namespace labelaudit {

/// Last-layer cross-entropy gradient stored in factored form: the full
/// gradient w.r.t. the head weights is the outer product residual x feature.
struct LastLayerGradient {
    uint64_t id = 0;
    std::vector<double> residual; // yhat - onehot(label), length N
    std::vector<double> feature;  // penultimate phi, length h_eff

    double norm() const;
    std::vector<double> flattened() const; // N x h_eff row-major
};

LastLayerGradient last_layer_gradient(const ModelCheckpoint& m,
                                      std::span<const double> x,
                                      uint32_t label, uint64_t id = 0);

std::vector<LastLayerGradient> last_layer_gradients(const ModelCheckpoint& m,
                                                    const Dataset& d,
                                                    int threads = 1);

// <g_a, g_b> via the factored identity <r_a,r_b> * <phi_a,phi_b>.
double grad_dot(const LastLayerGradient& a, const LastLayerGradient& b);

// Cosine of the two full gradients. Throws NumericError on a zero gradient.
double grad_cos(const LastLayerGradient& a, const LastLayerGradient& b);

// Sum over epochs of eta_t * grad_dot at epoch t. Lists must align.
double tracin(const std::vector<LastLayerGradient>& a_epochs,
              const std::vector<LastLayerGradient>& b_epochs,
              const std::vector<double>& etas);

using InverseHvp =
    std::function<std::vector<double>(const std::vector<double>&)>;

// IF(a, b) = -(1/n) <g_a, H^-1 g_b>.
double influence_function(const LastLayerGradient& a,
                          const LastLayerGradient& b,
                          const InverseHvp& h_inv_vp, std::size_t n_train);

struct LissaConfig {
    double damping = 0.01;
    double scale = 10.0;
    std::size_t depth = 500;
    std::size_t repeats = 1;
    uint64_t seed = 0;
};

using StochasticHvp = std::function<std::vector<double>(
    const std::vector<double>&, std::mt19937_64&)>;

// Recursive inverse-HVP estimate: r <- v + r - hvp(r)/scale, `depth` updates
// from r = 0, result r/scale, averaged over `repeats` seeded draws. Throws
// NumericError if an iterate norm exceeds 1e6x the input norm.
std::vector<double> lissa_hvp_inverse(const std::vector<double>& v,
                                      const LissaConfig& cfg,
                                      const StochasticHvp& hvp);

/// Damped Gauss-Newton Hessian of the mean last-layer CE loss, which is the
/// exact Hessian for softmax regression. Operates on N x h_eff flattened
/// vectors.
class LastLayerHessian {
public:
    LastLayerHessian(const ModelCheckpoint& m, const Dataset& d,
                     double damping, int threads = 1);

    std::size_t dim() const { return num_classes_ * feat_dim_; }
    std::size_t examples() const { return n_; }

    // Exact (full-batch) damped Hessian-vector product.
    std::vector<double> hvp(const std::vector<double>& v) const;
    // Single-example unbiased estimate, for the stochastic LiSSA path.
    std::vector<double> sampled_hvp(const std::vector<double>& v,
                                    std::mt19937_64& rng) const;
    // Dense matrix, for small models and test oracles only.
    std::vector<double> dense() const;

private:
    std::vector<double> hvp_one(const std::vector<double>& v,
                                std::size_t i) const;

    std::size_t n_ = 0;
    std::size_t num_classes_ = 0;
    std::size_t feat_dim_ = 0;
    double damping_ = 0.0;
    std::vector<double> probs_;    // n x N
    std::vector<double> features_; // n x h_eff
    int threads_ = 1;
};

struct TheoryKernel {
    double g_same = 0.0; // same-label gradient dot under the alpha/eps model
    double g_diff = 0.0; // different-label value
    double ratio = 0.0;  // |g_same| / |g_diff|, algebraically N - 1
};

// Idealized kernel values for confidence alpha in (1/N, 1).
TheoryKernel theory_kernel_values(double alpha, uint32_t num_classes);

// <r_a, r_b> from full predicted distributions and observed labels.
double empirical_g(const ProbRecord& a, const ProbRecord& b);

enum class InfluenceMethod { IF, GD, GC, TracIn };

// score(i) = sum over the reference set of the pairwise influence; ascending
// rank order puts the most negative (most suspicious) first.
ScoreTable aggregate_influence(
    const std::vector<LastLayerGradient>& train_grads,
    const std::vector<LastLayerGradient>& ref_grads, InfluenceMethod method,
    int threads = 1);

// TracIn aggregation across epochs; outer index is the epoch.
ScoreTable aggregate_tracin(
    const std::vector<std::vector<LastLayerGradient>>& train_by_epoch,
    const std::vector<std::vector<LastLayerGradient>>& ref_by_epoch,
    const std::vector<double>& etas, int threads = 1);

// IF aggregation with a single inverse-Hessian solve on the summed
// reference gradient.
ScoreTable aggregate_if(const std::vector<LastLayerGradient>& train_grads,
                        const std::vector<LastLayerGradient>& ref_grads,
                        const LastLayerHessian& hessian,
                        const LissaConfig& lissa, std::size_t n_train,
                        int threads = 1);

} // namespace labelaudit
