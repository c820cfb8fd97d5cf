#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "labelaudit/dataset.hpp"

namespace labelaudit {

enum class Activation { tanh, relu };
enum class Optimizer { adam, sgd };

struct ModelConfig {
    std::size_t hidden = 0; // 0 => softmax regression, penultimate = input
    Activation activation = Activation::tanh;
    std::size_t epochs = 15;
    std::size_t batch_size = 32;
    std::vector<double> lr_schedule = {1e-3}; // broadcast if shorter than T
    double weight_decay = 0.0;
    Optimizer optimizer = Optimizer::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    uint64_t seed = 0;

    double lr(std::size_t epoch) const {
        return lr_schedule[epoch < lr_schedule.size() ? epoch
                                                      : lr_schedule.size() - 1];
    }
    void validate() const; // throws ArgumentError
};

/// One epoch's snapshot of the two-layer softmax classifier. hidden == 0
/// collapses the encoder to the identity.
struct ModelCheckpoint {
    std::size_t input_dim = 0;
    std::size_t hidden = 0;
    Activation activation = Activation::tanh;
    uint32_t num_classes = 0;
    std::vector<double> enc_w;  // hidden x input_dim
    std::vector<double> enc_b;  // hidden
    std::vector<double> head_w; // num_classes x feature_dim()
    std::vector<double> head_b; // num_classes
    uint32_t epoch = 0;
    double learning_rate = 0.0;
    double val_accuracy = 0.0;

    std::size_t feature_dim() const { return hidden ? hidden : input_dim; }

    std::vector<double> penultimate(std::span<const double> x) const;
    std::vector<double> predict_proba(std::span<const double> x) const;
    uint32_t predict(std::span<const double> x) const;

    void save(const std::filesystem::path& path) const;
    static ModelCheckpoint load(const std::filesystem::path& path);
};

struct TrainResult {
    std::vector<ModelCheckpoint> checkpoints; // one per epoch, in order
    std::size_t best_epoch = 0;               // index into checkpoints

    const ModelCheckpoint& best() const { return checkpoints[best_epoch]; }
};

// Deterministic given cfg.seed. Throws NumericError naming the epoch if the
// loss goes non-finite.
TrainResult train(const Dataset& d, const Dataset& val, const ModelConfig& cfg);

double accuracy(const ModelCheckpoint& m, const Dataset& d);
double mean_cross_entropy(const ModelCheckpoint& m, const Dataset& d);

// Penultimate features of every row, n x feature_dim, row-major.
std::vector<double> penultimate_features(const ModelCheckpoint& m,
                                         const Dataset& d, int threads = 1);

} // namespace labelaudit
