#include "labelaudit/model.hpp"
#include "labelaudit/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

namespace labelaudit {

void ModelConfig::validate() const {
    if (epochs < 1) throw ArgumentError("epochs must be >= 1");
    if (batch_size < 1) throw ArgumentError("batch size must be >= 1");
    if (lr_schedule.empty()) throw ArgumentError("lr schedule must be non-empty");
    for (double lr : lr_schedule)
        if (!(lr > 0.0)) throw ArgumentError("learning rates must be > 0");
    if (weight_decay < 0.0) throw ArgumentError("weight decay must be >= 0");
}

namespace {

double activate(Activation a, double v) {
    return a == Activation::tanh ? std::tanh(v) : std::max(0.0, v);
}

double activate_grad(Activation a, double pre, double post) {
    return a == Activation::tanh ? 1.0 - post * post : (pre > 0.0 ? 1.0 : 0.0);
}

void softmax_inplace(std::vector<double>& logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

} // namespace

std::vector<double> ModelCheckpoint::penultimate(
    std::span<const double> x) const {
    if (x.size() != input_dim)
        throw ArgumentError("input dimension mismatch: expected " +
                            std::to_string(input_dim));
    if (hidden == 0) return {x.begin(), x.end()};
    std::vector<double> phi(hidden);
    for (std::size_t j = 0; j < hidden; ++j) {
        double pre = enc_b[j];
        const double* w = enc_w.data() + j * input_dim;
        for (std::size_t i = 0; i < input_dim; ++i) pre += w[i] * x[i];
        phi[j] = activate(activation, pre);
    }
    return phi;
}

std::vector<double> ModelCheckpoint::predict_proba(
    std::span<const double> x) const {
    const std::vector<double> phi = penultimate(x);
    std::vector<double> logits(num_classes);
    const std::size_t h = feature_dim();
    for (uint32_t c = 0; c < num_classes; ++c) {
        double v = head_b[c];
        const double* w = head_w.data() + c * h;
        for (std::size_t i = 0; i < h; ++i) v += w[i] * phi[i];
        logits[c] = v;
    }
    softmax_inplace(logits);
    return logits;
}

uint32_t ModelCheckpoint::predict(std::span<const double> x) const {
    const auto p = predict_proba(x);
    return static_cast<uint32_t>(
        std::max_element(p.begin(), p.end()) - p.begin());
}

namespace {

constexpr char kCkptMagic[4] = {'L', 'N', 'C', 'K'};
constexpr uint32_t kCkptVersion = 1;

template <typename T>
void wr(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T rd(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw FormatError("truncated checkpoint file");
    return v;
}

void write_vec(std::ostream& os, const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_vec(std::istream& is, std::vector<double>& v, std::size_t count) {
    v.resize(count);
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw FormatError("truncated checkpoint weights");
}

} // namespace

void ModelCheckpoint::save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot write " + path.string());
    os.write(kCkptMagic, 4);
    wr<uint32_t>(os, kCkptVersion);
    wr<uint32_t>(os, epoch);
    wr<double>(os, learning_rate);
    wr<uint64_t>(os, input_dim);
    wr<uint64_t>(os, hidden);
    wr<uint32_t>(os, num_classes);
    wr<uint32_t>(os, static_cast<uint32_t>(activation));
    wr<double>(os, val_accuracy);
    write_vec(os, enc_w);
    write_vec(os, enc_b);
    write_vec(os, head_w);
    write_vec(os, head_b);
}

ModelCheckpoint ModelCheckpoint::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kCkptMagic, 4) != 0)
        throw FormatError("bad checkpoint magic in " + path.string());
    if (rd<uint32_t>(is) != kCkptVersion)
        throw FormatError("unsupported checkpoint version");
    ModelCheckpoint m;
    m.epoch = rd<uint32_t>(is);
    m.learning_rate = rd<double>(is);
    m.input_dim = static_cast<std::size_t>(rd<uint64_t>(is));
    m.hidden = static_cast<std::size_t>(rd<uint64_t>(is));
    m.num_classes = rd<uint32_t>(is);
    m.activation = static_cast<Activation>(rd<uint32_t>(is));
    m.val_accuracy = rd<double>(is);
    read_vec(is, m.enc_w, m.hidden * m.input_dim);
    read_vec(is, m.enc_b, m.hidden);
    read_vec(is, m.head_w, static_cast<std::size_t>(m.num_classes) *
                               m.feature_dim());
    read_vec(is, m.head_b, m.num_classes);
    return m;
}

double accuracy(const ModelCheckpoint& m, const Dataset& d) {
    if (d.size() == 0) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (m.predict(d.row(i)) == d.labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(d.size());
}

double mean_cross_entropy(const ModelCheckpoint& m, const Dataset& d) {
    double loss = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto p = m.predict_proba(d.row(i));
        loss -= std::log(std::max(p[d.labels[i]], 1e-300));
    }
    return loss / static_cast<double>(d.size());
}

std::vector<double> penultimate_features(const ModelCheckpoint& m,
                                         const Dataset& d, int threads) {
    const std::size_t n = d.size();
    const std::size_t h = m.feature_dim();
    std::vector<double> out(n * h);
#ifdef _OPENMP
#pragma omp parallel for num_threads(std::max(threads, 1)) schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        const auto phi = m.penultimate(d.row(static_cast<std::size_t>(i)));
        std::copy(phi.begin(), phi.end(),
                  out.begin() + static_cast<std::size_t>(i) * h);
    }
    return out;
}

namespace {

struct AdamState {
    std::vector<double> m, v;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void apply_update(std::vector<double>& w, const std::vector<double>& grad,
                  AdamState& st, const ModelConfig& cfg, double lr,
                  std::size_t step) {
    if (cfg.optimizer == Optimizer::sgd) {
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] -= lr * (grad[i] + cfg.weight_decay * w[i]);
        return;
    }
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < w.size(); ++i) {
        st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * grad[i];
        st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double mhat = st.m[i] / bc1;
        const double vhat = st.v[i] / bc2;
        // decoupled weight decay
        w[i] -= lr * (mhat / (std::sqrt(vhat) + cfg.adam_eps) +
                      cfg.weight_decay * w[i]);
    }
}

} // namespace

TrainResult train(const Dataset& d, const Dataset& val,
                  const ModelConfig& cfg) {
    cfg.validate();
    d.validate();
    val.validate();
    if (d.dim != val.dim || d.num_classes != val.num_classes)
        throw ArgumentError("train/validation sets disagree on dim or classes");

    const std::size_t n = d.size();
    const std::size_t dim = d.dim;
    const uint32_t N = d.num_classes;
    const std::size_t h = cfg.hidden;
    const std::size_t feat = h ? h : dim;

    ModelCheckpoint model;
    model.input_dim = dim;
    model.hidden = h;
    model.activation = cfg.activation;
    model.num_classes = N;
    model.enc_w.assign(h * dim, 0.0);
    model.enc_b.assign(h, 0.0);
    model.head_w.assign(static_cast<std::size_t>(N) * feat, 0.0);
    model.head_b.assign(N, 0.0);

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    if (h) {
        const double s = 1.0 / std::sqrt(static_cast<double>(dim));
        for (auto& w : model.enc_w) w = s * gauss(rng);
    }
    {
        const double s = 1.0 / std::sqrt(static_cast<double>(feat));
        for (auto& w : model.head_w) w = s * gauss(rng);
    }

    AdamState st_enc_w(model.enc_w.size()), st_enc_b(model.enc_b.size());
    AdamState st_head_w(model.head_w.size()), st_head_b(model.head_b.size());

    std::vector<double> g_enc_w(model.enc_w.size());
    std::vector<double> g_enc_b(model.enc_b.size());
    std::vector<double> g_head_w(model.head_w.size());
    std::vector<double> g_head_b(model.head_b.size());

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cfg.lr(epoch);
        std::shuffle(order.begin(), order.end(), rng);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            const auto bsz = static_cast<double>(stop - start);
            std::fill(g_enc_w.begin(), g_enc_w.end(), 0.0);
            std::fill(g_enc_b.begin(), g_enc_b.end(), 0.0);
            std::fill(g_head_w.begin(), g_head_w.end(), 0.0);
            std::fill(g_head_b.begin(), g_head_b.end(), 0.0);

            for (std::size_t bi = start; bi < stop; ++bi) {
                const std::size_t i = order[bi];
                const auto x = d.row(i);
                const uint32_t y = d.labels[i];

                std::vector<double> pre(h), phi;
                if (h) {
                    phi.resize(h);
                    for (std::size_t j = 0; j < h; ++j) {
                        double p = model.enc_b[j];
                        const double* w = model.enc_w.data() + j * dim;
                        for (std::size_t q = 0; q < dim; ++q) p += w[q] * x[q];
                        pre[j] = p;
                        phi[j] = activate(cfg.activation, p);
                    }
                } else {
                    phi.assign(x.begin(), x.end());
                }

                std::vector<double> probs(N);
                for (uint32_t c = 0; c < N; ++c) {
                    double v = model.head_b[c];
                    const double* w = model.head_w.data() + c * feat;
                    for (std::size_t q = 0; q < feat; ++q) v += w[q] * phi[q];
                    probs[c] = v;
                }
                softmax_inplace(probs);
                epoch_loss -= std::log(std::max(probs[y], 1e-300));

                // residual r = p - onehot(y)
                for (uint32_t c = 0; c < N; ++c) {
                    const double r = probs[c] - (c == y ? 1.0 : 0.0);
                    g_head_b[c] += r / bsz;
                    double* gw = g_head_w.data() + c * feat;
                    for (std::size_t q = 0; q < feat; ++q)
                        gw[q] += r * phi[q] / bsz;
                }
                if (h) {
                    for (std::size_t j = 0; j < h; ++j) {
                        double back = 0.0;
                        for (uint32_t c = 0; c < N; ++c) {
                            const double r = probs[c] - (c == y ? 1.0 : 0.0);
                            back += r * model.head_w[c * feat + j];
                        }
                        back *= activate_grad(cfg.activation, pre[j], phi[j]);
                        g_enc_b[j] += back / bsz;
                        double* gw = g_enc_w.data() + j * dim;
                        for (std::size_t q = 0; q < dim; ++q)
                            gw[q] += back * x[q] / bsz;
                    }
                }
            }

            ++step;
            apply_update(model.head_w, g_head_w, st_head_w, cfg, lr, step);
            apply_update(model.head_b, g_head_b, st_head_b, cfg, lr, step);
            if (h) {
                apply_update(model.enc_w, g_enc_w, st_enc_w, cfg, lr, step);
                apply_update(model.enc_b, g_enc_b, st_enc_b, cfg, lr, step);
            }
        }

        if (!std::isfinite(epoch_loss))
            throw NumericError("training diverged at epoch " +
                               std::to_string(epoch + 1));

        ModelCheckpoint snap = model;
        snap.epoch = static_cast<uint32_t>(epoch + 1);
        snap.learning_rate = lr;
        snap.val_accuracy = accuracy(snap, val);
        result.checkpoints.push_back(std::move(snap));
    }

    result.best_epoch = 0;
    for (std::size_t i = 1; i < result.checkpoints.size(); ++i)
        if (result.checkpoints[i].val_accuracy >
            result.checkpoints[result.best_epoch].val_accuracy)
            result.best_epoch = i;
    return result;
}

} // namespace labelaudit
