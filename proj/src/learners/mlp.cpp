#include "qoe/learners/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qoe/error.hpp"

namespace qoe::learners {
namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEpsilon = 1e-8;

/// Activations of one forward pass. pre[l] are layer-l pre-activations,
/// act[l] the inputs to layer l (act[0] = z).
struct Trace {
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> act;
};

void forward(const MlpModel& m, std::span<const double> z, std::span<const double> mask, Trace& t) {
    const std::size_t layers = m.layer_count();
    t.act.resize(layers);
    t.pre.resize(layers);
    t.act[0].assign(z.begin(), z.end());
    std::size_t mask_at = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = m.layer_sizes[l];
        const std::size_t out = m.layer_sizes[l + 1];
        const double* w = m.parameters.data() + m.weight_offset(l);
        const double* b = m.parameters.data() + m.bias_offset(l);
        auto& pre = t.pre[l];
        pre.resize(out);
        const auto& a = t.act[l];
        for (std::size_t o = 0; o < out; ++o) {
            double s = b[o];
            const double* row = w + o * in;
            for (std::size_t i = 0; i < in; ++i) s += row[i] * a[i];
            pre[o] = s;
        }
        if (l + 1 < layers) {
            auto& next = t.act[l + 1];
            next.resize(out);
            for (std::size_t o = 0; o < out; ++o) {
                const double r = pre[o] > 0.0 ? pre[o] : 0.0;
                next[o] = mask.empty() ? r : r * mask[mask_at + o];
            }
            mask_at += out;
        }
    }
}

double batch_pass(const MlpModel& m, const FeatureMatrix& z, std::span<const double> targets,
                  std::span<const std::size_t> batch, std::span<const double> dropout,
                  std::vector<double>* gradient) {
    if (batch.empty()) throw DataError("empty batch");
    const std::size_t hidden = m.hidden_units();
    if (!dropout.empty() && dropout.size() != batch.size() * hidden) {
        throw DataError("dropout mask size does not match batch and network");
    }
    const std::size_t layers = m.layer_count();
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    if (gradient) gradient->assign(m.parameters.size(), 0.0);

    Trace t;
    std::vector<double> delta;
    std::vector<double> back;
    double loss = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const std::size_t r = batch[k];
        const auto mask = dropout.empty() ? std::span<const double>{} : dropout.subspan(k * hidden, hidden);
        forward(m, z.row(r), mask, t);
        const double err = t.pre[layers - 1][0] - targets[r];
        loss += err * err * inv_b;
        if (!gradient) continue;

        delta.assign(1, 2.0 * err * inv_b);
        // Mask offsets of each hidden layer's units.
        std::size_t mask_end = hidden;
        for (std::size_t l = layers; l-- > 0;) {
            const std::size_t in = m.layer_sizes[l];
            const std::size_t out = m.layer_sizes[l + 1];
            double* gw = gradient->data() + m.weight_offset(l);
            double* gb = gradient->data() + m.bias_offset(l);
            const auto& a = t.act[l];
            for (std::size_t o = 0; o < out; ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                double* row = gw + o * in;
                for (std::size_t i = 0; i < in; ++i) row[i] += d * a[i];
                gb[o] += d;
            }
            if (l == 0) break;
            const double* w = m.parameters.data() + m.weight_offset(l);
            back.assign(in, 0.0);
            for (std::size_t o = 0; o < out; ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                const double* row = w + o * in;
                for (std::size_t i = 0; i < in; ++i) back[i] += row[i] * d;
            }
            // Layer l's input is hidden layer l-1's (masked) ReLU output.
            const std::size_t mask_begin = mask_end - in;
            const auto& pre = t.pre[l - 1];
            for (std::size_t i = 0; i < in; ++i) {
                double g = pre[i] > 0.0 ? back[i] : 0.0;
                if (!mask.empty()) g *= mask[mask_begin + i];
                back[i] = g;
            }
            mask_end = mask_begin;
            delta.swap(back);
        }
    }
    return loss;
}

}  // namespace

std::size_t MlpModel::weight_offset(std::size_t layer) const {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layer; ++l) off += (layer_sizes[l] + 1) * layer_sizes[l + 1];
    return off;
}

std::size_t MlpModel::bias_offset(std::size_t layer) const {
    return weight_offset(layer) + layer_sizes[layer] * layer_sizes[layer + 1];
}

std::size_t MlpModel::hidden_units() const {
    std::size_t n = 0;
    for (std::size_t l = 1; l + 1 < layer_sizes.size(); ++l) n += layer_sizes[l];
    return n;
}

double MlpModel::forward_standardized(std::span<const double> z) const {
    Trace t;
    forward(*this, z, {}, t);
    return t.pre.back()[0];
}

double MlpModel::predict(std::span<const double> x) const {
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - input_mean[j]) / input_std[j];
    return forward_standardized(z) * target_scale;
}

std::size_t parameter_count(const std::vector<std::size_t>& layer_sizes) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) n += (layer_sizes[l] + 1) * layer_sizes[l + 1];
    return n;
}

MlpModel mlp_init(std::vector<std::size_t> layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2 || layer_sizes.back() != 1) {
        throw ConfigError("MLP needs at least an input and a scalar output layer");
    }
    MlpModel m;
    m.layer_sizes = std::move(layer_sizes);
    m.parameters.assign(parameter_count(m.layer_sizes), 0.0);
    Rng rng(seed);
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        const double limit = std::sqrt(6.0 / static_cast<double>(m.layer_sizes[l]));
        const std::size_t begin = m.weight_offset(l);
        const std::size_t end = m.bias_offset(l);
        for (std::size_t i = begin; i < end; ++i) m.parameters[i] = rng.uniform(-limit, limit);
    }
    const std::size_t inputs = m.layer_sizes.front();
    m.input_mean.assign(inputs, 0.0);
    m.input_std.assign(inputs, 1.0);
    return m;
}

void fit_normalization(MlpModel& model, const FeatureMatrix& x) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    model.input_mean.assign(p, 0.0);
    model.input_std.assign(p, 1.0);
    if (n == 0) return;
    for (std::size_t j = 0; j < p; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
        const double sd = std::sqrt(var / static_cast<double>(n));
        model.input_mean[j] = mean;
        model.input_std[j] = sd > 1e-12 ? sd : 1.0;
    }
}

FeatureMatrix standardize(const MlpModel& model, const FeatureMatrix& x) {
    FeatureMatrix z(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) z(i, j) = (x(i, j) - model.input_mean[j]) / model.input_std[j];
    }
    return z;
}

LossGradient mlp_loss_gradient(const MlpModel& model, const FeatureMatrix& z, std::span<const double> targets,
                               std::span<const std::size_t> batch, std::span<const double> dropout) {
    LossGradient out;
    out.loss = batch_pass(model, z, targets, batch, dropout, &out.gradient);
    return out;
}

double mlp_loss(const MlpModel& model, const FeatureMatrix& z, std::span<const double> targets,
                std::span<const std::size_t> batch, std::span<const double> dropout) {
    return batch_pass(model, z, targets, batch, dropout, nullptr);
}

MlpParams MlpParams::from(const RegressorSpec& spec) {
    if (spec.algorithm != Algorithm::kMlp) throw ConfigError("spec is not an MLP spec");
    MlpParams p;
    p.hidden1 = static_cast<std::size_t>(spec.get("hidden1"));
    p.hidden2 = static_cast<std::size_t>(spec.get("hidden2"));
    p.learning_rate = spec.get("learning_rate");
    p.dropout = spec.get("dropout");
    p.epochs = static_cast<std::size_t>(spec.get("epochs"));
    p.batch_size = static_cast<std::size_t>(spec.get("batch_size"));
    return p;
}

MlpTrainer::MlpTrainer(MlpModel model, double learning_rate, double dropout, std::size_t batch_size,
                       std::uint64_t seed)
    : model_(std::move(model)),
      learning_rate_(learning_rate),
      dropout_(dropout),
      batch_size_(std::max<std::size_t>(1, batch_size)),
      rng_(seed),
      m_(model_.parameters.size(), 0.0),
      v_(model_.parameters.size(), 0.0) {}

double MlpTrainer::train_epoch(const FeatureMatrix& z, std::span<const double> targets) {
    ++epoch_;
    const std::size_t n = z.rows();
    if (n == 0) throw DataError("cannot train an MLP on an empty dataset");
    const auto order = rng_.permutation(n);
    const std::size_t hidden = model_.hidden_units();
    const double keep_scale = 1.0 / (1.0 - dropout_);
    std::vector<double> mask;

    for (std::size_t start = 0; start < n; start += batch_size_) {
        const std::size_t end = std::min(n, start + batch_size_);
        const std::span<const std::size_t> batch(order.data() + start, end - start);
        mask.clear();
        if (dropout_ > 0.0) {
            mask.resize(batch.size() * hidden);
            for (double& v : mask) v = rng_.uniform01() < dropout_ ? 0.0 : keep_scale;
        }
        const auto lg = mlp_loss_gradient(model_, z, targets, batch, mask);
        if (!std::isfinite(lg.loss)) throw DivergenceError(epoch_, learning_rate_);

        ++step_;
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_));
        for (std::size_t i = 0; i < model_.parameters.size(); ++i) {
            const double g = lg.gradient[i];
            m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * g;
            v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * g * g;
            const double m_hat = m_[i] / c1;
            const double v_hat = v_[i] / c2;
            model_.parameters[i] -= learning_rate_ * m_hat / (std::sqrt(v_hat) + kEpsilon);
        }
    }

    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const double mse = mlp_loss(model_, z, targets, all);
    if (!std::isfinite(mse)) throw DivergenceError(epoch_, learning_rate_);
    return mse;
}

MlpModel fit_mlp(const dataset::Dataset& train, const MlpParams& params, std::uint64_t seed,
                 std::vector<double>* history) {
    if (train.empty()) throw DataError("cannot fit an MLP on an empty dataset");
    const auto x = FeatureMatrix::from(train);
    MlpModel model = mlp_init({train.schema.size(), params.hidden1, params.hidden2, 1}, derive_seed(seed, 1));
    model.feature_schema = train.schema;
    fit_normalization(model, x);
    const auto z = standardize(model, x);
    std::vector<double> targets = train.labels();
    for (double& t : targets) t /= model.target_scale;

    MlpTrainer trainer(std::move(model), params.learning_rate, params.dropout, params.batch_size,
                       derive_seed(seed, 2));
    for (std::size_t e = 0; e < params.epochs; ++e) {
        const double mse = trainer.train_epoch(z, targets);
        if (history) history->push_back(mse);
    }
    return trainer.model();
}

}  // namespace qoe::learners
