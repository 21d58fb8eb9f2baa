#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qoe/dataset/dataset.hpp"
#include "qoe/learners/matrix.hpp"
#include "qoe/learners/spec.hpp"
#include "qoe/random.hpp"

namespace qoe::learners {

/// Fully connected ReLU network with a linear scalar output.
///
/// Parameters live in one flat vector, layer by layer: the weight matrix
/// (fan_out × fan_in, row-major) followed by the bias vector. Inputs are
/// z-scored with statistics frozen from the training set; the output is in
/// units of target_scale (labels are divided by it during training).
struct MlpModel {
    std::vector<std::size_t> layer_sizes;
    std::vector<double> parameters;
    std::vector<double> input_mean;
    std::vector<double> input_std;
    double target_scale = 100.0;
    dataset::FeatureSchema feature_schema;

    [[nodiscard]] std::size_t layer_count() const noexcept { return layer_sizes.size() - 1; }
    [[nodiscard]] std::size_t weight_offset(std::size_t layer) const;
    [[nodiscard]] std::size_t bias_offset(std::size_t layer) const;
    [[nodiscard]] std::size_t hidden_units() const;

    /// Output on the scaled target for an already standardized input.
    [[nodiscard]] double forward_standardized(std::span<const double> z) const;
    [[nodiscard]] double predict(std::span<const double> x) const;

    bool operator==(const MlpModel&) const = default;
};

std::size_t parameter_count(const std::vector<std::size_t>& layer_sizes);

/// He-uniform weights (limit √(6/fan_in)), zero biases.
MlpModel mlp_init(std::vector<std::size_t> layer_sizes, std::uint64_t seed);

/// Per-feature mean and population std; constant features get std = 1.
void fit_normalization(MlpModel& model, const FeatureMatrix& x);
FeatureMatrix standardize(const MlpModel& model, const FeatureMatrix& x);

struct LossGradient {
    double loss = 0.0;
    std::vector<double> gradient;
};

/// Mean squared error over `batch` rows of standardized inputs `z` against
/// scaled `targets`, with its gradient by backpropagation. `dropout`, when
/// given, holds batch.size() × hidden_units() multipliers applied after each
/// hidden ReLU (sample-major, hidden layers in order).
LossGradient mlp_loss_gradient(const MlpModel& model, const FeatureMatrix& z, std::span<const double> targets,
                               std::span<const std::size_t> batch, std::span<const double> dropout = {});

/// Same loss without the gradient.
double mlp_loss(const MlpModel& model, const FeatureMatrix& z, std::span<const double> targets,
                std::span<const std::size_t> batch, std::span<const double> dropout = {});

struct MlpParams {
    std::size_t hidden1 = 32;
    std::size_t hidden2 = 64;
    double learning_rate = 0.001;
    double dropout = 0.3;
    std::size_t epochs = 500;
    std::size_t batch_size = 32;

    static MlpParams from(const RegressorSpec& spec);
};

/// Mini-batch Adam (β1 0.9, β2 0.999, ε 1e-8) with inverted dropout.
class MlpTrainer {
  public:
    MlpTrainer(MlpModel model, double learning_rate, double dropout, std::size_t batch_size,
               std::uint64_t seed);

    /// One shuffled pass over all rows. Returns the post-epoch MSE on the
    /// scaled targets without dropout. Throws DivergenceError on a
    /// non-finite loss.
    double train_epoch(const FeatureMatrix& z, std::span<const double> targets);

    [[nodiscard]] const MlpModel& model() const noexcept { return model_; }
    [[nodiscard]] std::size_t epochs_done() const noexcept { return epoch_; }

  private:
    MlpModel model_;
    double learning_rate_;
    double dropout_;
    std::size_t batch_size_;
    Rng rng_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::size_t step_ = 0;
    std::size_t epoch_ = 0;
};

/// Optional per-epoch training MSE (scaled targets) goes to `history`.
MlpModel fit_mlp(const dataset::Dataset& train, const MlpParams& params, std::uint64_t seed,
                 std::vector<double>* history = nullptr);

}  // namespace qoe::learners
