#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "centershift/matrix.hpp"
#include "centershift/rng.hpp"

namespace centershift {

enum class OutputActivation { identity, sigmoid };

struct LayerParams {
    Matrix2D weight;           // out x in
    std::vector<double> bias;  // out
};

/// Fully connected network: affine + relu per hidden layer, affine on the
/// output layer (plus a clamped sigmoid for the discriminator).
struct MLPParams {
    std::vector<LayerParams> layers;
    OutputActivation output_activation = OutputActivation::identity;

    std::size_t input_dim() const { return layers.front().weight.cols; }
    std::size_t output_dim() const { return layers.back().weight.rows; }
    std::size_t parameter_count() const;
};

/// Gradient carrier shaped like MLPParams::layers.
using MLPGrads = std::vector<LayerParams>;

/// Per-layer pre-activations and activations of one batch, kept for backprop.
struct ForwardCache {
    Matrix2D input;
    std::vector<Matrix2D> pre_activations;
    std::vector<Matrix2D> activations;  // back() is the network output
};

/// Xavier-uniform weights in (-sqrt(6/(in+out)), +sqrt(6/(in+out))), zero biases.
MLPParams init_mlp(const std::vector<std::size_t>& layer_dims, OutputActivation act, Rng& rng);

Matrix2D forward(const MLPParams& params, const Matrix2D& batch, ForwardCache* cache = nullptr);

/// Backpropagates output_grad = d(loss)/d(output) through the cached forward
/// pass. Returns d(loss)/d(params); input_grad, when given, receives
/// d(loss)/d(batch).
MLPGrads backward(const MLPParams& params, const ForwardCache& cache,
                  const Matrix2D& output_grad, Matrix2D* input_grad = nullptr);

MLPGrads zero_grads_like(const MLPParams& params);
void accumulate(MLPGrads& acc, const MLPGrads& g, double factor = 1.0);

std::vector<double> flatten(const MLPParams& params);
void assign_flat(MLPParams& params, std::span<const double> values);

/// First/second moment slabs shaped like the tracked parameters.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::size_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

AdamState make_adam_state(const MLPParams& params);
AdamState make_adam_state(const Matrix2D& params);

/// One bias-corrected Adam update; increments the step counter by exactly 1.
void adam_step(MLPParams& params, const MLPGrads& grads, AdamState& state, double lr);
void adam_step(Matrix2D& params, const Matrix2D& grads, AdamState& state, double lr);

}  // namespace centershift
