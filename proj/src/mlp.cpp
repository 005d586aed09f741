#include "centershift/mlp.hpp"

#include <cmath>
#include <string>

#include "centershift/errors.hpp"

namespace centershift {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) throw config_error(message);
}

// p -= lr * m_hat / (sqrt(v_hat) + epsilon), in place over one tensor slab.
void adam_update_slab(std::span<double> p, std::span<const double> g, std::vector<double>& m,
                      std::vector<double>& v, std::size_t step, const AdamState& s, double lr) {
    require(p.size() == g.size() && p.size() == m.size(),
            "adam_step: gradient shape does not match parameters");
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + s.epsilon);
    }
}

}  // namespace

std::size_t MLPParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.weight.size() + layer.bias.size();
    return n;
}

MLPParams init_mlp(const std::vector<std::size_t>& layer_dims, OutputActivation act, Rng& rng) {
    require(layer_dims.size() >= 2, "init_mlp: need at least input and output dims");
    for (std::size_t d : layer_dims) require(d > 0, "init_mlp: layer dims must be positive");

    MLPParams params;
    params.output_activation = act;
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const std::size_t in = layer_dims[l];
        const std::size_t out = layer_dims[l + 1];
        LayerParams layer;
        layer.weight = Matrix2D(out, in);
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        for (double& w : layer.weight.data) w = rng.uniform(-limit, limit);
        layer.bias.assign(out, 0.0);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

Matrix2D forward(const MLPParams& params, const Matrix2D& batch, ForwardCache* cache) {
    require(!params.layers.empty(), "forward: uninitialized network");
    require(batch.cols == params.input_dim(),
            "forward: batch width " + std::to_string(batch.cols) + " does not match input dim " +
                std::to_string(params.input_dim()));

    if (cache) {
        cache->input = batch;
        cache->pre_activations.clear();
        cache->activations.clear();
    }

    Matrix2D current = batch;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        Matrix2D z = matmul_nt(current, layer.weight);
        for (std::size_t i = 0; i < z.rows; ++i) {
            double* row = z.data.data() + i * z.cols;
            for (std::size_t j = 0; j < z.cols; ++j) row[j] += layer.bias[j];
        }
        const bool last = (l + 1 == params.layers.size());
        Matrix2D a;
        if (!last) {
            a = relu(z);
        } else if (params.output_activation == OutputActivation::sigmoid) {
            a = sigmoid(z);
        } else {
            a = z;
        }
        if (cache) {
            cache->pre_activations.push_back(std::move(z));
            cache->activations.push_back(a);
        }
        current = std::move(a);
    }
    return current;
}

MLPGrads backward(const MLPParams& params, const ForwardCache& cache,
                  const Matrix2D& output_grad, Matrix2D* input_grad) {
    const std::size_t L = params.layers.size();
    require(cache.activations.size() == L && cache.pre_activations.size() == L,
            "backward: cache does not match network");
    require(same_shape(output_grad, cache.activations.back()),
            "backward: output_grad shape does not match forward output");

    MLPGrads grads = zero_grads_like(params);
    Matrix2D delta = output_grad;  // becomes d(loss)/d(z_l) layer by layer

    if (params.output_activation == OutputActivation::sigmoid) {
        const Matrix2D& out = cache.activations.back();
        for (std::size_t i = 0; i < delta.data.size(); ++i) {
            const double s = out.data[i];
            delta.data[i] *= s * (1.0 - s);
        }
    }

    for (std::size_t l = L; l-- > 0;) {
        const Matrix2D& below = (l == 0) ? cache.input : cache.activations[l - 1];
        // dW[o, i] = sum_n delta[n, o] * below[n, i]; db[o] = sum_n delta[n, o]
        Matrix2D& dw = grads[l].weight;
        std::vector<double>& db = grads[l].bias;
        for (std::size_t n = 0; n < delta.rows; ++n) {
            const double* drow = delta.data.data() + n * delta.cols;
            const double* brow = below.data.data() + n * below.cols;
            for (std::size_t o = 0; o < delta.cols; ++o) {
                const double d = drow[o];
                if (d == 0.0) continue;
                db[o] += d;
                double* wrow = dw.data.data() + o * dw.cols;
                for (std::size_t i = 0; i < below.cols; ++i) wrow[i] += d * brow[i];
            }
        }
        if (l == 0 && !input_grad) break;
        Matrix2D prev_grad = matmul(delta, params.layers[l].weight);
        if (l == 0) {
            *input_grad = std::move(prev_grad);
            break;
        }
        // relu subgradient: 0 at exactly-zero pre-activation
        const Matrix2D& z_prev = cache.pre_activations[l - 1];
        for (std::size_t i = 0; i < prev_grad.data.size(); ++i) {
            if (!(z_prev.data[i] > 0.0)) prev_grad.data[i] = 0.0;
        }
        delta = std::move(prev_grad);
    }
    return grads;
}

MLPGrads zero_grads_like(const MLPParams& params) {
    MLPGrads grads;
    grads.reserve(params.layers.size());
    for (const auto& layer : params.layers) {
        LayerParams g;
        g.weight = Matrix2D(layer.weight.rows, layer.weight.cols, 0.0);
        g.bias.assign(layer.bias.size(), 0.0);
        grads.push_back(std::move(g));
    }
    return grads;
}

void accumulate(MLPGrads& acc, const MLPGrads& g, double factor) {
    require(acc.size() == g.size(), "accumulate: layer count mismatch");
    for (std::size_t l = 0; l < acc.size(); ++l) {
        add_scaled(acc[l].weight, g[l].weight, factor);
        require(acc[l].bias.size() == g[l].bias.size(), "accumulate: bias length mismatch");
        for (std::size_t i = 0; i < acc[l].bias.size(); ++i) {
            acc[l].bias[i] += factor * g[l].bias[i];
        }
    }
}

std::vector<double> flatten(const MLPParams& params) {
    std::vector<double> flat;
    flat.reserve(params.parameter_count());
    for (const auto& layer : params.layers) {
        flat.insert(flat.end(), layer.weight.data.begin(), layer.weight.data.end());
        flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
    }
    return flat;
}

void assign_flat(MLPParams& params, std::span<const double> values) {
    require(values.size() == params.parameter_count(), "assign_flat: size mismatch");
    std::size_t pos = 0;
    for (auto& layer : params.layers) {
        for (double& w : layer.weight.data) w = values[pos++];
        for (double& b : layer.bias) b = values[pos++];
    }
}

AdamState make_adam_state(const MLPParams& params) {
    AdamState state;
    for (const auto& layer : params.layers) {
        state.m.emplace_back(layer.weight.size(), 0.0);
        state.v.emplace_back(layer.weight.size(), 0.0);
        state.m.emplace_back(layer.bias.size(), 0.0);
        state.v.emplace_back(layer.bias.size(), 0.0);
    }
    return state;
}

AdamState make_adam_state(const Matrix2D& params) {
    AdamState state;
    state.m.emplace_back(params.size(), 0.0);
    state.v.emplace_back(params.size(), 0.0);
    return state;
}

void adam_step(MLPParams& params, const MLPGrads& grads, AdamState& state, double lr) {
    require(lr > 0.0, "adam_step: lr must be positive");
    require(grads.size() == params.layers.size(), "adam_step: gradient layer count mismatch");
    require(state.m.size() == 2 * params.layers.size(), "adam_step: state does not match network");
    state.step += 1;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        adam_update_slab(params.layers[l].weight.data, grads[l].weight.data, state.m[2 * l],
                         state.v[2 * l], state.step, state, lr);
        adam_update_slab(params.layers[l].bias, grads[l].bias, state.m[2 * l + 1],
                         state.v[2 * l + 1], state.step, state, lr);
    }
}

void adam_step(Matrix2D& params, const Matrix2D& grads, AdamState& state, double lr) {
    require(lr > 0.0, "adam_step: lr must be positive");
    require(same_shape(params, grads), "adam_step: gradient shape mismatch");
    require(state.m.size() == 1, "adam_step: state does not match tensor");
    state.step += 1;
    adam_update_slab(params.data, grads.data, state.m[0], state.v[0], state.step, state, lr);
}

}  // namespace centershift
