#include "centershift/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "centershift/errors.hpp"
#include "centershift/losses.hpp"
#include "centershift/mlp.hpp"

namespace centershift {

double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> truth) {
    if (predicted.empty()) throw config_error("accuracy: empty inputs");
    if (predicted.size() != truth.size()) throw config_error("accuracy: length mismatch");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == truth[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double a_distance_from_epsilon(double epsilon) {
    if (epsilon < 0.0 || epsilon > 0.5) {
        throw config_error("a_distance_from_epsilon: epsilon must lie in [0, 0.5]");
    }
    return 2.0 * (1.0 - 2.0 * epsilon);
}

namespace {

// Shuffled per-domain indices split 50/50: first half train, second half test.
struct DomainSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

DomainSplit split_half(std::size_t n, Rng& rng) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    const std::size_t half = n / 2;
    DomainSplit split;
    split.train.assign(order.begin(), order.begin() + half);
    split.test.assign(order.begin() + half, order.end());
    return split;
}

}  // namespace

ADistanceReport proxy_a_distance(const Matrix2D& source_features, const Matrix2D& target_features,
                                 Rng& rng) {
    if (source_features.rows < 20 || target_features.rows < 20) {
        throw config_error("proxy_a_distance: need at least 20 samples per domain");
    }
    if (source_features.cols != target_features.cols) {
        throw config_error("proxy_a_distance: feature dim mismatch");
    }

    ADistanceReport report;
    report.split_seed = rng.next_u64();
    Rng split_rng(report.split_seed);
    const DomainSplit src = split_half(source_features.rows, split_rng);
    const DomainSplit tgt = split_half(target_features.rows, split_rng);

    const std::size_t dim = source_features.cols;
    auto stack = [&](const std::vector<std::size_t>& s_idx, const std::vector<std::size_t>& t_idx,
                     Matrix2D& feats, std::vector<double>& is_source) {
        feats = Matrix2D(s_idx.size() + t_idx.size(), dim);
        is_source.assign(feats.rows, 0.0);
        std::size_t row = 0;
        for (std::size_t i : s_idx) {
            std::copy_n(source_features.data.data() + i * dim, dim,
                        feats.data.data() + row * dim);
            is_source[row++] = 1.0;
        }
        for (std::size_t i : t_idx) {
            std::copy_n(target_features.data.data() + i * dim, dim,
                        feats.data.data() + row * dim);
            is_source[row++] = 0.0;
        }
    };

    Matrix2D train_x, test_x;
    std::vector<double> train_y, test_y;
    stack(src.train, tgt.train, train_x, train_y);
    stack(src.test, tgt.test, test_x, test_y);

    // Zero-initialized logistic probe; the objective is convex, so no
    // randomness enters beyond the split itself.
    Matrix2D weight(1, dim, 0.0);
    double bias = 0.0;
    AdamState w_state = make_adam_state(weight);
    Matrix2D bias_mat(1, 1, 0.0);
    AdamState b_state = make_adam_state(bias_mat);
    const double lr = 0.01;
    const std::size_t steps = 500;
    const double inv_n = 1.0 / static_cast<double>(train_x.rows);

    for (std::size_t step = 0; step < steps; ++step) {
        Matrix2D w_grad(1, dim, 0.0);
        double b_grad = 0.0;
        for (std::size_t i = 0; i < train_x.rows; ++i) {
            const double* x = train_x.data.data() + i * dim;
            double z = bias;
            for (std::size_t k = 0; k < dim; ++k) z += weight.data[k] * x[k];
            const double p = sigmoid(z);
            const double delta = (p - train_y[i]) * inv_n;  // mean BCE gradient
            b_grad += delta;
            for (std::size_t k = 0; k < dim; ++k) w_grad.data[k] += delta * x[k];
        }
        adam_step(weight, w_grad, w_state, lr);
        Matrix2D b_grad_mat(1, 1, b_grad);
        adam_step(bias_mat, b_grad_mat, b_state, lr);
        bias = bias_mat.data[0];
    }

    std::size_t wrong = 0;
    for (std::size_t i = 0; i < test_x.rows; ++i) {
        const double* x = test_x.data.data() + i * dim;
        double z = bias;
        for (std::size_t k = 0; k < dim; ++k) z += weight.data[k] * x[k];
        const bool predicted_source = z > 0.0;
        if (predicted_source != (test_y[i] > 0.5)) ++wrong;
    }
    const double err = static_cast<double>(wrong) / static_cast<double>(test_x.rows);
    report.epsilon = std::min(err, 1.0 - err);
    report.dist_a = a_distance_from_epsilon(report.epsilon);
    return report;
}

double pseudo_accuracy(const PseudoState& pseudo, std::span<const std::size_t> truth) {
    return accuracy(pseudo.labels, truth);
}

}  // namespace centershift
