#include "centershift/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "centershift/errors.hpp"

namespace centershift {

namespace {

constexpr double kDistanceFloor = 1e-12;

void require(bool condition, const std::string& message) {
    if (!condition) throw config_error(message);
}

void check_dcl_inputs(const Matrix2D& features, std::span<const std::size_t> labels,
                      const Matrix2D& centers, const char* op) {
    require(centers.rows >= 2, std::string(op) + ": need at least 2 centers");
    require(features.cols == centers.cols, std::string(op) + ": feature/center dim mismatch");
    require(labels.size() == features.rows, std::string(op) + ": label count mismatch");
    for (std::size_t y : labels) {
        require(y < centers.rows, std::string(op) + ": label out of range");
    }
}

// Shared body of the source and target discriminative center losses; weight
// w_i multiplies sample i's contribution to both value and gradients.
LossValue weighted_dcl(const Matrix2D& features, std::span<const std::size_t> labels,
                       std::span<const double> weights, const Matrix2D& centers,
                       const Margins& margins) {
    LossValue out;
    out.feature_grads = Matrix2D(features.rows, features.cols, 0.0);
    out.center_grads = Matrix2D(centers.rows, centers.cols, 0.0);

    for (std::size_t i = 0; i < features.rows; ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        if (w == 0.0) continue;
        const auto feature = features.row(i);
        const std::size_t y = labels[i];
        const double d_pos = squared_euclidean(feature, centers.row(y));
        const NearestCenter neg = nearest_negative_center(feature, centers, y);

        const double pull = rectifier(d_pos - margins.alpha);
        const double push = rectifier(margins.beta - neg.distance);
        out.value += w * (pull + push);

        double* fg = out.feature_grads.data.data() + i * features.cols;
        if (pull > 0.0) {
            const auto c = centers.row(y);
            double* cg = out.center_grads.data.data() + y * centers.cols;
            for (std::size_t k = 0; k < features.cols; ++k) {
                const double diff = 2.0 * w * (feature[k] - c[k]);
                fg[k] += diff;
                cg[k] -= diff;
            }
        }
        if (push > 0.0) {
            const auto c = centers.row(neg.index);
            double* cg = out.center_grads.data.data() + neg.index * centers.cols;
            for (std::size_t k = 0; k < features.cols; ++k) {
                const double diff = 2.0 * w * (feature[k] - c[k]);
                fg[k] -= diff;
                cg[k] += diff;
            }
        }
    }
    return out;
}

}  // namespace

LossValue source_dcl(const Matrix2D& features, std::span<const std::size_t> labels,
                     const Matrix2D& centers, const Margins& margins) {
    check_dcl_inputs(features, labels, centers, "source_dcl");
    return weighted_dcl(features, labels, {}, centers, margins);
}

double sample_weight(std::span<const double> feature, const Matrix2D& centers,
                     std::size_t pseudo_label) {
    require(pseudo_label < centers.rows, "sample_weight: pseudo label out of range");
    const double d_assigned = squared_euclidean(feature, centers.row(pseudo_label));
    const NearestCenter neg = nearest_negative_center(feature, centers, pseudo_label);
    return neg.distance / std::max(d_assigned, kDistanceFloor) - 1.0;
}

std::vector<double> scale_weights_per_class(std::span<const double> raw,
                                            std::span<const std::size_t> pseudo_labels) {
    require(raw.size() == pseudo_labels.size(), "scale_weights_per_class: length mismatch");
    std::vector<double> scaled(raw.size(), 0.0);
    if (raw.empty()) return scaled;

    const std::size_t class_count =
        1 + *std::max_element(pseudo_labels.begin(), pseudo_labels.end());
    std::vector<double> lo(class_count, std::numeric_limits<double>::infinity());
    std::vector<double> hi(class_count, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        lo[pseudo_labels[i]] = std::min(lo[pseudo_labels[i]], raw[i]);
        hi[pseudo_labels[i]] = std::max(hi[pseudo_labels[i]], raw[i]);
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double mn = lo[pseudo_labels[i]];
        const double mx = hi[pseudo_labels[i]];
        scaled[i] = (mx > mn) ? (raw[i] - mn) / (mx - mn) : 1.0;
    }
    return scaled;
}

LossValue target_dcl(const Matrix2D& features, std::span<const std::size_t> pseudo_labels,
                     std::span<const double> weights, const Matrix2D& centers,
                     const Margins& margins) {
    check_dcl_inputs(features, pseudo_labels, centers, "target_dcl");
    require(weights.size() == features.rows, "target_dcl: weight count mismatch");
    for (double w : weights) {
        require(w >= 0.0 && w <= 1.0, "target_dcl: weights must lie in [0, 1]");
    }
    return weighted_dcl(features, pseudo_labels, weights, centers, margins);
}

LossValue center_alignment(const Matrix2D& source_centers, const Matrix2D& target_centers) {
    require(same_shape(source_centers, target_centers), "center_alignment: shape mismatch");
    LossValue out;
    out.center_grads = Matrix2D(source_centers.rows, source_centers.cols, 0.0);
    for (std::size_t j = 0; j < source_centers.rows; ++j) {
        const auto cs = source_centers.row(j);
        const auto ct = target_centers.row(j);
        const double norm = std::sqrt(squared_euclidean(cs, ct));
        out.value += norm;
        if (norm > 0.0) {
            double* g = out.center_grads.data.data() + j * source_centers.cols;
            for (std::size_t k = 0; k < source_centers.cols; ++k) {
                g[k] = (cs[k] - ct[k]) / norm;
            }
        }
    }
    return out;
}

DiscriminatorLoss discriminator_loss(const Matrix2D& d_source, const Matrix2D& d_target) {
    require(d_source.cols == 1 && d_target.cols == 1,
            "discriminator_loss: expected column vectors of probabilities");
    DiscriminatorLoss out;
    out.source_grad = Matrix2D(d_source.rows, 1, 0.0);
    out.target_grad = Matrix2D(d_target.rows, 1, 0.0);
    for (std::size_t i = 0; i < d_source.rows; ++i) {
        const double p = std::clamp(d_source.data[i], kProbClamp, 1.0 - kProbClamp);
        out.value -= std::log(p);
        out.source_grad.data[i] = -1.0 / p;
    }
    for (std::size_t i = 0; i < d_target.rows; ++i) {
        const double p = std::clamp(d_target.data[i], kProbClamp, 1.0 - kProbClamp);
        out.value -= std::log(1.0 - p);
        out.target_grad.data[i] = 1.0 / (1.0 - p);
    }
    return out;
}

Matrix2D generator_domain_grad(const Matrix2D& disc_feature_grad) {
    return scale(disc_feature_grad, -1.0);
}

LambdaPair lambda_schedule(std::size_t iteration, const Schedule& sched) {
    require(sched.total_iterations > 0, "lambda_schedule: total_iterations must be positive");
    require(iteration <= sched.total_iterations, "lambda_schedule: iteration past end of run");
    const double p =
        static_cast<double>(iteration) / static_cast<double>(sched.total_iterations);
    LambdaPair out;
    out.lambda_d = 2.0 / (1.0 + std::exp(-10.0 * p)) - 1.0;
    out.lambda_t = (iteration < sched.pseudo_start) ? 0.0 : sched.target_weight * out.lambda_d;
    return out;
}

LossValue softmax_xent(const Matrix2D& logits, std::span<const std::size_t> labels) {
    require(labels.size() == logits.rows, "softmax_xent: label count mismatch");
    require(logits.rows > 0, "softmax_xent: empty batch");
    for (std::size_t y : labels) {
        require(y < logits.cols, "softmax_xent: label out of range");
    }
    LossValue out;
    out.feature_grads = Matrix2D(logits.rows, logits.cols, 0.0);
    const double inv_n = 1.0 / static_cast<double>(logits.rows);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const auto row = logits.row(i);
        const double peak = *std::max_element(row.begin(), row.end());
        double denom = 0.0;
        for (double v : row) denom += std::exp(v - peak);
        const double log_denom = std::log(denom);
        out.value += inv_n * (log_denom - (row[labels[i]] - peak));
        double* g = out.feature_grads.data.data() + i * logits.cols;
        for (std::size_t j = 0; j < logits.cols; ++j) {
            g[j] = inv_n * std::exp(row[j] - peak - log_denom);
        }
        g[labels[i]] -= inv_n;
    }
    return out;
}

AlignmentTerm centroid_alignment(const Matrix2D& source_features,
                                 std::span<const std::size_t> source_labels,
                                 const Matrix2D& target_features,
                                 std::span<const std::size_t> target_pseudo,
                                 std::size_t class_count) {
    require(source_features.cols == target_features.cols,
            "centroid_alignment: feature dim mismatch");
    require(source_labels.size() == source_features.rows &&
                target_pseudo.size() == target_features.rows,
            "centroid_alignment: label count mismatch");
    for (std::size_t y : source_labels) {
        require(y < class_count, "centroid_alignment: source label out of range");
    }
    for (std::size_t y : target_pseudo) {
        require(y < class_count, "centroid_alignment: pseudo label out of range");
    }

    const std::size_t dim = source_features.cols;
    Matrix2D source_mean(class_count, dim, 0.0);
    Matrix2D target_mean(class_count, dim, 0.0);
    std::vector<std::size_t> source_count(class_count, 0);
    std::vector<std::size_t> target_count(class_count, 0);
    for (std::size_t i = 0; i < source_features.rows; ++i) {
        source_count[source_labels[i]] += 1;
        const auto row = source_features.row(i);
        double* acc = source_mean.data.data() + source_labels[i] * dim;
        for (std::size_t k = 0; k < dim; ++k) acc[k] += row[k];
    }
    for (std::size_t i = 0; i < target_features.rows; ++i) {
        target_count[target_pseudo[i]] += 1;
        const auto row = target_features.row(i);
        double* acc = target_mean.data.data() + target_pseudo[i] * dim;
        for (std::size_t k = 0; k < dim; ++k) acc[k] += row[k];
    }

    AlignmentTerm out;
    out.source_feature_grad = Matrix2D(source_features.rows, dim, 0.0);
    out.target_feature_grad = Matrix2D(target_features.rows, dim, 0.0);

    // Per-class unit difference of the means, folded back as 1/count per member.
    for (std::size_t j = 0; j < class_count; ++j) {
        if (source_count[j] == 0 || target_count[j] == 0) continue;
        double norm_sq = 0.0;
        std::vector<double> diff(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            const double sm = source_mean(j, k) / static_cast<double>(source_count[j]);
            const double tm = target_mean(j, k) / static_cast<double>(target_count[j]);
            diff[k] = sm - tm;
            norm_sq += diff[k] * diff[k];
        }
        const double norm = std::sqrt(norm_sq);
        out.value += norm;
        if (norm == 0.0) continue;
        for (std::size_t i = 0; i < source_features.rows; ++i) {
            if (source_labels[i] != j) continue;
            double* g = out.source_feature_grad.data.data() + i * dim;
            const double f = 1.0 / (norm * static_cast<double>(source_count[j]));
            for (std::size_t k = 0; k < dim; ++k) g[k] += diff[k] * f;
        }
        for (std::size_t i = 0; i < target_features.rows; ++i) {
            if (target_pseudo[i] != j) continue;
            double* g = out.target_feature_grad.data.data() + i * dim;
            const double f = -1.0 / (norm * static_cast<double>(target_count[j]));
            for (std::size_t k = 0; k < dim; ++k) g[k] += diff[k] * f;
        }
    }
    return out;
}

CombinedLoss combined_generator_loss(const GeneratorLossParts& parts, double lambda_t,
                                     double lambda_c, double lambda_d, bool shared_centers) {
    if (!parts.source) {
        throw config_error("combined_generator_loss: source term is required");
    }
    CombinedLoss out;
    out.value = parts.source->value;
    if (!parts.source->feature_grads.empty()) {
        add_scaled(out.source_feature_grads, parts.source->feature_grads, 1.0);
    }
    if (!parts.source->center_grads.empty()) {
        add_scaled(out.center_grads, parts.source->center_grads, 1.0);
    }

    if (parts.target) {
        out.value += lambda_t * parts.target->value;
        if (lambda_t != 0.0) {
            if (!parts.target->feature_grads.empty()) {
                add_scaled(out.target_feature_grads, parts.target->feature_grads, lambda_t);
            }
            if (!parts.target->center_grads.empty()) {
                Matrix2D& sink = shared_centers ? out.center_grads : out.target_center_grads;
                add_scaled(sink, parts.target->center_grads, lambda_t);
            }
        }
    }

    if (parts.alignment) {
        out.value += lambda_c * parts.alignment->value;
        if (lambda_c != 0.0) {
            const AlignmentTerm& a = *parts.alignment;
            if (!a.source_feature_grad.empty()) {
                add_scaled(out.source_feature_grads, a.source_feature_grad, lambda_c);
            }
            if (!a.target_feature_grad.empty()) {
                add_scaled(out.target_feature_grads, a.target_feature_grad, lambda_c);
            }
            if (!a.center_grads.empty()) {
                add_scaled(out.center_grads, a.center_grads, lambda_c);
            }
            if (!a.target_center_grads.empty()) {
                add_scaled(out.target_center_grads, a.target_center_grads, lambda_c);
            }
        }
    }

    if (parts.domain) {
        // L_d enters the generator objective negated (gradient reversal).
        out.value -= lambda_d * parts.domain->value;
        if (lambda_d != 0.0) {
            if (!parts.domain->source_feature_grad.empty()) {
                add_scaled(out.source_feature_grads, parts.domain->source_feature_grad,
                           -lambda_d);
            }
            if (!parts.domain->target_feature_grad.empty()) {
                add_scaled(out.target_feature_grads, parts.domain->target_feature_grad,
                           -lambda_d);
            }
        }
    }
    return out;
}

}  // namespace centershift
