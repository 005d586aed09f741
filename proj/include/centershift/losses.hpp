#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "centershift/centers.hpp"
#include "centershift/matrix.hpp"

namespace centershift {

/// Distance margins for the discriminative center loss: a sample should sit
/// within alpha of its own center and beyond beta of the nearest other center.
struct Margins {
    double alpha = 0.2;
    double beta = 1.2;
};

struct LossValue {
    double value = 0.0;
    Matrix2D feature_grads;  // d(value)/d(features); empty when not applicable
    Matrix2D center_grads;   // d(value)/d(centers); empty when not applicable
};

/// Discriminative center loss, summed over the batch:
/// [d(f_i, c_label) - alpha]_+ + [beta - d(f_i, c_nearest_other)]_+ with d the
/// squared euclidean distance. The nearest-other choice is held fixed during
/// differentiation; hinge subgradient is 0 at an exactly-zero hinge input.
LossValue source_dcl(const Matrix2D& features, std::span<const std::size_t> labels,
                     const Matrix2D& centers, const Margins& margins);

/// Distance-ratio confidence for a pseudo-labeled sample:
/// d(f, nearest other center) / d(f, assigned center) - 1. Non-negative
/// whenever the assigned center is the nearest one; the assigned distance is
/// floored at 1e-12, which only matters when a feature collapses onto a center.
double sample_weight(std::span<const double> feature, const Matrix2D& centers,
                     std::size_t pseudo_label);

/// Min-max rescale of raw weights into [0, 1] within each class. A class whose
/// raw weights are all equal (including single-sample classes) maps to 1;
/// empty classes are skipped.
std::vector<double> scale_weights_per_class(std::span<const double> raw,
                                            std::span<const std::size_t> pseudo_labels);

/// The same hinge structure as source_dcl, driven by pseudo-labels and scaled
/// by the per-sample confidence weights.
LossValue target_dcl(const Matrix2D& features, std::span<const std::size_t> pseudo_labels,
                     std::span<const double> weights, const Matrix2D& centers,
                     const Margins& margins);

/// Sum over classes of the (non-squared) euclidean norm between the paired
/// centers. center_grads holds d/d(source set), the per-class unit difference
/// vector (zero at coincident pairs); the target-set gradient is its negation.
LossValue center_alignment(const Matrix2D& source_centers, const Matrix2D& target_centers);

struct DiscriminatorLoss {
    double value = 0.0;
    Matrix2D source_grad;  // d(value)/d(D outputs on source features)
    Matrix2D target_grad;
};

/// Binary cross-entropy with source = 1 and target = 0, summed over both
/// batches. Probabilities are clamped to [1e-7, 1 - 1e-7] before logs.
DiscriminatorLoss discriminator_loss(const Matrix2D& d_source, const Matrix2D& d_target);

/// Gradient-reversal realization: the generator descends the negated
/// discriminator-loss feature gradient (scaled by lambda_d at composition).
Matrix2D generator_domain_grad(const Matrix2D& disc_feature_grad);

struct Schedule {
    double target_weight = 5.0;      // lambda_t = target_weight * lambda_d
    std::size_t pseudo_start = 200;  // iterations before pseudo-labels carry weight
    std::size_t total_iterations = 3000;
};

struct LambdaPair {
    double lambda_d = 0.0;
    double lambda_t = 0.0;
};

/// lambda_d = 2 / (1 + exp(-10 p)) - 1 with global progress p = iteration /
/// total; lambda_t is 0 before pseudo_start and target_weight * lambda_d after.
LambdaPair lambda_schedule(std::size_t iteration, const Schedule& sched);

/// Mean negative log-softmax of the true class; feature_grads holds the logit
/// gradients (softmax - onehot) / n.
LossValue softmax_xent(const Matrix2D& logits, std::span<const std::size_t> labels);

/// The adversarial term as seen by the generator: the discriminator loss value
/// and its gradients with respect to the features fed to D.
struct DomainAdversary {
    double value = 0.0;
    Matrix2D source_feature_grad;
    Matrix2D target_feature_grad;
};

/// One lambda_c alignment term. Exactly one of the two gradient routes is
/// populated: feature gradients for the batch-centroid path, center gradients
/// for the learned-set path.
struct AlignmentTerm {
    double value = 0.0;
    Matrix2D source_feature_grad;
    Matrix2D target_feature_grad;
    Matrix2D center_grads;
    Matrix2D target_center_grads;
};

/// Centroid alignment for the softmax-head ablations: per-class batch feature
/// means are aligned via center_alignment and the gradient is spread uniformly
/// over the contributing samples. Classes missing from either batch are skipped.
AlignmentTerm centroid_alignment(const Matrix2D& source_features,
                                 std::span<const std::size_t> source_labels,
                                 const Matrix2D& target_features,
                                 std::span<const std::size_t> target_pseudo,
                                 std::size_t class_count);

struct GeneratorLossParts {
    std::optional<LossValue> source;         // required
    std::optional<LossValue> target;         // scaled by lambda_t
    std::optional<AlignmentTerm> alignment;  // scaled by lambda_c
    std::optional<DomainAdversary> domain;   // enters negated, scaled by lambda_d
};

struct CombinedLoss {
    double value = 0.0;
    Matrix2D source_feature_grads;
    Matrix2D target_feature_grads;
    Matrix2D center_grads;
    Matrix2D target_center_grads;  // unshared ablations only
};

/// Weighted composition of the generator objective:
/// value = source + lambda_t * target + lambda_c * alignment - lambda_d * domain,
/// with gradients accumulated linearly per stream. With shared centers the
/// target-loss center gradients fold into the single center set.
CombinedLoss combined_generator_loss(const GeneratorLossParts& parts, double lambda_t,
                                     double lambda_c, double lambda_d, bool shared_centers);

}  // namespace centershift
