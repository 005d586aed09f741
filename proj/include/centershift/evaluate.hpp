#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "centershift/matrix.hpp"
#include "centershift/pseudo.hpp"
#include "centershift/rng.hpp"

namespace centershift {

struct ADistanceReport {
    double epsilon = 0.5;          // folded domain-probe test error, in [0, 0.5]
    double dist_a = 0.0;           // 2 * (1 - 2 * epsilon), in [0, 2]
    std::uint64_t split_seed = 0;  // seed of the train/test split
};

/// Fraction of matching entries; inputs must be non-empty and equal length.
double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> truth);

double a_distance_from_epsilon(double epsilon);

/// Proxy A-distance of two feature clouds: a fresh logistic domain probe
/// (affine + sigmoid, Adam, 500 full-batch steps) is trained on a 50/50
/// per-domain split and scored on the held-out half. epsilon folds
/// worse-than-chance probes to <= 0.5. Deterministic given features and the
/// split seed drawn from rng. Needs at least 20 samples per domain.
ADistanceReport proxy_a_distance(const Matrix2D& source_features, const Matrix2D& target_features,
                                 Rng& rng);

/// Accuracy of the pseudo-labels against held-out target truth; the empirical
/// counterpart of the false-pseudo-label ratio tracked at every refresh.
double pseudo_accuracy(const PseudoState& pseudo, std::span<const std::size_t> truth);

}  // namespace centershift
