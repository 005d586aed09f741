#pragma once

#include <cstddef>
#include <span>

#include "centershift/matrix.hpp"
#include "centershift/rng.hpp"

namespace centershift {

/// Learnable class centers in embedding space: simultaneously the semantic
/// anchor tying the two domains together and the nearest-center classifier.
/// With shared == true a single set serves both domains; the separate target
/// set exists only for the unshared ablations.
struct CenterSet {
    Matrix2D centers;         // C x dim; the shared set (or the source set when unshared)
    bool shared = true;
    Matrix2D target_centers;  // populated only when shared == false

    std::size_t class_count() const { return centers.rows; }
    std::size_t dim() const { return centers.cols; }
    const Matrix2D& source_view() const { return centers; }
    const Matrix2D& target_view() const { return shared ? centers : target_centers; }
};

/// Entries drawn from Normal(0, 0.1^2); the small scale keeps early distances
/// inside the margin regime.
CenterSet init_centers(std::size_t class_count, std::size_t dim, Rng& rng);

/// Duplicates a shared set into independent source/target copies. The copies
/// start identical so class identity is aligned at iteration 0.
CenterSet unshare(const CenterSet& shared_set);

struct NearestCenter {
    std::size_t index = 0;
    double distance = 0.0;  // squared euclidean
};

/// Closest center by squared distance; ties resolve to the lowest index.
NearestCenter nearest_center(std::span<const double> feature, const Matrix2D& centers);

/// Closest center with index != label; ties resolve to the lowest index.
NearestCenter nearest_negative_center(std::span<const double> feature, const Matrix2D& centers,
                                      std::size_t label);

inline NearestCenter nearest_center(std::span<const double> feature, const CenterSet& cs) {
    return nearest_center(feature, cs.target_view());
}

inline NearestCenter nearest_negative_center(std::span<const double> feature, const CenterSet& cs,
                                             std::size_t label) {
    return nearest_negative_center(feature, cs.target_view(), label);
}

}  // namespace centershift
