#include "centershift/centers.hpp"

#include <string>

#include "centershift/errors.hpp"

namespace centershift {

CenterSet init_centers(std::size_t class_count, std::size_t dim, Rng& rng) {
    if (class_count < 2) throw config_error("init_centers: need at least 2 classes");
    if (dim < 1) throw config_error("init_centers: dim must be positive");
    CenterSet cs;
    cs.centers = Matrix2D(class_count, dim);
    for (double& v : cs.centers.data) v = rng.normal(0.0, 0.1);
    cs.shared = true;
    return cs;
}

CenterSet unshare(const CenterSet& shared_set) {
    CenterSet cs;
    cs.centers = shared_set.centers;
    cs.target_centers = shared_set.centers;
    cs.shared = false;
    return cs;
}

NearestCenter nearest_center(std::span<const double> feature, const Matrix2D& centers) {
    if (centers.rows == 0) throw config_error("nearest_center: empty center set");
    NearestCenter best{0, squared_euclidean(feature, centers.row(0))};
    for (std::size_t j = 1; j < centers.rows; ++j) {
        const double d = squared_euclidean(feature, centers.row(j));
        if (d < best.distance) best = {j, d};
    }
    return best;
}

NearestCenter nearest_negative_center(std::span<const double> feature, const Matrix2D& centers,
                                      std::size_t label) {
    if (centers.rows < 2) {
        throw config_error("nearest_negative_center: need at least 2 centers");
    }
    if (label >= centers.rows) {
        throw config_error("nearest_negative_center: label " + std::to_string(label) +
                           " out of range for " + std::to_string(centers.rows) + " classes");
    }
    NearestCenter best{centers.rows, 0.0};
    for (std::size_t j = 0; j < centers.rows; ++j) {
        if (j == label) continue;
        const double d = squared_euclidean(feature, centers.row(j));
        if (best.index == centers.rows || d < best.distance) best = {j, d};
    }
    return best;
}

}  // namespace centershift
