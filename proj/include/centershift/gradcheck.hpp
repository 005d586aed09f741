#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace centershift {

struct GradCheckReport {
    std::string name;
    double max_rel_error = 0.0;
};

/// Compares every hand-derived gradient in the losses module against central
/// finite differences, both directly and through the networks and centers, on
/// seeded random instances sampled away from hinge/argmin/relu kinks.
/// perturbation, when nonzero, is added to one entry of each analytic gradient
/// as a negative control for the checker itself.
std::vector<GradCheckReport> run_gradient_checks(std::size_t instances = 10, double eps = 1e-4,
                                                 double perturbation = 0.0);

/// Largest max_rel_error in the report list.
double worst_rel_error(const std::vector<GradCheckReport>& reports);

inline constexpr double kGradCheckTolerance = 1e-4;

}  // namespace centershift
