#pragma once

// Shipped scenarios shared by the command line and the acceptance suite.

#include <cstdint>
#include <string>
#include <vector>

#include "degenctrl/carleman.hpp"
#include "degenctrl/model.hpp"
#include "degenctrl/region.hpp"

namespace degenctrl {

/// g_{cos,1} Phi_1 + g_{sin,2} Phi_3 with mass-normalized radial eigenvectors.
ModeCoeffs desk_datum(const Model& model);

/// Single angular mode times the k-th radial eigenvector (k >= 1).
ModeCoeffs eigen_datum(const Model& model, ModeIndex mode, int k);

/// Seeded Gaussian mode coefficients tapered by r(1-r), unit norm.
ModeCoeffs random_datum(const Model& model, std::uint64_t seed);

/// Two disjoint boxes in T x (0.3, 0.6) x (0, T).
BoxUnion desk_boxes(double horizon);

struct CarlemanCase {
    double alpha = 0.5;
    std::string kind;  // "free": first eigenmode of n=1; "forced": zero data, smooth source
    double s0 = 0.0;
    std::vector<CarlemanRow> rows;
};

/// For each alpha, a free and a forced cos-1 trajectory on the base
/// discretization, reported at s = m s0 for every multiplier m.
std::vector<CarlemanCase> carleman_family(const ModelConfig& base, const std::vector<double>& alphas, double a,
                                          double b, const std::vector<double>& multipliers);

}  // namespace degenctrl
