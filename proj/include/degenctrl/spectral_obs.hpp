#pragma once

// Quantitative observability on truncated bases: the Gram matrix of the
// angular basis restricted to an interval, per-mode observability constants,
// and constants on angularly truncated subspaces E_j.

#include <numbers>
#include <string>
#include <vector>

#include "degenctrl/dense.hpp"
#include "degenctrl/model.hpp"

namespace degenctrl {

/// Integral of g_m g_k over the angular interval (c, d).
double angular_overlap(ModeIndex m, ModeIndex k, double c, double d);

/// Angular basis g_{cos,0..K}, g_{sin,1..K}, in that order.
std::vector<ModeIndex> torus_basis(int K);

struct TorusGram {
    int K = 0;
    double c = 0.0;
    double d = 0.0;
    dense::Matrix<double> gram;
    double lambda_min = 0.0;
    double log_lambda_min = 0.0;
    double c_emp = 0.0;  // -log(lambda_min) / max(K, 1)
};

/// Gram matrix over I = (c, d) and its smallest eigenvalue, both in 50-digit
/// arithmetic since lambda_min falls far below double epsilon for moderate K.
TorusGram torus_smallest_gram_eigenvalue(int K, double c, double d);

/// Control patch I_theta x (a, b).
struct Patch {
    double theta_lo = 0.0;
    double theta_hi = 2.0 * std::numbers::pi;
    double a = 0.0;
    double b = 1.0;

    [[nodiscard]] bool full_torus() const;
};

struct ObservabilityEstimate {
    std::string cap_type;  // "mode" or "E_j"
    int index = 0;         // n for a mode, j for E_j
    Patch patch;
    double c_emp = 0.0;
    double log_c_emp = 0.0;
    std::size_t basis_dim = 0;
    std::size_t live_dim = 0;  // directions with non-negligible terminal energy
    std::size_t dropped = 0;   // numerically dependent directions removed
    double residual = 0.0;     // |A x - C B x| / (C |B x|)
    double rayleigh = 0.0;     // Rayleigh quotient at x, relative to C
    bool singular = false;
    std::string diagnostic;
    std::vector<ModeIndex> basis_modes;  // angular mode of each basis element
    std::vector<int> basis_radial;       // 1-based radial index of each basis element
    std::vector<double> coefficients;    // unit-norm extremal datum in the basis
};

/// Per-mode constant for the single angular mode n on the radial band
/// (a, b), over the first k_max radial eigenfunctions.
ObservabilityEstimate mode_observability_constant(const Model& model, int n, double a, double b, int k_max = 24);

/// Constant on E_j: angular modes n <= 2^j, k_max radial functions each.
ObservabilityEstimate truncated_observability(const Model& model, const Patch& omega, int j, int k_max = 24);

/// Extremal datum of an estimate as mode coefficients on the model.
ModeCoeffs extremal_datum(const Model& model, const ObservabilityEstimate& est);

}  // namespace degenctrl
