#pragma once

// Null-control synthesis: the control Gramian y^T -> phi(T) of the
// adjoint-then-forward map, penalized HUM, and a dyadic-block low-mode
// control iteration.
//
// Controls are sampled at half steps and are chi_D times the half-step average
// of the adjoint state. With the Crank-Nicolson duality identity this makes
// the discrete Gramian exactly self-adjoint in the mass inner product.

#include <string>
#include <vector>

#include "degenctrl/evolution.hpp"
#include "degenctrl/model.hpp"
#include "degenctrl/region.hpp"

namespace degenctrl {

/// chi_D applied to mode coefficients at time t: a radial mask for a
/// cylinder, synthesis/mask/projection for a box union.
ModeCoeffs apply_region_mask(const Model& model, const ControlRegion& region, double t, const ModeCoeffs& v);

/// G y^T: adjoint solve from yT, mask, forward solve from zero data, state at T.
ModeCoeffs apply_control_gramian(const Model& model, const ControlRegion& region, const ModeCoeffs& yT);

struct HUMResult {
    ModeCoeffs yT;
    std::vector<ModeCoeffs> control;  // one half-step sample per time step
    ModeCoeffs terminal;              // phi(T; f) from a fresh forward solve
    double phi0_norm = 0.0;
    double terminal_residual = 0.0;   // |phi(T; f)|
    double identity_residual = 0.0;   // |phi(T; f) + eps y^T|
    double eps = 0.0;
    double cg_tol = 0.0;
    int iterations = 0;
    double solver_residual = 0.0;     // final |b - (G + eps) y|
    std::vector<double> residual_history;
    double cost = 0.0;                // integral of f^2 over D x (0,T)
    double linf = 0.0;                // max |f| over the grid
    bool converged = false;
    bool stagnated = false;
};

/// Solves (G + eps I) y^T = -S_T phi0 by conjugate residuals in the mass inner
/// product. Stops when |r| <= cg_tol |phi0|, on stagnation (relative residual
/// improvement below 1e-14 over 10 iterations), or at max_iter.
HUMResult hum_control(const Model& model, const ModeCoeffs& phi0, const ControlRegion& region, double eps,
                      double cg_tol = 1e-10, int max_iter = 500);

/// max |f| / |phi0|; throws for zero phi0.
double linf_ratio(const HUMResult& result);

struct LRBlock {
    int index = 0;
    int cap = 0;          // controlled angular modes n <= cap
    double t_start = 0.0;
    double t_switch = 0.0;  // control off from here to t_end
    double t_end = 0.0;
    double eps = 0.0;
    int iterations = 0;
    double cost = 0.0;
    double low_mode_norm = 0.0;  // |P_cap phi(t_switch)|
    double budget = 0.0;
    double norm_end = 0.0;       // |phi(t_end)|
    bool budget_met = false;
};

struct LRResult {
    std::vector<double> boundaries;  // T_0 = 0 < T_1 < ... < T_K
    std::vector<LRBlock> blocks;
    double phi0_norm = 0.0;
    double final_norm = 0.0;
    double final_residual = 0.0;  // |phi(T)| / |phi0|
    double tol = 0.0;
    bool converged = false;
    std::string diagnostic;
};

/// Dyadic blocks [T(1-2^-k), T(1-2^-(k+1))], k < n_blocks, snapped to the time
/// grid. Block k controls modes n <= 2^k during its first half and lets the
/// solution decay during the second half.
LRResult lr_control(const Model& model, const ModeCoeffs& phi0, const Cylinder& omega, double tol, int n_blocks = 3,
                    double cg_tol = 1e-12, int max_iter = 500);

}  // namespace degenctrl
