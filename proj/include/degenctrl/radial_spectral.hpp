#pragma once

// Discretization of the degenerate radial operator u -> -(r^alpha u')' with
// homogeneous Dirichlet ends, its spectrum, a Bessel-zero eigenvalue oracle
// for the continuous problem, and the weighted Hardy ratio.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "degenctrl/model.hpp"

namespace degenctrl {

/// Flux-form finite-volume stiffness S (symmetric tridiagonal) and lumped
/// mass M. The discrete operator is M^{-1} S.
struct RadialOperator {
    double alpha = 0.5;
    RadialGrid grid;
    std::vector<double> diag;     // S_ii
    std::vector<double> offdiag;  // S_{i,i+1} = -w(r_{i+1/2}) / h_{i+1/2}, strictly negative
    std::vector<double> mass;     // M_ii

    [[nodiscard]] std::size_t size() const { return diag.size(); }

    /// Diagonal of the similarity D^{-1/2} S D^{-1/2}, D = M.
    [[nodiscard]] std::vector<double> symmetric_diag() const;
    /// Off-diagonal of D^{-1/2} S D^{-1/2}.
    [[nodiscard]] std::vector<double> symmetric_offdiag() const;

    /// y = S u
    void apply_stiffness(std::span<const double> u, std::span<double> y) const;
    /// y = M^{-1} S u, the discrete operator applied to nodal values.
    [[nodiscard]] std::vector<double> apply(std::span<const double> u) const;
    /// Energy form u^T S u = sum_half w (du)^2 / h.
    [[nodiscard]] double energy(std::span<const double> u) const;
};

RadialOperator assemble_radial_operator(double alpha, const RadialGrid& grid);

/// First k eigenpairs of S v = lambda M v, vectors normalized in the mass norm
/// and signed so that their first interior value is positive.
struct RadialSpectrum {
    double alpha = 0.5;
    RadialGrid grid;
    std::vector<double> values;               // ascending
    std::vector<std::vector<double>> vectors;  // nodal values, mass-orthonormal

    [[nodiscard]] std::size_t size() const { return values.size(); }
};

RadialSpectrum radial_spectrum(const RadialOperator& op, std::size_t k);
/// Eigenvalues only (no vectors), all of them when k == op.size().
std::vector<double> radial_eigenvalues(const RadialOperator& op, std::size_t k);
/// Number of eigenvalues strictly below x (Sturm count).
std::size_t count_eigenvalues_below(const RadialOperator& op, double x);

/// Bessel function of the first kind J_nu(x), x >= 0, nu >= 0.
double bessel_j(double nu, double x);

/// k-th positive zero of J_nu, k >= 1.
double bessel_zero(double nu, int k);

/// Continuous eigenvalues kappa^2 j_{nu,k}^2, kappa = (2-alpha)/2,
/// nu = (1-alpha)/(2-alpha), for k = 1..count.
std::vector<double> bessel_oracle(double alpha, int count);

struct HardyReport {
    double alpha = 0.5;
    std::string label;
    double left = 0.0;        // int r^(alpha-2) u^2
    double right = 0.0;       // int r^alpha (u')^2
    double ratio = 0.0;       // left / right
    double constant = 0.0;    // 4 / (1-alpha)^2
    bool exceeds = false;     // ratio > constant
};

/// Midpoint quadrature of both Hardy integrals on the graded grid. `u` holds
/// the interior nodal values; the end values are zero.
HardyReport hardy_ratio(std::span<const double> u, double alpha, const RadialGrid& grid,
                        std::string label = {});

/// Same, with samples at every edge r_0..r_{n_r}; the end samples must vanish.
HardyReport hardy_ratio_with_ends(std::span<const double> u_edges, double alpha, const RadialGrid& grid,
                                  std::string label = {});

/// Constant 1/((1-beta)(beta-alpha)) at beta = (1+alpha)/2.
double hardy_constant(double alpha);

}  // namespace degenctrl
