#pragma once

// Carleman weight system: the spatial weight eta with C^3 junctions, the
// singular time weight Theta = 1/[t(T-t)]^4, xi = Theta (gamma - eta), and
// quadratures of both sides of the weighted estimate on computed solutions.
//
// e^{-2 s xi} underflows double precision for every useful s (xi >= Theta(T/2)
// = 256/T^8), so reported integrals are multiplied by exp(log_scale) with
// log_scale = 2 s min(xi) over the quadrature points. Ratios are unaffected.

#include <array>
#include <span>
#include <vector>

#include "degenctrl/evolution.hpp"
#include "degenctrl/model.hpp"

namespace degenctrl {

class EtaWeight {
public:
    double alpha() const { return alpha_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double p() const { return p_; }
    double q_hat() const { return q_; }
    /// True when the plain degree-7 interpolant was not positive and the
    /// lifted-midpoint variant is in use.
    bool lifted() const { return lifted_; }
    const std::vector<double>& middle_coefficients() const { return coef_; }
    /// Max of eta over the verification samples.
    double sup_norm() const { return sup_; }

    /// d-th derivative of eta at r in (0,1), d = 0..3.
    double eval(double r, int d = 0) const;
    double operator()(double r) const { return eval(r, 0); }

    double left_branch(double r, int d = 0) const;
    double right_branch(double r, int d = 0) const;

private:
    friend EtaWeight build_eta(double alpha, double a, double b);
    double alpha_ = 0.5;
    double a_ = 0.0, b_ = 1.0, p_ = 0.0, q_ = 1.0;
    bool lifted_ = false;
    std::vector<double> coef_;  // polynomial in x = (r-p)/(q_hat-p), ascending powers
    double sup_ = 0.0;
};

EtaWeight build_eta(double alpha, double a, double b);

struct CarlemanWeights {
    EtaWeight eta;
    double gamma = 1.0;
    double horizon = 1.0;
    double s = 1.0;

    [[nodiscard]] double theta(double t) const;
    [[nodiscard]] double theta_d1(double t) const;
    [[nodiscard]] double theta_d2(double t) const;
    [[nodiscard]] double xi(double r, double t) const { return theta(t) * (gamma - eta(r)); }
    [[nodiscard]] double xi_r(double r, double t) const { return -theta(t) * eta.eval(r, 1); }
    /// log e^{-2 s xi}
    [[nodiscard]] double log_weight(double r, double t) const { return -2.0 * s * xi(r, t); }
};

/// gamma = sup eta + 1, the sup also taken over `grid_nodes` when given.
CarlemanWeights build_carleman_weights(const EtaWeight& eta, double horizon, double s,
                                       std::span<const double> grid_nodes = {});

struct ThetaBoundReport {
    double horizon = 1.0;
    std::size_t nodes_checked = 0;
    double max_ratio_d1 = 0.0;  // max |Theta'| / (12 T Theta^{5/4})
    double max_ratio_d2 = 0.0;  // max |Theta''| / (196 T^2 Theta^{3/2})
    bool holds = true;
};

/// Checks both derivative bounds at the interior nodes of `times`.
ThetaBoundReport verify_theta_bounds(double horizon, std::span<const double> times);

struct CarlemanRow {
    double s = 0.0;
    ModeIndex mode;
    double lhs_grad = 0.0;
    double lhs_zero = 0.0;
    double rhs_f = 0.0;
    double rhs_obs = 0.0;
    double ratio = 0.0;  // (lhs_grad + lhs_zero) / (rhs_f + rhs_obs), 0 when both vanish
    double log_scale = 0.0;
    bool below_s0 = false;
};

/// Both sides of the estimate for one mode trajectory, one row per s. The
/// trajectory's stored source (half-step samples) enters rhs_f.
std::vector<CarlemanRow> carleman_report(const ModeTrajectory& traj, const RadialGrid& grid, const TimeGrid& time,
                                         const EtaWeight& eta, std::span<const double> s_values, double s0);

}  // namespace degenctrl
