#include "degenctrl/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "degenctrl/dense.hpp"
#include "degenctrl/error.hpp"
#include "degenctrl/parallel.hpp"

namespace degenctrl {

namespace {

constexpr int kSamples = 10000;

// d-th derivative of r^beta
double power_derivative(double r, double beta, int d) {
    double c = 1.0;
    for (int k = 0; k < d; ++k) c *= beta - k;
    return c * std::pow(r, beta - d);
}

double falling(int j, int k) {
    double c = 1.0;
    for (int i = 0; i < k; ++i) c *= j - i;
    return c;
}

double poly_eval(const std::vector<double>& c, double x, int d) {
    double acc = 0.0;
    for (std::size_t jj = c.size(); jj-- > static_cast<std::size_t>(d);) {
        const int j = static_cast<int>(jj);
        acc = acc * x + c[jj] * falling(j, d);
    }
    return acc;
}

}  // namespace

double EtaWeight::left_branch(double r, int d) const { return power_derivative(r, 2.0 - alpha_, d); }

double EtaWeight::right_branch(double r, int d) const {
    if (d == 0) return (1.0 - r) * std::pow(r, -alpha_);
    return power_derivative(r, -alpha_, d) - power_derivative(r, 1.0 - alpha_, d);
}

double EtaWeight::eval(double r, int d) const {
    if (d < 0 || d > 3) throw InvalidArgument("eta: derivative order must be 0..3");
    if (r <= p_) return left_branch(r, d);
    if (r >= q_) return right_branch(r, d);
    const double len = q_ - p_;
    return poly_eval(coef_, (r - p_) / len, d) / std::pow(len, d);
}

EtaWeight build_eta(double alpha, double a, double b) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha out of range (0,1)");
    if (!(a > 0.0 && a < b && b <= 1.0)) throw InvalidArgument("eta: need 0 < a < b <= 1");
    EtaWeight eta;
    eta.alpha_ = alpha;
    eta.a_ = a;
    eta.b_ = b;
    eta.p_ = (2.0 * a + b) / 3.0;
    eta.q_ = (a + 2.0 * b) / 3.0;
    const double len = eta.q_ - eta.p_;

    auto solve = [&](bool lift) {
        const std::size_t n = lift ? 9 : 8;
        dense::Matrix<double> m(n, n);
        std::vector<double> rhs(n);
        for (int k = 0; k < 4; ++k) {
            m(k, k) = falling(k, k);
            rhs[k] = std::pow(len, k) * eta.left_branch(eta.p_, k);
            for (std::size_t j = k; j < n; ++j) m(4 + k, j) = falling(static_cast<int>(j), k);
            rhs[4 + k] = std::pow(len, k) * eta.right_branch(eta.q_, k);
        }
        if (lift) {
            for (std::size_t j = 0; j < n; ++j) m(8, j) = std::pow(0.5, static_cast<double>(j));
            rhs[8] = std::max(eta.left_branch(eta.p_), eta.right_branch(eta.q_));
        }
        eta.coef_ = dense::lu_solve(m, rhs);
    };
    auto positive = [&] {
        for (int i = 1; i < kSamples; ++i)
            if (!(poly_eval(eta.coef_, static_cast<double>(i) / kSamples, 0) > 0.0)) return false;
        return true;
    };

    solve(false);
    if (!positive()) {
        eta.lifted_ = true;
        solve(true);
        if (!positive()) throw InvariantViolation("eta: positivity on the middle branch could not be achieved");
    }

    double sup = std::max(eta.left_branch(eta.p_), eta.right_branch(eta.q_));
    for (int i = 1; i < kSamples; ++i) {
        sup = std::max(sup, eta.eval(static_cast<double>(i) / kSamples));
        sup = std::max(sup, eta.eval(eta.p_ + len * i / kSamples));
    }
    eta.sup_ = sup;
    return eta;
}

// ---- time weight ------------------------------------------------------------

double CarlemanWeights::theta(double t) const {
    const double u = t * (horizon - t);
    return 1.0 / (u * u * u * u);
}

double CarlemanWeights::theta_d1(double t) const { return -4.0 * std::pow(theta(t), 1.25) * (horizon - 2.0 * t); }

double CarlemanWeights::theta_d2(double t) const {
    const double th = theta(t);
    const double c = horizon - 2.0 * t;
    return 20.0 * std::pow(th, 1.5) * c * c + 8.0 * std::pow(th, 1.25);
}

CarlemanWeights build_carleman_weights(const EtaWeight& eta, double horizon, double s,
                                       std::span<const double> grid_nodes) {
    if (!(s >= 1.0)) throw InvalidArgument("carleman: s must be >= 1");
    if (!(horizon > 0.0)) throw InvalidArgument("carleman: horizon must be positive");
    double sup = eta.sup_norm();
    for (double r : grid_nodes) sup = std::max(sup, eta(r));
    return CarlemanWeights{eta, sup + 1.0, horizon, s};
}

ThetaBoundReport verify_theta_bounds(double horizon, std::span<const double> times) {
    ThetaBoundReport rep;
    rep.horizon = horizon;
    const CarlemanWeights w{EtaWeight{}, 1.0, horizon, 1.0};
    for (double t : times) {
        if (!(t > 0.0 && t < horizon)) continue;
        const double th = w.theta(t);
        const double r1 = std::abs(w.theta_d1(t)) / (12.0 * horizon * std::pow(th, 1.25));
        const double r2 = std::abs(w.theta_d2(t)) / (196.0 * horizon * horizon * std::pow(th, 1.5));
        rep.max_ratio_d1 = std::max(rep.max_ratio_d1, r1);
        rep.max_ratio_d2 = std::max(rep.max_ratio_d2, r2);
        ++rep.nodes_checked;
    }
    rep.holds = rep.max_ratio_d1 <= 1.0 && rep.max_ratio_d2 <= 1.0;
    return rep;
}

// ---- estimate quadrature ----------------------------------------------------

std::vector<CarlemanRow> carleman_report(const ModeTrajectory& traj, const RadialGrid& grid, const TimeGrid& time,
                                         const EtaWeight& eta, std::span<const double> s_values, double s0) {
    const std::size_t nr = grid.size();
    if (traj.n_radial != nr || traj.steps() != static_cast<std::size_t>(time.steps))
        throw DimensionMismatch("carleman_report: trajectory does not match grids");
    const int steps = time.steps;
    const double dt = time.dt();
    const bool forced = !traj.source.empty();

    std::vector<CarlemanRow> rows(s_values.size());
    parallel_for(s_values.size(), [&](std::size_t idx) {
        const CarlemanWeights w = build_carleman_weights(eta, time.horizon, s_values[idx], grid.nodes);
        const double s = w.s;

        // gap_edge covers r_0 .. r_{n_r}; eta vanishes at both ends. Face h is
        // weighted by the geometric mean of its endpoint weights.
        std::vector<double> gap_node(nr), gap_edge(nr + 2), wr0(nr);
        gap_edge.front() = w.gamma;
        gap_edge.back() = w.gamma;
        for (std::size_t i = 0; i < nr; ++i) {
            gap_node[i] = w.gamma - eta(grid.nodes[i]);
            gap_edge[i + 1] = gap_node[i];
            wr0[i] = grid.mass[i] * std::pow(grid.nodes[i], 2.0 - eta.alpha());
        }

        double theta_min = std::numeric_limits<double>::infinity();
        for (int k = 1; k < steps; ++k) theta_min = std::min(theta_min, w.theta(time.time(k)));
        if (forced)
            for (int k = 0; k < steps; ++k) theta_min = std::min(theta_min, w.theta(time.half_time(k)));
        const double gap_min = *std::min_element(gap_node.begin(), gap_node.end());
        const double log_scale = 2.0 * s * theta_min * gap_min;

        CarlemanRow row;
        row.s = s;
        row.mode = traj.mode;
        row.log_scale = log_scale;
        row.below_s0 = s < s0;
        for (int k = 1; k < steps; ++k) {
            const double th = w.theta(time.time(k));
            const auto u = traj.at(k);
            double grad = 0.0, zero = 0.0, obs = 0.0;
            for (std::size_t h = 0; h <= nr; ++h) {
                const double left = h == 0 ? 0.0 : u[h - 1];
                const double right = h == nr ? 0.0 : u[h];
                const double du = (right - left) / grid.widths[h];
                grad += grid.widths[h] * grid.half_weights[h] * du * du * std::exp(log_scale - s * th * (gap_edge[h] + gap_edge[h + 1]));
            }
            for (std::size_t i = 0; i < nr; ++i) {
                const double e = std::exp(log_scale - 2.0 * s * th * gap_node[i]);
                zero += wr0[i] * u[i] * u[i] * e;
                const double r = grid.nodes[i];
                if (r > eta.a() && r < eta.b()) obs += grid.mass[i] * u[i] * u[i] * e;
            }
            row.lhs_grad += dt * s * th * grad;
            row.lhs_zero += dt * s * s * s * th * th * th * zero;
            row.rhs_obs += dt * s * s * s * th * th * th * obs;
        }
        if (forced) {
            for (int k = 0; k < steps; ++k) {
                const double th = w.theta(time.half_time(k));
                double acc = 0.0;
                for (std::size_t i = 0; i < nr; ++i) {
                    const double f = traj.source[k * nr + i];
                    acc += grid.mass[i] * f * f * std::exp(log_scale - 2.0 * s * th * gap_node[i]);
                }
                row.rhs_f += dt * acc;
            }
        }
        const double denom = row.rhs_f + row.rhs_obs;
        const double num = row.lhs_grad + row.lhs_zero;
        row.ratio = denom > 0.0 ? num / denom : (num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        rows[idx] = row;
    });
    return rows;
}

}  // namespace degenctrl
