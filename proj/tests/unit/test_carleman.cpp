#include <cmath>
#include <random>

#include "doctest.h"
#include "degenctrl/carleman.hpp"
#include "degenctrl/error.hpp"

using namespace degenctrl;

TEST_CASE("eta branches and junction values") {
    const auto eta = build_eta(0.5, 0.3, 0.6);
    CHECK(eta.p() == doctest::Approx(0.4));
    CHECK(eta.q_hat() == doctest::Approx(0.5));
    CHECK(eta(eta.p()) == doctest::Approx(std::pow(0.4, 1.5)).epsilon(1e-15));
    CHECK(eta(eta.p()) == doctest::Approx(0.25298).epsilon(1e-4));
    CHECK(eta(1.0) == 0.0);
    CHECK(eta(eta.q_hat()) == doctest::Approx(0.5 / std::sqrt(0.5)).epsilon(1e-15));
    CHECK(eta(0.1) == std::pow(0.1, 1.5));
    CHECK(eta(0.8) == (1 - 0.8) * std::pow(0.8, -0.5));
    for (int i = 1; i < 100; ++i) {
        const double r = eta.p() + (eta.q_hat() - eta.p()) * i / 100.0;
        CHECK(eta(r) > 0.0);
    }
    CHECK_THROWS_AS(build_eta(0.5, 0.6, 0.3), InvalidArgument);
    CHECK_THROWS_AS(build_eta(0.5, 0.3, 1.2), InvalidArgument);
}

TEST_CASE("eta is C3 at both junctions") {
    for (double alpha : {0.1, 0.5, 0.9}) {
        const auto eta = build_eta(alpha, 0.3, 0.6);
        const auto& c = eta.middle_coefficients();
        const double len = eta.q_hat() - eta.p();
        for (int d = 0; d <= 3; ++d) {
            // middle polynomial derivatives at x = 0 and x = 1
            double at0 = 1.0, at1 = 0.0;
            for (int i = 0; i < d; ++i) at0 *= d - i;
            at0 *= c[d];
            for (std::size_t j = d; j < c.size(); ++j) {
                double f = 1.0;
                for (int i = 0; i < d; ++i) f *= static_cast<double>(j) - i;
                at1 += f * c[j];
            }
            const double lp = eta.left_branch(eta.p(), d);
            const double rq = eta.right_branch(eta.q_hat(), d);
            CHECK(std::abs(at0 / std::pow(len, d) - lp) <= 1e-9 * std::max(1.0, std::abs(lp)));
            CHECK(std::abs(at1 / std::pow(len, d) - rq) <= 1e-9 * std::max(1.0, std::abs(rq)));
        }
        // one-sided finite differences of eta'' straddling each junction
        const double h = 1e-8;
        for (double x : {eta.p(), eta.q_hat()}) {
            const double below = (eta.eval(x, 2) - eta.eval(x - h, 2)) / h;
            const double above = (eta.eval(x + h, 2) - eta.eval(x, 2)) / h;
            const double scale = std::max(1.0, std::abs(eta.eval(x, 3)));
            CHECK(std::abs(below - above) <= 5e-2 * scale);
            const double d1_below = (eta(x) - eta(x - h)) / h;
            const double d1_above = (eta(x + h) - eta(x)) / h;
            CHECK(std::abs(d1_below - d1_above) <= 1e-6 * std::max(1.0, std::abs(eta.eval(x, 1))));
        }
    }
}

TEST_CASE("time weight values and symmetry") {
    const auto w = build_carleman_weights(build_eta(0.5, 0.3, 0.6), 1.0, 10.0);
    CHECK(w.theta(0.5) == doctest::Approx(256.0).epsilon(1e-15));
    CHECK(w.theta(0.25) == w.theta(0.75));
    CHECK(w.theta(0.25) == doctest::Approx(809.1).epsilon(1e-4));
    CHECK(std::abs(w.theta_d1(0.25)) == doctest::Approx(8631.0).epsilon(1e-3));
    CHECK(w.theta_d1(0.5) == 0.0);
    CHECK_THROWS_AS(build_carleman_weights(build_eta(0.5, 0.3, 0.6), 1.0, 0.5), InvalidArgument);
}

TEST_CASE("closed-form derivatives agree with finite differences") {
    const auto w = build_carleman_weights(build_eta(0.5, 0.3, 0.6), 2.0, 1.0);
    auto theta_ld = [](long double t) {
        const long double u = t * (2.0L - t);
        return 1.0L / (u * u * u * u);
    };
    for (double t : {0.3, 0.7, 1.1, 1.6}) {
        const long double h = 1e-5L;
        const long double d1 = (theta_ld(t + h) - theta_ld(t - h)) / (2 * h);
        const long double d2 = (theta_ld(t + h) - 2 * theta_ld(t) + theta_ld(t - h)) / (h * h);
        CHECK(w.theta_d1(t) == doctest::Approx(static_cast<double>(d1)).epsilon(1e-7));
        CHECK(w.theta_d2(t) == doctest::Approx(static_cast<double>(d2)).epsilon(1e-4));
    }
}

TEST_CASE("derivative bounds on fine time grids") {
    for (double T : {0.5, 1.0, 2.0}) {
        const TimeGrid g{T, 10000};
        const auto rep = verify_theta_bounds(T, g.nodes());
        CHECK(rep.nodes_checked == 9999);
        CHECK(rep.holds);
        CHECK(rep.max_ratio_d2 <= 22.0 / 196.0 + 1e-9);
        CHECK(rep.max_ratio_d1 <= 1.0);
    }
}

TEST_CASE("xi properties") {
    const auto grid = build_radial_grid(64, 4.0 / 3.0, 0.5);
    const auto w = build_carleman_weights(build_eta(0.5, 0.3, 0.6), 1.0, 10.0, grid.nodes);
    for (double r : grid.nodes) CHECK(w.gamma - w.eta(r) >= 1.0);
    for (double r : {0.05, 0.2, 0.45, 0.55, 0.9}) {
        const double h = 1e-6;
        const double fd = (w.xi(r + h, 0.3) - w.xi(r - h, 0.3)) / (2 * h);
        CHECK(fd == doctest::Approx(w.xi_r(r, 0.3)).epsilon(1e-8 * 1e3));
        CHECK(w.xi(r, 0.01) >= 1e3 * w.xi(r, 0.5));
        CHECK(w.log_weight(r, 0.5) > w.log_weight(r, 0.1));
    }
}

TEST_CASE("report on zero and eigenmode solutions") {
    ModelConfig c;
    c.alpha = 0.5;
    c.n_theta_max = 1;
    c.n_r = 64;
    c.n_time = 100;
    const Model m = build_model(c);
    const auto eta = build_eta(0.5, 0.3, 0.6);
    const auto op = assemble_radial_operator(m.alpha(), m.grid());
    const std::vector<double> s_values{10.0, 20.0, 40.0};

    const std::vector<double> zero(m.n_radial(), 0.0);
    const auto z = evolve_mode({Parity::Cos, 0}, zero, {}, make_time_grid(m), op);
    for (const auto& row : carleman_report(z, m.grid(), make_time_grid(m), eta, s_values, 10.0)) {
        CHECK(row.lhs_grad == 0.0);
        CHECK(row.lhs_zero == 0.0);
        CHECK(row.rhs_obs == 0.0);
        CHECK(row.ratio == 0.0);
    }

    const auto spec = radial_spectrum(op, 1);
    const auto traj = evolve_mode({Parity::Cos, 1}, spec.vectors[0], {}, make_time_grid(m), op);
    const auto rows = carleman_report(traj, m.grid(), make_time_grid(m), eta, s_values, 20.0);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].below_s0);
    CHECK_FALSE(rows[1].below_s0);
    for (const auto& row : rows) {
        CHECK(std::isfinite(row.ratio));
        CHECK(row.ratio > 0.0);
        CHECK(row.lhs_grad >= 0.0);
        CHECK(row.lhs_zero >= 0.0);
        CHECK(row.rhs_obs > 0.0);
        CHECK(row.rhs_f == 0.0);
        CHECK(row.log_scale > 0.0);
    }
}
