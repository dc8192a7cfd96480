#include <cmath>
#include <random>

#include "doctest.h"
#include "degenctrl/evolution.hpp"

using namespace degenctrl;

namespace {

ModelConfig config(int n_time, int n_r = 200) {
    ModelConfig c;
    c.alpha = 0.5;
    c.T_horizon = 0.5;
    c.n_theta_max = 3;
    c.n_r = n_r;
    c.n_time = n_time;
    return c;
}

ModeCoeffs random_coeffs(const Model& m, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    ModeCoeffs c(m);
    for (auto& v : c.data()) v = nd(rng);
    return c;
}

}  // namespace

TEST_CASE("time grid") {
    const TimeGrid g{1.0, 8};
    const auto t = g.nodes();
    CHECK(t.front() == 0.0);
    CHECK(t.back() == 1.0);
    for (std::size_t k = 1; k < t.size(); ++k) CHECK(std::abs(t[k] - t[k - 1] - g.dt()) < 1e-14);
}

TEST_CASE("single eigenmode follows the scalar Crank-Nicolson recursion") {
    const Model m = build_model(config(50));
    const auto op = assemble_radial_operator(m.alpha(), m.grid());
    const auto spec = radial_spectrum(op, 1);
    const double mu = spec.values[0] + 1.0;
    const double dt = m.dt();
    const double amp = (1 - 0.5 * dt * mu) / (1 + 0.5 * dt * mu);

    const auto traj = evolve_mode({Parity::Cos, 1}, spec.vectors[0], {}, make_time_grid(m), op);
    for (std::size_t k = 0; k + 1 <= traj.steps(); ++k) {
        if (k == 0) continue;
        const double ratio = radial_norm(m.grid(), traj.at(k)) / radial_norm(m.grid(), traj.at(k - 1));
        CHECK(std::abs(ratio - amp) < 1e-10);
    }
    const double final_ratio = radial_norm(m.grid(), traj.at(traj.steps()));
    const double bessel_rate = bessel_oracle(0.5, 1)[0] + 1.0;
    CHECK(final_ratio == doctest::Approx(std::exp(-0.5 * bessel_rate)).epsilon(2e-2));
    CHECK(final_ratio == doctest::Approx(0.057).epsilon(5e-2));
}

TEST_CASE("second-order accuracy in time") {
    double prev = 0.0;
    for (int nt : {20, 40, 80}) {
        const Model m = build_model(config(nt));
        const auto op = assemble_radial_operator(m.alpha(), m.grid());
        const auto spec = radial_spectrum(op, 1);
        const double mu = spec.values[0] + 4.0;
        const auto traj = evolve_mode({Parity::Sin, 2}, spec.vectors[0], {}, make_time_grid(m), op);
        const double err = std::abs(radial_norm(m.grid(), traj.at(traj.steps())) - std::exp(-mu * m.horizon()));
        if (prev > 0.0) {
            const double factor = prev / err;
            CHECK(factor > 3.8);
            CHECK(factor < 4.2);
        }
        prev = err;
    }
}

TEST_CASE("zero data stays zero and energy decays") {
    const Model m = build_model(config(40, 64));
    const auto zero = solve_forward(m, ModeCoeffs(m));
    for (const auto& mt : zero.modes)
        for (double v : mt.states) CHECK(v == 0.0);

    std::mt19937_64 rng(3);
    const auto traj = solve_forward(m, random_coeffs(m, rng));
    const auto norms = trajectory_norms(m, traj);
    for (std::size_t k = 1; k < norms.size(); ++k) CHECK(norms[k] <= norms[k - 1]);

    for (std::size_t k = 0; k <= traj.steps(); k += 10) {
        const auto snap = traj.snapshot(k);
        const auto f = synthesize_field(m, snap);
        CHECK(std::abs(field_norm(m, f) - norms[k]) <= 1e-10 * norms[k]);
    }
}

TEST_CASE("adjoint duality with and without a source") {
    const Model m = build_model(config(30, 64));
    std::mt19937_64 rng(11);
    const auto phi0 = random_coeffs(m, rng);
    const auto yT = random_coeffs(m, rng);

    const auto y = solve_adjoint(m, yT);
    const auto yT_back = y.final_state();
    for (std::size_t i = 0; i < yT.data().size(); ++i) CHECK(yT_back.data()[i] == yT.data()[i]);

    const auto free = solve_forward(m, phi0);
    CHECK(mode_dot(m, free.final_state(), yT) ==
          doctest::Approx(mode_dot(m, phi0, y.initial_state())).epsilon(1e-11));

    std::vector<ModeCoeffs> source;
    for (int k = 0; k < m.n_time(); ++k) source.push_back(random_coeffs(m, rng));
    const auto forced = solve_forward(m, phi0, source);
    double rhs = mode_dot(m, phi0, y.initial_state());
    for (int k = 0; k < m.n_time(); ++k) rhs += m.dt() * mode_dot(m, source[k], y.half_step(k));
    const double lhs = mode_dot(m, forced.final_state(), yT);
    CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(lhs)));
}

TEST_CASE("full spectrum ordering") {
    const Model m = build_model(config(10, 400));
    const auto op = assemble_radial_operator(m.alpha(), m.grid());
    const auto radial = radial_eigenvalues(op, 3);
    CHECK(full_spectrum(m, radial[0] * 0.99).empty());
    const auto spec = full_spectrum(m, 60.0);
    REQUIRE(spec.size() >= 2);
    CHECK(spec[0].lambda == doctest::Approx(radial[0]));
    CHECK(spec[0].n == 0);
    CHECK(spec[1].lambda == doctest::Approx(std::min(radial[1], radial[0] + 1.0)));
    for (std::size_t i = 1; i < spec.size(); ++i) CHECK(spec[i - 1].lambda <= spec[i].lambda);
}
