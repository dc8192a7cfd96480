#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "degenctrl/error.hpp"
#include "degenctrl/radial_spectral.hpp"
#include "degenctrl/spectral_obs.hpp"

using namespace degenctrl;

namespace {

constexpr double kPi = std::numbers::pi;

ModelConfig obs_config(int n_theta_max = 16) {
    ModelConfig c;
    c.alpha = 0.5;
    c.T_horizon = 1.0;
    c.n_theta_max = n_theta_max;
    c.n_r = 200;
    c.n_time = 10;
    return c;
}

double brute_force_lambda_min(int K, double c, double d) {
    const auto basis = torus_basis(K);
    const auto n = basis.size();
    Eigen::MatrixXd g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            g(i, j) = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                [&](double t) { return angular_basis(basis[i], t) * angular_basis(basis[j], t); }, c, d, 5, 1e-15);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    return es.eigenvalues()(0);
}

}  // namespace

TEST_CASE("constant basis Gram") {
    const auto g = torus_smallest_gram_eigenvalue(0, 0.0, kPi);
    CHECK(std::abs(g.lambda_min - 0.5) < 1e-12);
    const auto g2 = torus_smallest_gram_eigenvalue(0, 0.3, 1.3);
    CHECK(std::abs(g2.lambda_min - 1.0 / (2 * kPi)) < 1e-12);
}

TEST_CASE("Gram eigenvalue matches brute-force quadrature") {
    for (int K = 1; K <= 3; ++K) {
        for (auto [c, d] : {std::pair{0.0, kPi}, std::pair{0.0, 1.0}, std::pair{0.5, 4.0}}) {
            const auto g = torus_smallest_gram_eigenvalue(K, c, d);
            CHECK(std::abs(g.lambda_min - brute_force_lambda_min(K, c, d)) < 1e-10);
            for (std::size_t i = 0; i < g.gram.rows(); ++i)
                for (std::size_t j = 0; j < g.gram.cols(); ++j) CHECK(g.gram(i, j) == g.gram(j, i));
        }
    }
}

TEST_CASE("full torus gives the identity Gram") {
    for (int K : {0, 3, 8}) {
        const auto g = torus_smallest_gram_eigenvalue(K, 0.0, 2 * kPi - 1e-9);
        CHECK(g.lambda_min == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("Gram eigenvalue monotonicity") {
    for (int K : {1, 2, 4, 6}) {
        double prev = 2.0;
        for (double len : {6.0, 4.0, 2.0, 1.0, 0.5}) {
            const double lmin = torus_smallest_gram_eigenvalue(K, 0.0, len).lambda_min;
            CHECK(lmin <= prev);
            CHECK(lmin > 0.0);
            prev = lmin;
        }
    }
    double prev = 2.0;
    for (int K = 0; K <= 12; ++K) {
        const auto g = torus_smallest_gram_eigenvalue(K, 0.0, 1.0);
        CHECK(g.lambda_min <= prev);
        prev = g.lambda_min;
    }
    CHECK_THROWS_AS(torus_smallest_gram_eigenvalue(2, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("single-mode closed form") {
    const Model m = build_model(obs_config(4));
    const auto op = assemble_radial_operator(m.alpha(), m.grid());
    const double lambda1 = radial_eigenvalues(op, 1)[0];
    for (int n : {0, 1, 3}) {
        const double mu = lambda1 + n * n;
        const double T = m.horizon();
        const double oracle = std::exp(-2 * mu * T) * 2 * mu / (-std::expm1(-2 * mu * T));
        const auto est = mode_observability_constant(m, n, 0.0, 1.0, 1);
        REQUIRE_FALSE(est.singular);
        CHECK(std::abs(est.c_emp - oracle) <= 1e-8 * oracle);
    }
}

TEST_CASE("mode constants on a band") {
    const Model m = build_model(obs_config(4));
    const auto e0 = mode_observability_constant(m, 0, 0.3, 0.6);
    REQUIRE_FALSE(e0.singular);
    CHECK(e0.c_emp > 0.0);
    CHECK(e0.residual <= 1e-8);
    CHECK(std::abs(e0.rayleigh - 1.0) <= 1e-6);
    double nrm = 0.0;
    for (double x : e0.coefficients) nrm += x * x;
    CHECK(nrm == doctest::Approx(1.0).epsilon(1e-12));

    const auto e32 = mode_observability_constant(m, 32, 0.3, 0.6);
    REQUIRE_FALSE(e32.singular);
    CHECK(e32.log_c_emp <= e0.log_c_emp + std::log(1.01));

    // a band covering (0,1) observes more, so the constant is smaller
    const auto full = mode_observability_constant(m, 0, 0.0, 1.0);
    CHECK(full.c_emp <= e0.c_emp * (1 + 1e-9));
}

TEST_CASE("full-torus truncation decouples") {
    const Model m = build_model(obs_config(4));
    const Patch full{0.0, 2 * kPi, 0.3, 0.6};
    for (int j = 0; j <= 2; ++j) {
        const auto est = truncated_observability(m, full, j, 12);
        double best = -1e300;
        for (int n = 0; n <= (1 << j); ++n) best = std::max(best, mode_observability_constant(m, n, 0.3, 0.6, 12).log_c_emp);
        CHECK(est.log_c_emp == doctest::Approx(best).epsilon(1e-8));
    }
}

TEST_CASE("truncated constants grow with j") {
    const Model m = build_model(obs_config(16));
    const Patch omega{0.0, 2.0, 0.3, 0.6};
    double prev = -1e300;
    for (int j = 0; j <= 4; ++j) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto est = truncated_observability(m, omega, j);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        MESSAGE("j=" << j << " log C=" << est.log_c_emp << " dim=" << est.basis_dim << " live=" << est.live_dim
                     << " dropped=" << est.dropped << " residual=" << est.residual << " t=" << secs);
        REQUIRE_FALSE(est.singular);
        CHECK(est.log_c_emp >= prev - 1e-6);
        CHECK(est.residual <= 1e-8);
        prev = est.log_c_emp;
    }
    CHECK_THROWS_AS(truncated_observability(m, omega, 5), InvalidArgument);
}
