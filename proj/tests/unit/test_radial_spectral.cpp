#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "degenctrl/error.hpp"
#include "degenctrl/radial_spectral.hpp"

using namespace degenctrl;

namespace {

RadialOperator default_operator(double alpha, int n_r) {
    return assemble_radial_operator(alpha, build_radial_grid(n_r, 2.0 / (2.0 - alpha), alpha));
}

}  // namespace

TEST_CASE("operator entries on a uniform 4-cell grid") {
    const auto op = assemble_radial_operator(0.5, build_radial_grid(4, 1.0, 0.5));
    REQUIRE(op.size() == 3);
    const auto off = op.symmetric_offdiag();
    CHECK(off[0] == doctest::Approx(-std::sqrt(0.375) / (0.25 * 0.25)).epsilon(1e-14));
    CHECK(off[0] == doctest::Approx(-9.7980).epsilon(1e-5));
    for (double o : op.offdiag) CHECK(o < 0.0);
}

TEST_CASE("small alpha approaches the standard Laplacian stencil") {
    const auto op = assemble_radial_operator(1e-9, build_radial_grid(10, 1.0, 1e-9));
    const double h = 0.1;
    for (std::size_t i = 0; i < op.size(); ++i) {
        CHECK(op.diag[i] / op.mass[i] == doctest::Approx(2.0 / (h * h)).epsilon(1e-6));
        if (i + 1 < op.size()) CHECK(op.offdiag[i] / op.mass[i] == doctest::Approx(-1.0 / (h * h)).epsilon(1e-6));
    }
}

TEST_CASE("bessel_j agrees with the standard library") {
    for (double nu : {0.0, 1.0 / 3.0, 0.5, 0.9, 0.47}) {
        for (double x : {0.1, 1.0, 2.5, 7.0, 19.0, 39.0, 41.0, 80.0, 200.0}) {
            const double ref = std::cyl_bessel_j(nu, x);
            CHECK(std::abs(bessel_j(nu, x) - ref) < 1e-12);
        }
    }
}

TEST_CASE("bessel zeros agree with Boost") {
    for (double nu : {1.0 / 3.0, 0.5, 0.47, 0.0526}) {
        for (int k = 1; k <= 20; ++k) {
            const double z = bessel_zero(nu, k);
            CHECK(z == doctest::Approx(boost::math::cyl_bessel_j_zero(nu, k)).epsilon(1e-13));
            CHECK(std::abs(bessel_j(nu, z)) <= 1e-12);
        }
    }
    for (int k = 1; k <= 5; ++k) CHECK(bessel_zero(0.5, k) == doctest::Approx(k * std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("bessel oracle") {
    const auto lam = bessel_oracle(0.5, 3);
    CHECK(lam[0] == doctest::Approx(0.5625 * std::pow(boost::math::cyl_bessel_j_zero(1.0 / 3.0, 1), 2)).epsilon(1e-13));
    CHECK(lam[0] < lam[1]);
    CHECK(lam[1] < lam[2]);
    const auto pi2 = bessel_oracle(1e-12, 2);
    CHECK(pi2[1] == doctest::Approx(4 * std::numbers::pi * std::numbers::pi).epsilon(1e-9));
    CHECK_THROWS_AS(bessel_oracle(1.5, 2), InvalidArgument);
}

TEST_CASE("eigenpairs agree with a dense generalized solver") {
    const auto op = default_operator(0.5, 120);
    const std::size_t n = op.size();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        S(i, i) = op.diag[i];
        M(i, i) = op.mass[i];
        if (i + 1 < n) S(i, i + 1) = S(i + 1, i) = op.offdiag[i];
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(S, M);
    const auto spec = radial_spectrum(op, 8);
    for (std::size_t k = 0; k < 8; ++k) {
        CHECK(spec.values[k] == doctest::Approx(ges.eigenvalues()(k)).epsilon(1e-11));
        // residual and normalization
        const auto Av = op.apply(spec.vectors[k]);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(Av[i] - spec.values[k] * spec.vectors[k][i]));
        CHECK(res <= 1e-8 * spec.values[k] * 100);
        double nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) nrm += op.mass[i] * spec.vectors[k][i] * spec.vectors[k][i];
        CHECK(nrm == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(spec.vectors[k][0] > 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += op.mass[i] * spec.vectors[k][i] * spec.vectors[j][i];
            CHECK(std::abs(dot) < 1e-8);
        }
    }
    const auto all = radial_eigenvalues(op, n);
    for (std::size_t k = 0; k < n; ++k) CHECK(all[k] == doctest::Approx(ges.eigenvalues()(k)).epsilon(1e-9));
    CHECK(count_eigenvalues_below(op, 0.5 * (all[3] + all[4])) == 4);
}

TEST_CASE("Rayleigh quotient of the first eigenvector") {
    const auto op = default_operator(0.5, 400);
    const auto spec = radial_spectrum(op, 1);
    const double rq = op.energy(spec.vectors[0]);
    CHECK(rq == doctest::Approx(spec.values[0]).epsilon(1e-10));
}

TEST_CASE("near-Laplacian spectrum") {
    const auto op = assemble_radial_operator(1e-8, build_radial_grid(2000, 1.0, 1e-8));
    const auto vals = radial_eigenvalues(op, 3);
    for (int k = 1; k <= 3; ++k)
        CHECK(vals[k - 1] == doctest::Approx(k * k * std::numbers::pi * std::numbers::pi).epsilon(1e-3));
}

TEST_CASE("graded grid matches the Bessel oracle and the spectral gap") {
    const auto vals = radial_eigenvalues(default_operator(0.5, 1000), 5);
    const auto ref = bessel_oracle(0.5, 5);
    for (int k = 0; k < 5; ++k) {
        CHECK(std::abs(vals[k] - ref[k]) / ref[k] < 5e-3);
        CHECK(vals[k] > 0.0625);
    }
    CHECK(vals[0] == doctest::Approx(4.73).epsilon(5e-3));
}

TEST_CASE("Hardy ratio of r(1-r) against adaptive quadrature") {
    const double alpha = 0.5;
    boost::math::quadrature::tanh_sinh<double> integrator;
    const double left = integrator.integrate(
        [&](double r) { return std::pow(r, alpha) * (1 - r) * (1 - r); }, 0.0, 1.0, 1e-12);
    const double right =
        integrator.integrate([&](double r) { return std::pow(r, alpha) * (1 - 2 * r) * (1 - 2 * r); }, 0.0, 1.0, 1e-12);
    const double oracle = left / right;

    const auto grid = build_radial_grid(4000, 2.0 / (2.0 - alpha), alpha);
    std::vector<double> u(grid.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = grid.nodes[i] * (1 - grid.nodes[i]);
    const auto rep = hardy_ratio(u, alpha, grid, "r(1-r)");
    CHECK(rep.ratio == doctest::Approx(oracle).epsilon(1e-4));
    CHECK(rep.constant == doctest::Approx(16.0));
    CHECK_FALSE(rep.exceeds);
    CHECK(rep.left >= 0.0);
    CHECK(rep.right >= 0.0);
}

TEST_CASE("Hardy ratio of the first eigenvector and error paths") {
    const auto op = default_operator(0.5, 400);
    const auto spec = radial_spectrum(op, 1);
    const auto rep = hardy_ratio(spec.vectors[0], 0.5, op.grid);
    CHECK(rep.ratio <= 16.0);

    std::vector<double> edges(op.grid.edges.size(), 1.0);
    CHECK_THROWS_AS(hardy_ratio_with_ends(edges, 0.5, op.grid), InvalidArgument);
    std::vector<double> zero(op.grid.size(), 0.0);
    CHECK_THROWS_AS(hardy_ratio(zero, 0.5, op.grid), InvalidArgument);
}
