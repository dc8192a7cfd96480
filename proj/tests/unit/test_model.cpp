#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "degenctrl/error.hpp"
#include "degenctrl/model.hpp"

using namespace degenctrl;

namespace {

ModelConfig small_config() {
    ModelConfig c;
    c.alpha = 0.5;
    c.n_theta_max = 4;
    c.n_r = 32;
    c.n_time = 10;
    return c;
}

}  // namespace

TEST_CASE("uniform and graded radial nodes") {
    const auto g1 = build_radial_grid(4, 1.0, 0.5);
    REQUIRE(g1.nodes.size() == 3);
    CHECK(g1.nodes[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(g1.nodes[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g1.nodes[2] == doctest::Approx(0.75).epsilon(1e-15));

    const auto g2 = build_radial_grid(4, 2.0, 0.5);
    CHECK(g2.nodes[0] == doctest::Approx(1.0 / 16).epsilon(1e-15));
    CHECK(g2.nodes[1] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(g2.nodes[2] == doctest::Approx(9.0 / 16).epsilon(1e-15));

    for (std::size_t i = 0; i < g2.mass.size(); ++i) CHECK(g2.mass[i] > 0.0);
    for (double w : g2.half_weights) CHECK(w > 0.0);
}

TEST_CASE("refining a uniform grid halves the cell width") {
    const auto a = build_radial_grid(16, 1.0, 0.5);
    const auto b = build_radial_grid(32, 1.0, 0.5);
    const double wa = *std::max_element(a.widths.begin(), a.widths.end());
    const double wb = *std::max_element(b.widths.begin(), b.widths.end());
    CHECK(wb == doctest::Approx(wa / 2).epsilon(1e-14));
}

TEST_CASE("config validation") {
    auto c = small_config();
    c.alpha = 1.2;
    try {
        c.validate();
        FAIL("expected an error");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("alpha out of range") != std::string::npos);
    }
    c = small_config();
    c.n_r = 4;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = small_config();
    c.grid_power = 0.5;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = small_config();
    c.theta_quad_points = 5;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);

    const auto r = small_config().resolved();
    CHECK(*r.grid_power == doctest::Approx(2.0 / 1.5));
    CHECK(*r.theta_quad_points == 4 * 4 + 8);
    CHECK(*r.s0_default == doctest::Approx(10.0));
    CHECK(build_model(small_config()).config() == build_model(small_config()).config());
}

TEST_CASE("mode slots") {
    ModeCoeffs c(3, 5);
    CHECK(c.mode_count() == 7);
    for (std::size_t s = 0; s < c.mode_count(); ++s) CHECK(c.slot(c.mode_at(s)) == s);
    CHECK_THROWS((void)c.slot({Parity::Sin, 0}));
    CHECK_THROWS((void)c.slot({Parity::Cos, 4}));
}

TEST_CASE("projection of single angular modes") {
    const Model m = build_model(small_config());
    const auto& r = m.grid().nodes;

    Field2D f(m);
    for (std::size_t q = 0; q < m.n_theta(); ++q)
        for (std::size_t i = 0; i < m.n_radial(); ++i)
            f(q, i) = angular_basis({Parity::Sin, 3}, m.theta_nodes()[q]) * r[i] * (1 - r[i]);
    const auto c = project_modes(m, f);
    for (std::size_t s = 0; s < c.mode_count(); ++s) {
        const bool target = c.mode_at(s) == ModeIndex{Parity::Sin, 3};
        for (std::size_t i = 0; i < m.n_radial(); ++i) {
            if (target)
                CHECK(c[s][i] == doctest::Approx(r[i] * (1 - r[i])).epsilon(1e-12));
            else
                CHECK(std::abs(c[s][i]) < 1e-12);
        }
    }

    const auto zero = project_modes(m, Field2D(m));
    for (double v : zero.data()) CHECK(v == 0.0);
}

TEST_CASE("synthesized unit cos(1) coefficient") {
    const Model m = build_model(small_config());
    ModeCoeffs c(m);
    for (auto& v : c.mode({Parity::Cos, 1})) v = 1.0;
    const auto f = synthesize_field(m, c);
    // theta_0 = 0
    CHECK(f(0, 3) == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("roundtrip and Parseval on random coefficients") {
    const Model m = build_model(small_config());
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
        ModeCoeffs c(m);
        for (auto& v : c.data()) v = nd(rng);
        const auto f = synthesize_field(m, c);
        const auto back = project_modes(m, f);
        for (std::size_t k = 0; k < c.data().size(); ++k) CHECK(std::abs(back.data()[k] - c.data()[k]) < 1e-12);
        const double nf = field_norm(m, f);
        const double nc = mode_norm(m, c);
        CHECK(std::abs(nf - nc) / nc < 1e-10);
    }
}

TEST_CASE("dimension checks") {
    const Model m = build_model(small_config());
    CHECK_THROWS_AS(project_modes(m, Field2D(3, 3)), DimensionMismatch);
    CHECK_THROWS_AS(synthesize_field(m, ModeCoeffs(2, m.n_radial())), DimensionMismatch);
}
