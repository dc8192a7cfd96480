#include "degenctrl/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "degenctrl/error.hpp"
#include "degenctrl/evolution.hpp"
#include "degenctrl/radial_spectral.hpp"

namespace degenctrl {

ModeCoeffs eigen_datum(const Model& model, ModeIndex mode, int k) {
    if (k < 1) throw InvalidArgument("radial index k must be at least 1");
    const auto spec =
        radial_spectrum(assemble_radial_operator(model.alpha(), model.grid()), static_cast<std::size_t>(k));
    ModeCoeffs c(model);
    std::ranges::copy(spec.vectors[static_cast<std::size_t>(k - 1)], c.mode(mode).begin());
    return c;
}

ModeCoeffs desk_datum(const Model& model) {
    if (model.n_theta_max() < 2) throw InvalidArgument("desk datum needs n_theta_max >= 2");
    const auto spec = radial_spectrum(assemble_radial_operator(model.alpha(), model.grid()), 3);
    ModeCoeffs c(model);
    std::ranges::copy(spec.vectors[0], c.mode({Parity::Cos, 1}).begin());
    std::ranges::copy(spec.vectors[2], c.mode({Parity::Sin, 2}).begin());
    return c;
}

ModeCoeffs random_datum(const Model& model, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    ModeCoeffs c(model);
    for (std::size_t s = 0; s < c.mode_count(); ++s) {
        auto v = c[s];
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double r = model.grid().nodes[i];
            v[i] = nd(rng) * r * (1.0 - r);
        }
    }
    c *= 1.0 / mode_norm(model, c);
    return c;
}

BoxUnion desk_boxes(double horizon) {
    return BoxUnion({Box{{0.0, 2.0}, {0.3, 0.45}, {0.0, 0.6 * horizon}},
                     Box{{3.0, 5.5}, {0.4, 0.6}, {0.3 * horizon, horizon}}},
                    horizon);
}

std::vector<CarlemanCase> carleman_family(const ModelConfig& base, const std::vector<double>& alphas, double a,
                                          double b, const std::vector<double>& multipliers) {
    std::vector<CarlemanCase> out;
    for (double alpha : alphas) {
        ModelConfig cfg = base;
        cfg.alpha = alpha;
        cfg.grid_power.reset();
        cfg.n_theta_max = std::max(cfg.n_theta_max, 1);
        const Model model = build_model(cfg);
        const auto op = assemble_radial_operator(alpha, model.grid());
        const TimeGrid time = make_time_grid(model);
        const auto eta = build_eta(alpha, a, b);
        const double s0 = model.config().effective_s0();
        std::vector<double> s_values;
        for (double m : multipliers) s_values.push_back(m * s0);
        const ModeIndex mode{Parity::Cos, 1};

        const auto spec = radial_spectrum(op, 1);
        const auto free = evolve_mode(mode, spec.vectors[0], {}, time, op);
        out.push_back({alpha, "free", s0, carleman_report(free, model.grid(), time, eta, s_values, s0)});

        const std::size_t nr = model.n_radial();
        std::vector<double> source(static_cast<std::size_t>(time.steps) * nr);
        for (int k = 0; k < time.steps; ++k) {
            const double g = std::sin(std::numbers::pi * time.half_time(k) / time.horizon);
            for (std::size_t i = 0; i < nr; ++i) {
                const double r = model.grid().nodes[i];
                source[static_cast<std::size_t>(k) * nr + i] = g * r * (1.0 - r);
            }
        }
        const std::vector<double> zero(nr, 0.0);
        const auto forced = evolve_mode(mode, zero, source, time, op);
        out.push_back({alpha, "forced", s0, carleman_report(forced, model.grid(), time, eta, s_values, s0)});
    }
    return out;
}

}  // namespace degenctrl
