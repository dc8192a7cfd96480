#include "degenctrl/control.hpp"

#include <algorithm>
#include <cmath>

#include "degenctrl/error.hpp"
#include "degenctrl/parallel.hpp"

namespace degenctrl {

namespace {

// A time window [k0, k0+steps] of the model grid with a set of controlled
// mode slots.
struct Window {
    const Model& model;
    const Propagator& prop;
    const ControlRegion& region;
    int k0 = 0;
    int steps = 0;
    std::vector<char> active;  // per slot
};

// Evolves the selected slots of v0 through `steps` steps; unselected slots
// keep empty trajectories.
std::vector<ModeTrajectory> evolve_slots(const Propagator& prop, const ModeCoeffs& v0,
                                         const std::vector<ModeCoeffs>* source, int steps,
                                         const std::vector<char>& slots) {
    const std::size_t nr = v0.n_radial();
    std::vector<ModeTrajectory> out(v0.mode_count());
    parallel_for(v0.mode_count(), [&](std::size_t s) {
        if (!slots[s]) return;
        std::vector<double> src;
        if (source) {
            src.resize(static_cast<std::size_t>(steps) * nr);
            for (int k = 0; k < steps; ++k) std::ranges::copy((*source)[k][s], src.begin() + k * nr);
        }
        out[s] = prop.evolve(v0.mode_at(s), v0[s], src, steps);
    });
    return out;
}

ModeCoeffs final_of(const std::vector<ModeTrajectory>& traj, const ModeCoeffs& shape) {
    ModeCoeffs out(shape.n_theta_max(), shape.n_radial());
    for (std::size_t s = 0; s < traj.size(); ++s)
        if (!traj[s].states.empty()) std::ranges::copy(traj[s].at(traj[s].steps()), out[s].begin());
    return out;
}

void restrict_to(ModeCoeffs& v, const std::vector<char>& slots) {
    for (std::size_t s = 0; s < v.mode_count(); ++s)
        if (!slots[s]) std::ranges::fill(v[s], 0.0);
}

double restricted_norm(const Model& model, ModeCoeffs v, const std::vector<char>& slots) {
    restrict_to(v, slots);
    return mode_norm(model, v);
}

// Controls f_k = chi_D (y_k + y_{k+1})/2 along the adjoint started from yT at
// the window's end.
std::vector<ModeCoeffs> adjoint_controls(const Window& w, const ModeCoeffs& yT) {
    const auto adj = evolve_slots(w.prop, yT, nullptr, w.steps, w.active);
    std::vector<ModeCoeffs> f(w.steps, ModeCoeffs(yT.n_theta_max(), yT.n_radial()));
    parallel_for(static_cast<std::size_t>(w.steps), [&](std::size_t k) {
        ModeCoeffs half(yT.n_theta_max(), yT.n_radial());
        for (std::size_t s = 0; s < adj.size(); ++s) {
            if (!w.active[s]) continue;
            // physical node k of the window is adjoint step steps-k
            const auto a = adj[s].at(w.steps - k);
            const auto b = adj[s].at(w.steps - k - 1);
            auto dst = half[s];
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = 0.5 * (a[i] + b[i]);
        }
        const double t = w.model.horizon() * (w.k0 + static_cast<double>(k) + 0.5) / w.model.n_time();
        f[k] = apply_region_mask(w.model, w.region, t, half);
        restrict_to(f[k], w.active);
    });
    return f;
}

ModeCoeffs window_gramian(const Window& w, const ModeCoeffs& yT) {
    const auto f = adjoint_controls(w, yT);
    const ModeCoeffs zero(yT.n_theta_max(), yT.n_radial());
    return final_of(evolve_slots(w.prop, zero, &f, w.steps, w.active), yT);
}

struct WindowSolve {
    ModeCoeffs y;
    std::vector<ModeCoeffs> control;
    ModeCoeffs terminal;  // all slots, fresh forward solve with the control
    int iterations = 0;
    double solver_residual = 0.0;
    std::vector<double> history;
    bool converged = false;
    bool stagnated = false;
    double cost = 0.0;
};

// Conjugate residuals for (G + eps) y = -P S phi_start in the mass inner
// product; the residual norm is non-increasing by construction.
WindowSolve solve_window(const Window& w, const ModeCoeffs& phi_start, double eps, double cg_tol, double ref_norm,
                         int max_iter) {
    const Model& model = w.model;
    std::vector<char> all(phi_start.mode_count(), 1);
    ModeCoeffs b = final_of(evolve_slots(w.prop, phi_start, nullptr, w.steps, all), phi_start);
    restrict_to(b, w.active);
    b *= -1.0;

    auto op = [&](const ModeCoeffs& v) {
        ModeCoeffs g = window_gramian(w, v);
        g.axpy(eps, v);
        return g;
    };

    WindowSolve out;
    out.y = ModeCoeffs(phi_start.n_theta_max(), phi_start.n_radial());
    ModeCoeffs r = b;
    double rnorm = mode_norm(model, r);
    out.history.push_back(rnorm);
    const double target = cg_tol * ref_norm;
    if (rnorm > target) {
        ModeCoeffs p = r;
        ModeCoeffs ar = op(r);
        ModeCoeffs ap = ar;
        double rar = mode_dot(model, r, ar);
        for (int it = 0; it < max_iter; ++it) {
            const double apap = mode_dot(model, ap, ap);
            if (!(apap > 0.0)) break;
            const double alpha = rar / apap;
            out.y.axpy(alpha, p);
            r.axpy(-alpha, ap);
            rnorm = mode_norm(model, r);
            out.history.push_back(rnorm);
            out.iterations = it + 1;
            if (rnorm <= target) break;
            if (out.history.size() > 10) {
                const double old = out.history[out.history.size() - 11];
                if ((old - rnorm) < 1e-14 * old) {
                    out.stagnated = true;
                    break;
                }
            }
            ar = op(r);
            const double rar_new = mode_dot(model, r, ar);
            const double beta = rar_new / rar;
            rar = rar_new;
            ModeCoeffs pn = r;
            pn.axpy(beta, p);
            p = std::move(pn);
            ModeCoeffs apn = ar;
            apn.axpy(beta, ap);
            ap = std::move(apn);
        }
    }
    out.solver_residual = rnorm;
    out.converged = rnorm <= target;

    out.control = adjoint_controls(w, out.y);
    out.terminal = final_of(evolve_slots(w.prop, phi_start, &out.control, w.steps, all), phi_start);
    const double dt = model.dt();
    for (const auto& f : out.control) {
        const double n = mode_norm(model, f);
        out.cost += dt * n * n;
    }
    return out;
}

}  // namespace

ModeCoeffs apply_region_mask(const Model& model, const ControlRegion& region, double t, const ModeCoeffs& v) {
    model.check(v);
    if (const auto* cyl = std::get_if<Cylinder>(&region)) {
        ModeCoeffs out = v;
        const auto& r = model.grid().nodes;
        for (std::size_t s = 0; s < out.mode_count(); ++s) {
            auto m = out[s];
            for (std::size_t i = 0; i < m.size(); ++i)
                if (!cyl->contains_r(r[i])) m[i] = 0.0;
        }
        return out;
    }
    const auto& boxes = std::get<BoxUnion>(region);
    Field2D f = synthesize_field(model, v);
    const auto theta = model.theta_nodes();
    const auto& r = model.grid().nodes;
    for (std::size_t q = 0; q < f.n_theta(); ++q)
        for (std::size_t i = 0; i < f.n_radial(); ++i)
            if (!boxes.contains(theta[q], r[i], t)) f(q, i) = 0.0;
    return project_modes(model, f);
}

ModeCoeffs apply_control_gramian(const Model& model, const ControlRegion& region, const ModeCoeffs& yT) {
    model.check(yT);
    const Propagator prop(model);
    const Window w{model, prop, region, 0, model.n_time(), std::vector<char>(yT.mode_count(), 1)};
    return window_gramian(w, yT);
}

HUMResult hum_control(const Model& model, const ModeCoeffs& phi0, const ControlRegion& region, double eps,
                      double cg_tol, int max_iter) {
    model.check(phi0);
    if (!(eps > 0.0)) throw InvalidArgument("hum: eps must be positive");
    if (!(cg_tol > 0.0)) throw InvalidArgument("hum: cg_tol must be positive");
    if (max_iter < 1) throw InvalidArgument("hum: max_iter must be >= 1");
    const Propagator prop(model);
    const Window w{model, prop, region, 0, model.n_time(), std::vector<char>(phi0.mode_count(), 1)};

    HUMResult res;
    res.eps = eps;
    res.cg_tol = cg_tol;
    res.phi0_norm = mode_norm(model, phi0);
    auto sol = solve_window(w, phi0, eps, cg_tol, res.phi0_norm, max_iter);
    res.yT = std::move(sol.y);
    res.control = std::move(sol.control);
    res.terminal = std::move(sol.terminal);
    res.iterations = sol.iterations;
    res.solver_residual = sol.solver_residual;
    res.residual_history = std::move(sol.history);
    res.converged = sol.converged;
    res.stagnated = sol.stagnated;
    res.cost = sol.cost;
    res.terminal_residual = mode_norm(model, res.terminal);
    ModeCoeffs id = res.terminal;
    id.axpy(eps, res.yT);
    res.identity_residual = mode_norm(model, id);
    for (const auto& f : res.control) {
        const auto field = synthesize_field(model, f);
        for (double v : field.data()) res.linf = std::max(res.linf, std::abs(v));
    }
    return res;
}

double linf_ratio(const HUMResult& result) {
    if (!(result.phi0_norm > 0.0)) throw InvalidArgument("linf_ratio: zero initial datum");
    return result.linf / result.phi0_norm;
}

LRResult lr_control(const Model& model, const ModeCoeffs& phi0, const Cylinder& omega, double tol, int n_blocks,
                    double cg_tol, int max_iter) {
    model.check(phi0);
    if (!(tol > 0.0)) throw InvalidArgument("lr: tol must be positive");
    if (n_blocks < 1 || n_blocks > 30) throw InvalidArgument("lr: block count out of range");
    if (!(omega.a < omega.b)) throw InvalidArgument("lr: empty control band");
    const int nt = model.n_time();

    std::vector<int> nodes;
    for (int k = 0; k <= n_blocks; ++k)
        nodes.push_back(static_cast<int>(std::lround(nt * (1.0 - std::ldexp(1.0, -k)))));
    for (int k = 0; k < n_blocks; ++k)
        if (nodes[k + 1] - nodes[k] < 2) throw InvalidArgument("lr: n_time too small for the requested blocks");

    const Propagator prop(model);
    const ControlRegion region = omega;
    LRResult res;
    res.tol = tol;
    res.phi0_norm = mode_norm(model, phi0);
    for (int n : nodes) res.boundaries.push_back(model.horizon() * n / nt);

    ModeCoeffs state = phi0;
    const std::vector<char> all(phi0.mode_count(), 1);
    for (int k = 0; k < n_blocks; ++k) {
        const int s = nodes[k];
        const int e = nodes[k + 1];
        const int m = s + (e - s) / 2;
        LRBlock blk;
        blk.index = k;
        blk.cap = std::min(1 << std::min(k, 20), model.n_theta_max());
        blk.t_start = model.horizon() * s / nt;
        blk.t_switch = model.horizon() * m / nt;
        blk.t_end = model.horizon() * e / nt;
        blk.budget = 0.5 * tol * std::ldexp(1.0, -k) * res.phi0_norm;

        std::vector<char> active(phi0.mode_count(), 0);
        for (std::size_t sl = 0; sl < active.size(); ++sl) active[sl] = phi0.mode_at(sl).n <= blk.cap;
        const Window w{model, prop, region, s, m - s, active};

        ModeCoeffs at_switch = state;
        if (res.phi0_norm > 0.0 && restricted_norm(model, state, active) > 0.0) {
            for (double eps = 1e-2; eps >= 1e-16; eps *= 1e-2) {
                auto sol = solve_window(w, state, eps, cg_tol, res.phi0_norm, max_iter);
                blk.eps = eps;
                blk.iterations += sol.iterations;
                blk.cost = sol.cost;
                at_switch = std::move(sol.terminal);
                blk.low_mode_norm = restricted_norm(model, at_switch, active);
                if (blk.low_mode_norm <= blk.budget) break;
            }
        } else {
            at_switch = final_of(evolve_slots(prop, state, nullptr, m - s, all), state);
            blk.low_mode_norm = restricted_norm(model, at_switch, active);
        }
        blk.budget_met = blk.low_mode_norm <= blk.budget;
        state = final_of(evolve_slots(prop, at_switch, nullptr, e - m, all), state);
        blk.norm_end = mode_norm(model, state);
        res.blocks.push_back(blk);
    }
    if (nodes.back() < nt) state = final_of(evolve_slots(prop, state, nullptr, nt - nodes.back(), all), state);
    res.final_norm = mode_norm(model, state);
    res.final_residual = res.phi0_norm > 0.0 ? res.final_norm / res.phi0_norm : 0.0;
    res.converged = res.final_residual <= tol;
    if (!res.converged) res.diagnostic = "tolerance not reached with the configured blocks";
    return res;
}

}  // namespace degenctrl
