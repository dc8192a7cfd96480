#include "degenctrl/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "degenctrl/error.hpp"
#include "degenctrl/parallel.hpp"

namespace degenctrl {

std::vector<double> TimeGrid::nodes() const {
    std::vector<double> t(steps + 1);
    for (int k = 0; k <= steps; ++k) t[k] = time(k);
    return t;
}

TimeGrid make_time_grid(const Model& model) { return TimeGrid{model.horizon(), model.n_time()}; }

std::vector<double> ModeTrajectory::half_step(std::size_t k) const {
    const auto a = at(k);
    const auto b = at(k + 1);
    std::vector<double> out(n_radial);
    for (std::size_t i = 0; i < n_radial; ++i) out[i] = 0.5 * (a[i] + b[i]);
    return out;
}

ModeCoeffs Trajectory::snapshot(std::size_t k) const {
    const std::size_t nr = modes.empty() ? 0 : modes.front().n_radial;
    ModeCoeffs out(n_theta_max, nr);
    for (std::size_t s = 0; s < modes.size(); ++s) std::ranges::copy(modes[s].at(k), out[s].begin());
    return out;
}

ModeCoeffs Trajectory::half_step(std::size_t k) const {
    const std::size_t nr = modes.empty() ? 0 : modes.front().n_radial;
    ModeCoeffs out(n_theta_max, nr);
    for (std::size_t s = 0; s < modes.size(); ++s) {
        const auto a = modes[s].at(k);
        const auto b = modes[s].at(k + 1);
        auto dst = out[s];
        for (std::size_t i = 0; i < nr; ++i) dst[i] = 0.5 * (a[i] + b[i]);
    }
    return out;
}

// ---- Propagator -------------------------------------------------------------

Propagator::Propagator(RadialOperator op, double dt, int max_n) : op_(std::move(op)), dt_(dt) {
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
    if (max_n < 0) throw InvalidArgument("max frequency must be >= 0");
    const std::size_t nr = op_.size();
    const double c = 0.5 * dt_;
    factors_.resize(static_cast<std::size_t>(max_n) + 1);
    for (int n = 0; n <= max_n; ++n) {
        Factor& f = factors_[n];
        f.diag.resize(nr);
        f.upper.resize(nr > 0 ? nr - 1 : 0);
        f.lower.resize(nr > 0 ? nr - 1 : 0);
        const double n2 = static_cast<double>(n) * n;
        for (std::size_t i = 0; i + 1 < nr; ++i) f.upper[i] = c * op_.offdiag[i];
        for (std::size_t i = 0; i < nr; ++i) {
            double d = op_.mass[i] * (1.0 + c * n2) + c * op_.diag[i];
            if (i > 0) {
                f.lower[i - 1] = f.upper[i - 1] / f.diag[i - 1];
                d -= f.lower[i - 1] * f.upper[i - 1];
            }
            if (!(d > 0.0)) throw InvariantViolation("Crank-Nicolson matrix is singular");
            f.diag[i] = d;
        }
    }
}

Propagator::Propagator(const Model& model)
    : Propagator(assemble_radial_operator(model.alpha(), model.grid()), model.dt(), model.n_theta_max()) {}

void Propagator::step(int n, std::span<double> v, std::span<const double> source) const {
    const std::size_t nr = op_.size();
    if (v.size() != nr || (!source.empty() && source.size() != nr))
        throw DimensionMismatch("propagator: vector length mismatch");
    if (n < 0 || static_cast<std::size_t>(n) >= factors_.size())
        throw InvalidArgument("propagator: frequency out of range");
    const Factor& f = factors_[n];
    const double c = 0.5 * dt_;
    const double n2 = static_cast<double>(n) * n;
    // rhs = (M - c K) v + dt M f
    thread_local std::vector<double> rhs;
    rhs.resize(nr);
    for (std::size_t i = 0; i < nr; ++i) {
        double kv = op_.diag[i] * v[i] + n2 * op_.mass[i] * v[i];
        if (i > 0) kv += op_.offdiag[i - 1] * v[i - 1];
        if (i + 1 < nr) kv += op_.offdiag[i] * v[i + 1];
        rhs[i] = op_.mass[i] * v[i] - c * kv;
        if (!source.empty()) rhs[i] += dt_ * op_.mass[i] * source[i];
    }
    for (std::size_t i = 1; i < nr; ++i) rhs[i] -= f.lower[i - 1] * rhs[i - 1];
    v[nr - 1] = rhs[nr - 1] / f.diag[nr - 1];
    for (std::size_t ii = nr - 1; ii-- > 0;) v[ii] = (rhs[ii] - f.upper[ii] * v[ii + 1]) / f.diag[ii];
}

ModeTrajectory Propagator::evolve(ModeIndex mode, std::span<const double> v0, std::span<const double> source,
                                  int steps) const {
    const std::size_t nr = op_.size();
    if (v0.size() != nr) throw DimensionMismatch("evolve: initial vector length mismatch");
    if (!source.empty() && source.size() != static_cast<std::size_t>(steps) * nr)
        throw DimensionMismatch("evolve: source must hold one radial vector per step");
    ModeTrajectory traj;
    traj.mode = mode;
    traj.n_radial = nr;
    traj.states.resize((static_cast<std::size_t>(steps) + 1) * nr);
    std::ranges::copy(v0, traj.states.begin());
    if (!source.empty()) traj.source.assign(source.begin(), source.end());
    std::vector<double> v(v0.begin(), v0.end());
    for (int k = 0; k < steps; ++k) {
        const auto f = source.empty() ? std::span<const double>{} : source.subspan(k * nr, nr);
        step(mode.n, v, f);
        for (std::size_t i = 0; i < nr; ++i) traj.states[(k + 1) * nr + i] = v[i];
    }
    return traj;
}

ModeTrajectory evolve_mode(ModeIndex mode, std::span<const double> phi0, std::span<const double> source,
                           const TimeGrid& grid, const RadialOperator& op) {
    const Propagator prop(op, grid.dt(), mode.n);
    return prop.evolve(mode, phi0, source, grid.steps);
}

// ---- whole-field solves -----------------------------------------------------

namespace {

Trajectory run_modes(const Model& model, const Propagator& prop, const ModeCoeffs& v0,
                     const std::vector<ModeCoeffs>& source) {
    model.check(v0);
    const std::size_t steps = static_cast<std::size_t>(model.n_time());
    if (!source.empty()) {
        if (source.size() != steps) throw DimensionMismatch("source must hold one sample per time step");
        for (const auto& s : source) model.check(s);
    }
    Trajectory traj;
    traj.time = make_time_grid(model);
    traj.n_theta_max = model.n_theta_max();
    traj.modes.resize(v0.mode_count());
    const std::size_t nr = model.n_radial();
    parallel_for(v0.mode_count(), [&](std::size_t s) {
        std::vector<double> src;
        if (!source.empty()) {
            src.resize(steps * nr);
            for (std::size_t k = 0; k < steps; ++k) std::ranges::copy(source[k][s], src.begin() + k * nr);
        }
        traj.modes[s] = prop.evolve(v0.mode_at(s), v0[s], src, model.n_time());
    });
    return traj;
}

}  // namespace

Trajectory solve_forward(const Model& model, const ModeCoeffs& phi0, const std::vector<ModeCoeffs>& source) {
    const Propagator prop(model);
    return run_modes(model, prop, phi0, source);
}

Trajectory solve_forward(const Model& model, const Field2D& phi0, const std::vector<Field2D>& control) {
    std::vector<ModeCoeffs> source;
    source.reserve(control.size());
    for (const auto& f : control) source.push_back(project_modes(model, f));
    return solve_forward(model, project_modes(model, phi0), source);
}

Trajectory solve_adjoint(const Model& model, const ModeCoeffs& yT) {
    // The generator is self-adjoint, so the backward problem is the forward
    // flow run from yT with time reversed.
    const Propagator prop(model);
    Trajectory fwd = run_modes(model, prop, yT, {});
    for (auto& m : fwd.modes) {
        const std::size_t nr = m.n_radial;
        const std::size_t steps = m.steps();
        for (std::size_t a = 0, b = steps; a < b; ++a, --b)
            std::swap_ranges(m.states.begin() + a * nr, m.states.begin() + (a + 1) * nr, m.states.begin() + b * nr);
    }
    return fwd;
}

std::vector<SpectrumEntry> full_spectrum(const Model& model, double bound) {
    if (!(bound > 0.0)) throw InvalidArgument("full_spectrum: bound must be positive");
    const RadialOperator op = assemble_radial_operator(model.alpha(), model.grid());
    const std::size_t count = count_eigenvalues_below(op, bound * (1.0 + 1e-15) + 1e-300);
    const std::vector<double> radial = radial_eigenvalues(op, count);
    std::vector<SpectrumEntry> out;
    for (int n = 0; n <= model.n_theta_max(); ++n) {
        const double n2 = static_cast<double>(n) * n;
        for (std::size_t k = 0; k < radial.size(); ++k) {
            const double lambda = radial[k] + n2;
            if (lambda > bound) break;
            out.push_back({Parity::Cos, n, static_cast<int>(k + 1), lambda});
            if (n > 0) out.push_back({Parity::Sin, n, static_cast<int>(k + 1), lambda});
        }
    }
    std::ranges::sort(out, [](const SpectrumEntry& a, const SpectrumEntry& b) {
        return std::tie(a.lambda, a.n, a.k, a.parity) < std::tie(b.lambda, b.n, b.k, b.parity);
    });
    return out;
}

std::vector<double> trajectory_norms(const Model& model, const Trajectory& traj) {
    std::vector<double> out(traj.steps() + 1, 0.0);
    for (std::size_t k = 0; k <= traj.steps(); ++k) {
        double acc = 0.0;
        for (const auto& m : traj.modes) acc += radial_dot(model.grid(), m.at(k), m.at(k));
        out[k] = std::sqrt(acc);
    }
    return out;
}

}  // namespace degenctrl
