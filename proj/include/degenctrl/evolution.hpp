#pragma once

// Crank-Nicolson time integration of the forward problem and of the adjoint
// (backward) problem, mode by mode, with dense trajectory storage.
//
// Sources are sampled at half steps: entry k of a source sequence acts on the
// step t_k -> t_{k+1}. With that convention the discrete duality identity
//   <phi(T), y(T)> = <phi(0), y(0)> + sum_k dt <f_k, (y_k + y_{k+1})/2>
// holds exactly, which makes the control Gramian symmetric.

#include <cstddef>
#include <span>
#include <vector>

#include "degenctrl/model.hpp"
#include "degenctrl/radial_spectral.hpp"

namespace degenctrl {

struct TimeGrid {
    double horizon = 1.0;
    int steps = 1;

    [[nodiscard]] double dt() const { return horizon / steps; }
    [[nodiscard]] double time(int k) const { return k == steps ? horizon : horizon * k / steps; }
    [[nodiscard]] double half_time(int k) const { return horizon * (k + 0.5) / steps; }
    [[nodiscard]] std::vector<double> nodes() const;
};

TimeGrid make_time_grid(const Model& model);

/// Radial states of one Fourier mode at every time node.
struct ModeTrajectory {
    ModeIndex mode;
    std::size_t n_radial = 0;
    std::vector<double> states;  // (steps+1) x n_radial
    std::vector<double> source;  // steps x n_radial half-step samples, empty when unforced

    [[nodiscard]] std::size_t steps() const { return n_radial == 0 ? 0 : states.size() / n_radial - 1; }
    [[nodiscard]] std::span<const double> at(std::size_t k) const {
        return std::span<const double>(states).subspan(k * n_radial, n_radial);
    }
    std::span<double> at(std::size_t k) { return std::span<double>(states).subspan(k * n_radial, n_radial); }
    /// Average of the states at t_k and t_{k+1}.
    [[nodiscard]] std::vector<double> half_step(std::size_t k) const;
};

/// All modes of one space-time solution.
struct Trajectory {
    TimeGrid time;
    int n_theta_max = 0;
    std::vector<ModeTrajectory> modes;  // ordered as ModeCoeffs slots

    [[nodiscard]] std::size_t steps() const { return static_cast<std::size_t>(time.steps); }
    /// State at time node k in mode coordinates.
    [[nodiscard]] ModeCoeffs snapshot(std::size_t k) const;
    /// (y_k + y_{k+1}) / 2 in mode coordinates.
    [[nodiscard]] ModeCoeffs half_step(std::size_t k) const;
    [[nodiscard]] ModeCoeffs final_state() const { return snapshot(steps()); }
    [[nodiscard]] ModeCoeffs initial_state() const { return snapshot(0); }
};

/// Crank-Nicolson stepping for the family of operators M^{-1}S + n^2 on a
/// fixed radial grid and step size, frequencies 0..max_n. Factorizations are
/// built up front, so a Propagator is safe to share between threads.
class Propagator {
public:
    Propagator(RadialOperator op, double dt, int max_n);
    explicit Propagator(const Model& model);

    [[nodiscard]] const RadialOperator& op() const { return op_; }
    [[nodiscard]] double dt() const { return dt_; }

    /// One step v <- (M + dt/2 K)^{-1} [(M - dt/2 K) v + dt M f], K = S + n^2 M.
    /// `source` may be empty for an unforced step.
    void step(int n, std::span<double> v, std::span<const double> source) const;

    /// Runs `steps` steps from v0, storing every state. `source` holds
    /// steps x n_radial half-step samples or is empty.
    [[nodiscard]] ModeTrajectory evolve(ModeIndex mode, std::span<const double> v0, std::span<const double> source,
                                        int steps) const;

private:
    struct Factor {
        std::vector<double> diag;   // modified pivots of the Thomas algorithm
        std::vector<double> upper;  // super-diagonal of P
        std::vector<double> lower;  // multipliers
    };
    RadialOperator op_;
    double dt_;
    std::vector<Factor> factors_;
};

ModeTrajectory evolve_mode(ModeIndex mode, std::span<const double> phi0, std::span<const double> source,
                           const TimeGrid& grid, const RadialOperator& op);

/// Forward solve from phi0 with an optional half-step source given in mode
/// coordinates (one ModeCoeffs per step; empty means f = 0).
Trajectory solve_forward(const Model& model, const ModeCoeffs& phi0, const std::vector<ModeCoeffs>& source = {});

/// Forward solve with a source given as grid fields at half steps; each field
/// is projected onto the modes.
Trajectory solve_forward(const Model& model, const Field2D& phi0, const std::vector<Field2D>& control);

/// Backward problem with terminal data yT; the result is indexed by physical
/// time, so snapshot(steps()) == yT and snapshot(0) == y(0).
Trajectory solve_adjoint(const Model& model, const ModeCoeffs& yT);

struct SpectrumEntry {
    Parity parity = Parity::Cos;
    int n = 0;
    int k = 1;  // 1-based radial index
    double lambda = 0.0;
};

/// Eigenvalues lambda_{2,k} + n^2 <= bound of the discrete 2D operator over
/// the model's angular modes, ascending; ties ordered by (n, k, parity).
std::vector<SpectrumEntry> full_spectrum(const Model& model, double bound);

/// Discrete L2(Omega) norm of every stored snapshot.
std::vector<double> trajectory_norms(const Model& model, const Trajectory& traj);

}  // namespace degenctrl
