#pragma once

// Observability from measurable space-time sets, restricted to finite box
// unions: the time set E of heavy slices, density-point sequences, the
// analytic extension in an auxiliary variable tau, derivative bounds, slab
// interpolation exponents and the end-to-end observability ratio.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "degenctrl/evolution.hpp"
#include "degenctrl/model.hpp"
#include "degenctrl/region.hpp"

namespace degenctrl {

/// Finite union of disjoint, sorted open intervals in (0, horizon).
class TimeSet {
public:
    TimeSet() = default;
    /// Merges overlapping or touching intervals; empty intervals are dropped.
    TimeSet(std::vector<Interval> intervals, double horizon);

    [[nodiscard]] const std::vector<Interval>& intervals() const { return intervals_; }
    [[nodiscard]] double horizon() const { return horizon_; }
    [[nodiscard]] double measure() const;
    /// |E cap (lo, hi)|
    [[nodiscard]] double measure_in(double lo, double hi) const;
    [[nodiscard]] bool contains(double t) const;
    /// Longest interval; ties go to the earliest.
    [[nodiscard]] Interval largest() const;

private:
    std::vector<Interval> intervals_;
    double horizon_ = 1.0;
};

struct TimeSliceSet {
    double d_measure = 0.0;      // |D|
    double omega_measure = 0.0;  // |omega| = 2pi (b - a)
    double threshold = 0.0;      // |D| / (2T)
    TimeSet E;
    double e_measure = 0.0;
    double e_lower_bound = 0.0;  // |D| / (2 |omega|)
};

/// E = {t : |D_t| >= |D|/(2T)}. D must lie in T x (a,b) x (0,T) for the
/// band omega = (a,b). Throws InvariantViolation if |E| < |D|/(2|omega|).
TimeSliceSet build_time_slices(const BoxUnion& D, const Cylinder& omega);

/// Grid points (theta_q, r_i, t) with t in E and (theta_q, r_i) in D_t but
/// (theta_q, r_i, t) outside D, for t at the model's half-step times.
std::size_t slice_inclusion_violations(const Model& model, const BoxUnion& D, const TimeSet& E);

struct DensitySequence {
    double ell = 0.0;
    double q = 0.0;
    double gap = 0.0;                // A = ell_1 - ell
    int halvings = 0;                // number of times A was halved
    std::vector<double> values;      // ell_1 > ... > ell_{m_max}
    std::vector<double> fractions;   // |E cap (ell_{m+1}, ell_m)| / (ell_m - ell_{m+1})
    double max_ratio_error = 0.0;    // max |(l_{m+1}-l_{m+2}) - q (l_m - l_{m+1})|
    double min_fraction = 0.0;
};

/// ell_m = ell + A q^{m-1}, m = 1..m_max. With ell_1 given, A = ell_1 - ell
/// is used as is; otherwise A starts at T - ell and is halved until every gap
/// carries at least a third of its length in E. Throws ConvergenceError when
/// no A works within the search budget.
DensitySequence density_sequence(const TimeSet& E, double ell, double q, int m_max,
                                 std::optional<double> ell_1 = std::nullopt);

/// ((C + 1 - h) / (C + 1))^{1/8}
double choose_q(double C, double h);

struct ExtendedFieldOptions {
    double tau_max = 0.1;
    int n_tau = 20;                 // even; tau_j = -tau_max + j 2 tau_max / n_tau
    std::optional<std::size_t> cap;  // lowest eigenpairs kept, all by default
};

struct ExtendedField {
    double t = 0.0;
    std::size_t cap = 0;
    double lambda_max = 0.0;
    std::vector<double> taus;
    std::vector<ModeCoeffs> samples;  // one per tau
    std::vector<double> norms;
    double restriction_error = 0.0;   // CN-symbol series at tau=0 vs the stepped snapshot, relative
    double exact_time_gap = 0.0;      // exponential series at tau=0 vs the stepped snapshot, relative
    double elliptic_residual = 0.0;   // max_j |(d_tautau - K) phi| / |phi| at interior tau
};

/// phi(tau, t) = sum phi_n^0 exp(-lambda_n t + sqrt(lambda_n) tau) Phi_n over
/// the discrete 2D eigenbasis. t must be a time-grid node. Rejects
/// sqrt(lambda_max) tau_max > 700.
ExtendedField extended_field(const Model& model, const ModeCoeffs& phi0, double t,
                             const ExtendedFieldOptions& options = {});

struct DerivativeBoundRow {
    int l = 0;
    double log_discrete_max = 0.0;  // log max_n lambda_n^{2l} e^{-lambda_n t}
    double log_bound = 0.0;         // log (2/t)^{2l} (l/e)^{2l}
    bool holds = false;
    double log_derivative_norm = 0.0;  // log |d_t^l phi(t)|
    double factorial_ratio = 0.0;      // |d_t^l phi| (t/2)^l / (l! |phi0|)
};

struct DerivativeBoundReport {
    double t = 0.0;
    int l_max = 0;
    std::vector<DerivativeBoundRow> rows;
    bool all_hold = false;
    double max_factorial_ratio = 0.0;
    std::string warning;
};

/// All quantities in log space over the full discrete spectrum. l_max is
/// capped where (2/t)^{2l} (l/e)^{2l} leaves the double range.
DerivativeBoundReport derivative_bound_report(const Model& model, const ModeCoeffs& phi0, double t, int l_max);

/// int chi_E(t) |phi(t)|_{L1(D_t)} dt over (t1, t2) for the piecewise-linear
/// interpolant of the stepped solution, integrated exactly in time. E may be
/// null, meaning all of (t1, t2).
double observed_l1(const Model& model, const Trajectory& traj, const BoxUnion& D, const TimeSet* E, double t1,
                   double t2);

struct SlabReport {
    double t1 = 0.0;
    double t2 = 0.0;
    double n1 = 0.0;   // |phi(t1)|
    double n2 = 0.0;   // |phi(t2)|
    double obs = 0.0;  // int chi_E |phi|_{L1(D_t)}
    double e_fraction = 0.0;
    double calibration = 0.0;
    double delta = 8.0;
    double h_emp = 0.0;
    bool h_in_unit = false;
    bool degenerate = false;
};

/// Solves N2 = Obs^h (e^{K/(t2-t1)^delta} N1)^{1-h} for h. t1 and t2 must be
/// time-grid nodes and |E cap (t1,t2)| >= eta (t2 - t1).
SlabReport slab_interpolation_report(const Model& model, const ModeCoeffs& phi0, double t1, double t2,
                                     const TimeSet& E, const BoxUnion& D, double calibration, double eta = 0.1,
                                     double delta = 8.0);

struct MeasurableOptions {
    int family_size = 20;
    int low_modes = 4;        // lowest eigenfunctions at the head of the family
    std::uint64_t seed = 0;
    double q_constant = 1.0;  // C in choose_q
    double q_exponent = 0.5;  // h in choose_q
    int m_max = 40;
};

struct MeasurableDatum {
    int index = 0;
    std::string kind;  // "eigen" or "random"
    double terminal_norm = 0.0;
    double observation = 0.0;  // int_D |phi|
    double rho = 0.0;
    bool excluded = false;
};

struct MeasurableReport {
    TimeSliceSet slices;
    double ell = 0.0;
    double q = 0.0;
    DensitySequence sequence;
    std::vector<MeasurableDatum> data;
    double rho_max = 0.0;
    int excluded = 0;
};

/// Family of unit-norm data: the lowest eigenfunctions, then seeded Gaussian
/// mode coefficients.
std::vector<ModeCoeffs> measurable_family(const Model& model, const MeasurableOptions& options);

/// rho = |phi(T)| / int_D |phi| for each datum of the family under free
/// evolution; rho_max over the non-excluded data.
MeasurableReport measurable_observability_ratio(const Model& model, const BoxUnion& D, const Cylinder& omega,
                                                const MeasurableOptions& options = {});
MeasurableReport measurable_observability_ratio(const Model& model, const std::vector<ModeCoeffs>& family,
                                                const BoxUnion& D, const Cylinder& omega,
                                                const MeasurableOptions& options = {});

}  // namespace degenctrl
