#include "degenctrl/measurable_obs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "degenctrl/error.hpp"
#include "degenctrl/parallel.hpp"
#include "degenctrl/radial_spectral.hpp"

namespace degenctrl {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct EigenPair {
    std::size_t slot = 0;
    ModeIndex mode;
    std::size_t k = 0;  // 0-based radial index
    double lambda = 0.0;
};

/// 2D eigenpairs from a radial spectrum, ordered by (lambda, n, k, parity).
std::vector<EigenPair> eigen_pairs(const Model& model, const RadialSpectrum& spec) {
    ModeCoeffs shape(model);
    std::vector<EigenPair> pairs;
    for (std::size_t s = 0; s < shape.mode_count(); ++s) {
        const ModeIndex m = shape.mode_at(s);
        for (std::size_t k = 0; k < spec.size(); ++k)
            pairs.push_back({s, m, k, spec.values[k] + static_cast<double>(m.n) * m.n});
    }
    std::ranges::sort(pairs, [](const EigenPair& x, const EigenPair& y) {
        if (x.lambda != y.lambda) return x.lambda < y.lambda;
        if (x.mode.n != y.mode.n) return x.mode.n < y.mode.n;
        if (x.k != y.k) return x.k < y.k;
        return x.mode.parity < y.mode.parity;
    });
    return pairs;
}

std::size_t time_node(const Model& model, double t, const char* what) {
    const double k = std::round(t / model.dt());
    if (k < 0 || k > model.n_time() || std::abs(k * model.dt() - t) > 1e-9 * model.dt())
        throw InvalidArgument(std::string(what) + " must be a time-grid node");
    return static_cast<std::size_t>(k);
}

/// Integral over [0,1] of |a + (b - a) s|.
double abs_linear(double a, double b) {
    if (a * b >= 0.0) return 0.5 * (std::abs(a) + std::abs(b));
    return (a * a + b * b) / (2.0 * (std::abs(a) + std::abs(b)));
}

double log_sum_exp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace

TimeSet::TimeSet(std::vector<Interval> intervals, double horizon) : horizon_(horizon) {
    if (!(horizon > 0.0)) throw InvalidArgument("time set: horizon must be positive");
    std::erase_if(intervals, [](const Interval& i) { return !(i.hi > i.lo); });
    std::ranges::sort(intervals, [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    for (const auto& i : intervals) {
        if (i.lo < 0.0 || i.hi > horizon * (1 + 1e-12)) throw InvalidArgument("time set interval outside (0, T)");
        if (!intervals_.empty() && i.lo <= intervals_.back().hi)
            intervals_.back().hi = std::max(intervals_.back().hi, i.hi);
        else
            intervals_.push_back(i);
    }
}

double TimeSet::measure() const {
    double m = 0.0;
    for (const auto& i : intervals_) m += i.length();
    return m;
}

double TimeSet::measure_in(double lo, double hi) const {
    double m = 0.0;
    for (const auto& i : intervals_) m += std::max(0.0, std::min(hi, i.hi) - std::max(lo, i.lo));
    return m;
}

bool TimeSet::contains(double t) const {
    return std::ranges::any_of(intervals_, [t](const Interval& i) { return i.lo < t && t < i.hi; });
}

Interval TimeSet::largest() const {
    if (intervals_.empty()) throw InvalidArgument("time set is empty");
    Interval best = intervals_.front();
    for (const auto& i : intervals_)
        if (i.length() > best.length()) best = i;
    return best;
}

TimeSliceSet build_time_slices(const BoxUnion& D, const Cylinder& omega) {
    if (!(omega.a >= 0.0 && omega.a < omega.b && omega.b <= 1.0)) throw InvalidArgument("band must satisfy 0 <= a < b <= 1");
    for (const auto& b : D.boxes())
        if (b.r.lo < omega.a || b.r.hi > omega.b) throw InvalidArgument("box radial interval leaves the band (a,b)");
    TimeSliceSet s;
    s.d_measure = D.measure();
    if (!(s.d_measure > 0.0)) throw InvalidArgument("box union has zero measure");
    const double T = D.horizon();
    s.omega_measure = two_pi * (omega.b - omega.a);
    s.threshold = s.d_measure / (2.0 * T);
    s.e_lower_bound = s.d_measure / (2.0 * s.omega_measure);

    std::vector<double> edges = D.time_edges();
    edges.push_back(0.0);
    edges.push_back(T);
    std::ranges::sort(edges);
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::vector<Interval> heavy;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k)
        if (D.slice_measure(0.5 * (edges[k] + edges[k + 1])) >= s.threshold) heavy.push_back({edges[k], edges[k + 1]});
    s.E = TimeSet(std::move(heavy), T);
    s.e_measure = s.E.measure();
    if (s.e_measure < s.e_lower_bound * (1 - 1e-12))
        throw InvariantViolation("|E| < |D|/(2|omega|): " + std::to_string(s.e_measure));
    return s;
}

std::size_t slice_inclusion_violations(const Model& model, const BoxUnion& D, const TimeSet& E) {
    const auto th = model.theta_nodes();
    const auto& r = model.grid().nodes;
    const TimeGrid time = make_time_grid(model);
    std::size_t bad = 0;
    for (int k = 0; k < time.steps; ++k) {
        const double t = time.half_time(k);
        if (!E.contains(t)) continue;
        std::vector<std::pair<Interval, Interval>> slice;
        for (const auto& b : D.boxes())
            if (b.t.contains(t)) slice.emplace_back(b.theta, b.r);
        for (double theta : th)
            for (double rr : r) {
                const bool in_slice = std::ranges::any_of(
                    slice, [&](const auto& s) { return s.first.contains(theta) && s.second.contains(rr); });
                if (in_slice && !D.contains(theta, rr, t)) ++bad;
            }
    }
    return bad;
}

DensitySequence density_sequence(const TimeSet& E, double ell, double q, int m_max, std::optional<double> ell_1) {
    const double T = E.horizon();
    if (!(ell > 0.0 && ell < T)) throw InvalidArgument("density point must lie in (0, T)");
    if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("q must lie in (0, 1)");
    if (m_max < 2) throw InvalidArgument("m_max must be at least 2");
    if (ell_1 && !(*ell_1 > ell && *ell_1 <= T)) throw InvalidArgument("ell_1 must lie in (ell, T]");

    DensitySequence seq;
    seq.ell = ell;
    seq.q = q;
    constexpr int budget = 200;
    double A = ell_1 ? *ell_1 - ell : T - ell;
    for (int h = 0; h <= budget; ++h, A *= 0.5) {
        seq.values.assign(static_cast<std::size_t>(m_max), 0.0);
        for (int m = 0; m < m_max; ++m) seq.values[m] = ell + A * std::pow(q, m);
        seq.fractions.clear();
        bool ok = true;
        for (int m = 0; m + 1 < m_max; ++m) {
            const double hi = seq.values[m], lo = seq.values[m + 1];
            if (!(hi > lo)) {
                ok = false;
                break;
            }
            const double frac = E.measure_in(lo, hi) / (hi - lo);
            seq.fractions.push_back(frac);
            if (3.0 * E.measure_in(lo, hi) < hi - lo) ok = false;
        }
        if (ok) {
            seq.gap = A;
            seq.halvings = h;
            break;
        }
        if (ell_1 || h == budget)
            throw ConvergenceError("no density sequence: the point is not dense enough in E at resolution m_max");
    }
    for (int m = 0; m + 2 < m_max; ++m) {
        const double lhs = seq.values[m + 1] - seq.values[m + 2];
        const double rhs = q * (seq.values[m] - seq.values[m + 1]);
        seq.max_ratio_error = std::max(seq.max_ratio_error, std::abs(lhs - rhs));
    }
    seq.min_fraction = *std::ranges::min_element(seq.fractions);
    return seq;
}

double choose_q(double C, double h) {
    if (!(C >= 1.0)) throw InvalidArgument("choose_q: C must be at least 1");
    if (!(h > 0.0 && h < 1.0)) throw InvalidArgument("choose_q: h must lie in (0, 1)");
    return std::pow((C + 1.0 - h) / (C + 1.0), 0.125);
}

ExtendedField extended_field(const Model& model, const ModeCoeffs& phi0, double t, const ExtendedFieldOptions& options) {
    model.check(phi0);
    if (!(t > 0.0)) throw InvalidArgument("extended field: t must be positive");
    if (!(options.tau_max > 0.0)) throw InvalidArgument("extended field: tau_max must be positive");
    if (options.n_tau < 2 || options.n_tau % 2 != 0) throw InvalidArgument("extended field: n_tau must be even and >= 2");
    const std::size_t step = time_node(model, t, "extended field time");

    const auto op = assemble_radial_operator(model.alpha(), model.grid());
    const auto spec = radial_spectrum(op, op.size());
    auto pairs = eigen_pairs(model, spec);
    const std::size_t cap = options.cap.value_or(pairs.size());
    if (cap == 0 || cap > pairs.size()) throw InvalidArgument("extended field: cap outside the computed spectrum");
    pairs.resize(cap);

    ExtendedField f;
    f.t = t;
    f.cap = cap;
    for (const auto& p : pairs) f.lambda_max = std::max(f.lambda_max, p.lambda);
    if (std::sqrt(f.lambda_max) * options.tau_max > 700.0)
        throw InvalidArgument("extended field: sqrt(lambda_max) tau_max exceeds 700");

    std::vector<double> coef(cap);
    for (std::size_t j = 0; j < cap; ++j)
        coef[j] = radial_dot(model.grid(), spec.vectors[pairs[j].k], phi0[pairs[j].slot]);

    auto series = [&](auto weight) {
        ModeCoeffs out(model);
        for (std::size_t j = 0; j < cap; ++j) {
            const double w = coef[j] * weight(pairs[j].lambda);
            auto dst = out[pairs[j].slot];
            const auto& v = spec.vectors[pairs[j].k];
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += w * v[i];
        }
        return out;
    };

    const double dtau = 2.0 * options.tau_max / options.n_tau;
    for (int j = 0; j <= options.n_tau; ++j) {
        const double tau = j == options.n_tau / 2 ? 0.0 : -options.tau_max + j * dtau;
        f.taus.push_back(tau);
        f.samples.push_back(series([&](double lam) { return std::exp(-lam * t + std::sqrt(lam) * tau); }));
        f.norms.push_back(mode_norm(model, f.samples.back()));
    }

    const auto stepped = solve_forward(model, phi0).snapshot(step);
    const double dt = model.dt();
    const auto cn = series([&](double lam) {
        return std::pow((1.0 - 0.5 * dt * lam) / (1.0 + 0.5 * dt * lam), static_cast<double>(step));
    });
    const double ref = std::max(mode_norm(model, stepped), std::numeric_limits<double>::min());
    ModeCoeffs diff = cn;
    diff -= stepped;
    f.restriction_error = mode_norm(model, diff) / ref;
    diff = f.samples[static_cast<std::size_t>(options.n_tau / 2)];
    diff -= stepped;
    f.exact_time_gap = mode_norm(model, diff) / ref;

    for (int j = 1; j < options.n_tau; ++j) {
        if (!(f.norms[j] > 0.0)) continue;
        ModeCoeffs res(model);
        for (std::size_t s = 0; s < res.mode_count(); ++s) {
            const double n2 = static_cast<double>(res.mode_at(s).n) * res.mode_at(s).n;
            const auto u = f.samples[j][s];
            const auto ku = op.apply(u);
            auto dst = res[s];
            for (std::size_t i = 0; i < dst.size(); ++i) {
                const double dtt = (f.samples[j + 1][s][i] - 2.0 * u[i] + f.samples[j - 1][s][i]) / (dtau * dtau);
                dst[i] = dtt - ku[i] - n2 * u[i];
            }
        }
        f.elliptic_residual = std::max(f.elliptic_residual, mode_norm(model, res) / f.norms[j]);
    }
    return f;
}

DerivativeBoundReport derivative_bound_report(const Model& model, const ModeCoeffs& phi0, double t, int l_max) {
    model.check(phi0);
    if (!(t > 0.0)) throw InvalidArgument("derivative bound: t must be positive");
    if (l_max < 0) throw InvalidArgument("derivative bound: l_max must be non-negative");
    const auto op = assemble_radial_operator(model.alpha(), model.grid());
    const auto spec = radial_spectrum(op, op.size());
    const auto pairs = eigen_pairs(model, spec);

    DerivativeBoundReport rep;
    rep.t = t;
    const double log_phi0 = std::log(mode_norm(model, phi0));
    std::vector<double> log_c2(pairs.size());
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        const double c = radial_dot(model.grid(), spec.vectors[pairs[j].k], phi0[pairs[j].slot]);
        log_c2[j] = c == 0.0 ? -std::numeric_limits<double>::infinity() : 2.0 * std::log(std::abs(c));
    }
    constexpr double log_limit = 700.0;
    int l_cap = l_max;
    for (int l = 1; l <= l_max; ++l)
        if (2.0 * l * (std::log(2.0 / t) + std::log(static_cast<double>(l)) - 1.0) > log_limit) {
            l_cap = l - 1;
            rep.warning = "l_max capped at " + std::to_string(l_cap) + " to stay in double range";
            break;
        }
    rep.l_max = l_cap;
    rep.all_hold = true;
    std::vector<double> terms(pairs.size());
    for (int l = 0; l <= l_cap; ++l) {
        DerivativeBoundRow row;
        row.l = l;
        row.log_discrete_max = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < pairs.size(); ++j) {
            const double lg = std::log(pairs[j].lambda);
            row.log_discrete_max = std::max(row.log_discrete_max, 2.0 * l * lg - pairs[j].lambda * t);
            terms[j] = log_c2[j] + 2.0 * l * lg - 2.0 * pairs[j].lambda * t;
        }
        row.log_bound = l == 0 ? 0.0 : 2.0 * l * (std::log(2.0 / t) + std::log(static_cast<double>(l)) - 1.0);
        row.holds = row.log_discrete_max <= row.log_bound + 1e-12 * std::max(1.0, std::abs(row.log_bound));
        row.log_derivative_norm = 0.5 * log_sum_exp(terms);
        row.factorial_ratio =
            std::exp(row.log_derivative_norm + l * std::log(0.5 * t) - std::lgamma(l + 1.0) - log_phi0);
        if (!std::isfinite(row.factorial_ratio)) row.factorial_ratio = 0.0;
        rep.max_factorial_ratio = std::max(rep.max_factorial_ratio, row.factorial_ratio);
        rep.all_hold = rep.all_hold && row.holds && row.factorial_ratio <= 1.0 + 1e-9;
        rep.rows.push_back(row);
    }
    return rep;
}

double observed_l1(const Model& model, const Trajectory& traj, const BoxUnion& D, const TimeSet* E, double t1,
                   double t2) {
    if (!(t1 < t2)) throw InvalidArgument("observation window must have t1 < t2");
    const TimeGrid& time = traj.time;
    const double dt = time.dt();
    std::vector<double> cuts;
    for (int k = 0; k <= time.steps; ++k) cuts.push_back(time.time(k));
    for (double e : D.time_edges()) cuts.push_back(e);
    if (E)
        for (const auto& i : E->intervals()) cuts.insert(cuts.end(), {i.lo, i.hi});
    cuts.insert(cuts.end(), {t1, t2});
    std::erase_if(cuts, [&](double c) { return c < t1 || c > t2; });
    std::ranges::sort(cuts);
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const auto th = model.theta_nodes();
    const auto& grid = model.grid();
    const double wth = model.theta_weight();
    std::vector<Field2D> fields(static_cast<std::size_t>(time.steps) + 1);
    std::vector<bool> have(fields.size(), false);
    auto field = [&](std::size_t k) -> const Field2D& {
        if (!have[k]) {
            fields[k] = synthesize_field(model, traj.snapshot(k));
            have[k] = true;
        }
        return fields[k];
    };

    double total = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double u = cuts[c], v = cuts[c + 1];
        const double mid = 0.5 * (u + v);
        if (E && !E->contains(mid)) continue;
        const auto k = static_cast<std::size_t>(std::clamp(static_cast<int>(std::floor(mid / dt)), 0, time.steps - 1));
        const Field2D& f0 = field(k);
        const Field2D& f1 = field(k + 1);
        const double su = (u - time.time(static_cast<int>(k))) / dt;
        const double sv = (v - time.time(static_cast<int>(k))) / dt;
        double piece = 0.0;
        for (std::size_t q = 0; q < th.size(); ++q)
            for (std::size_t i = 0; i < grid.size(); ++i) {
                if (!D.contains(th[q], grid.nodes[i], mid)) continue;
                const double a = f0(q, i) + su * (f1(q, i) - f0(q, i));
                const double b = f0(q, i) + sv * (f1(q, i) - f0(q, i));
                piece += abs_linear(a, b) * grid.mass[i];
            }
        total += piece * wth * (v - u);
    }
    return total;
}

SlabReport slab_interpolation_report(const Model& model, const ModeCoeffs& phi0, double t1, double t2,
                                     const TimeSet& E, const BoxUnion& D, double calibration, double eta,
                                     double delta) {
    model.check(phi0);
    if (!(0.0 <= t1 && t1 < t2 && t2 <= model.horizon())) throw InvalidArgument("slab: need 0 <= t1 < t2 <= T");
    if (!(eta > 0.0 && eta < 1.0)) throw InvalidArgument("slab: eta must lie in (0, 1)");
    const std::size_t k1 = time_node(model, t1, "slab t1");
    const std::size_t k2 = time_node(model, t2, "slab t2");
    SlabReport rep;
    rep.t1 = t1;
    rep.t2 = t2;
    rep.calibration = calibration;
    rep.delta = delta;
    rep.e_fraction = E.measure_in(t1, t2) / (t2 - t1);
    if (rep.e_fraction < eta) throw InvalidArgument("slab: |E cap (t1,t2)| < eta (t2 - t1)");

    const auto traj = solve_forward(model, phi0);
    rep.n1 = mode_norm(model, traj.snapshot(k1));
    rep.n2 = mode_norm(model, traj.snapshot(k2));
    rep.obs = observed_l1(model, traj, D, &E, t1, t2);
    if (!(rep.obs > 0.0 && rep.n1 > 0.0 && rep.n2 > 0.0)) {
        rep.degenerate = true;
        return rep;
    }
    const double lam = calibration / std::pow(t2 - t1, delta) + std::log(rep.n1);
    const double denom = std::log(rep.obs) - lam;
    if (denom == 0.0) {
        rep.degenerate = true;
        return rep;
    }
    rep.h_emp = (std::log(rep.n2) - lam) / denom;
    rep.h_in_unit = rep.h_emp > 0.0 && rep.h_emp < 1.0;
    return rep;
}

std::vector<ModeCoeffs> measurable_family(const Model& model, const MeasurableOptions& options) {
    if (options.family_size < 1) throw InvalidArgument("family size must be positive");
    if (options.low_modes < 0 || options.low_modes > options.family_size)
        throw InvalidArgument("low_modes must lie in [0, family_size]");
    std::vector<ModeCoeffs> family;
    if (options.low_modes > 0) {
        const auto op = assemble_radial_operator(model.alpha(), model.grid());
        const auto spec =
            radial_spectrum(op, std::min<std::size_t>(static_cast<std::size_t>(options.low_modes), op.size()));
        const auto pairs = eigen_pairs(model, spec);
        for (int j = 0; j < options.low_modes; ++j) {
            ModeCoeffs c(model);
            std::ranges::copy(spec.vectors[pairs[j].k], c[pairs[j].slot].begin());
            family.push_back(std::move(c));
        }
    }
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> nd;
    while (static_cast<int>(family.size()) < options.family_size) {
        ModeCoeffs c(model);
        for (auto& v : c.data()) v = nd(rng);
        c *= 1.0 / mode_norm(model, c);
        family.push_back(std::move(c));
    }
    return family;
}

MeasurableReport measurable_observability_ratio(const Model& model, const BoxUnion& D, const Cylinder& omega,
                                                const MeasurableOptions& options) {
    return measurable_observability_ratio(model, measurable_family(model, options), D, omega, options);
}

MeasurableReport measurable_observability_ratio(const Model& model, const std::vector<ModeCoeffs>& family,
                                                const BoxUnion& D, const Cylinder& omega,
                                                const MeasurableOptions& options) {
    if (std::abs(D.horizon() - model.horizon()) > 1e-12 * model.horizon())
        throw InvalidArgument("box union horizon differs from the model horizon");
    MeasurableReport rep;
    rep.slices = build_time_slices(D, omega);
    const Interval big = rep.slices.E.largest();
    rep.ell = 0.5 * (big.lo + big.hi);
    rep.q = choose_q(options.q_constant, options.q_exponent);
    rep.sequence = density_sequence(rep.slices.E, rep.ell, rep.q, options.m_max);

    rep.data.resize(family.size());
    parallel_for(family.size(), [&](std::size_t j) {
        model.check(family[j]);
        MeasurableDatum& d = rep.data[j];
        d.index = static_cast<int>(j);
        d.kind = static_cast<int>(j) < options.low_modes ? "eigen" : "random";
        const auto traj = solve_forward(model, family[j]);
        d.terminal_norm = mode_norm(model, traj.final_state());
        d.observation = observed_l1(model, traj, D, nullptr, 0.0, model.horizon());
        d.excluded = !(d.observation >= 1e-300);
        d.rho = d.excluded ? 0.0 : d.terminal_norm / d.observation;
    });
    for (const auto& d : rep.data) {
        if (d.excluded)
            ++rep.excluded;
        else
            rep.rho_max = std::max(rep.rho_max, d.rho);
    }
    return rep;
}

}  // namespace degenctrl
