#include "degenctrl/radial_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "degenctrl/error.hpp"

namespace degenctrl {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha out of range (0,1)");
}

// Tridiagonal (B - shift I) x = b with partial pivoting; B symmetric given
// by diagonal d and off-diagonal e.
std::vector<double> shifted_tridiagonal_solve(const std::vector<double>& d, const std::vector<double>& e,
                                              double shift, std::vector<double> b) {
    const std::size_t n = d.size();
    // rows hold (l, c, u, u2) after elimination; start with the band.
    std::vector<double> lower(n, 0.0), main(n), upper(n, 0.0), upper2(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        main[i] = d[i] - shift;
        if (i + 1 < n) upper[i] = e[i];
        if (i > 0) lower[i] = e[i - 1];
    }
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        // candidate pivot rows: i (main[i], upper[i], upper2[i]) and i+1 (lower[i+1], main[i+1], upper[i+1])
        if (std::abs(lower[i + 1]) > std::abs(main[i])) {
            std::swap(main[i], lower[i + 1]);
            std::swap(upper[i], main[i + 1]);
            std::swap(upper2[i], upper[i + 1]);
            std::swap(b[i], b[i + 1]);
        }
        if (main[i] == 0.0) main[i] = tiny;
        const double f = lower[i + 1] / main[i];
        lower[i + 1] = 0.0;
        main[i + 1] -= f * upper[i];
        upper[i + 1] -= f * upper2[i];
        b[i + 1] -= f * b[i];
    }
    if (main[n - 1] == 0.0) main[n - 1] = tiny;
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double acc = b[ii];
        if (ii + 1 < n) acc -= upper[ii] * x[ii + 1];
        if (ii + 2 < n) acc -= upper2[ii] * x[ii + 2];
        x[ii] = acc / main[ii];
    }
    return x;
}

std::size_t sturm_count(const std::vector<double>& d, const std::vector<double>& e2, double x) {
    std::size_t count = 0;
    double q = 1.0;
    const double tiny = std::numeric_limits<double>::min();
    for (std::size_t i = 0; i < d.size(); ++i) {
        q = d[i] - x - (i > 0 ? e2[i - 1] / q : 0.0);
        if (q == 0.0) q = -tiny;
        if (q < 0.0) ++count;
    }
    return count;
}

struct SymTridiag {
    std::vector<double> d, e, e2;
    double lo = 0.0, hi = 0.0;  // Gershgorin enclosure
};

SymTridiag make_symmetric(const RadialOperator& op) {
    SymTridiag t;
    t.d = op.symmetric_diag();
    t.e = op.symmetric_offdiag();
    t.e2.resize(t.e.size());
    for (std::size_t i = 0; i < t.e.size(); ++i) t.e2[i] = t.e[i] * t.e[i];
    t.lo = std::numeric_limits<double>::max();
    t.hi = -t.lo;
    for (std::size_t i = 0; i < t.d.size(); ++i) {
        const double r = (i > 0 ? std::abs(t.e[i - 1]) : 0.0) + (i < t.e.size() ? std::abs(t.e[i]) : 0.0);
        t.lo = std::min(t.lo, t.d[i] - r);
        t.hi = std::max(t.hi, t.d[i] + r);
    }
    return t;
}

// k-th (0-based) eigenvalue by Sturm bisection.
double bisect_eigenvalue(const SymTridiag& t, std::size_t k) {
    double lo = t.lo, hi = t.hi;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) return mid;
        if (hi - lo <= 2.0 * eps * std::max(std::abs(lo), std::abs(hi))) return mid;
        if (sturm_count(t.d, t.e2, mid) > k) hi = mid;
        else lo = mid;
    }
    throw ConvergenceError("radial_spectrum: bisection did not converge for eigenvalue index " +
                           std::to_string(k + 1));
}

}  // namespace

// ---- operator ---------------------------------------------------------------

std::vector<double> RadialOperator::symmetric_diag() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = diag[i] / mass[i];
    return out;
}

std::vector<double> RadialOperator::symmetric_offdiag() const {
    std::vector<double> out(offdiag.size());
    for (std::size_t i = 0; i < offdiag.size(); ++i) out[i] = offdiag[i] / std::sqrt(mass[i] * mass[i + 1]);
    return out;
}

void RadialOperator::apply_stiffness(std::span<const double> u, std::span<double> y) const {
    const std::size_t n = size();
    if (u.size() != n || y.size() != n) throw DimensionMismatch("radial operator: vector length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        double acc = diag[i] * u[i];
        if (i > 0) acc += offdiag[i - 1] * u[i - 1];
        if (i + 1 < n) acc += offdiag[i] * u[i + 1];
        y[i] = acc;
    }
}

std::vector<double> RadialOperator::apply(std::span<const double> u) const {
    std::vector<double> y(size());
    apply_stiffness(u, y);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] /= mass[i];
    return y;
}

double RadialOperator::energy(std::span<const double> u) const {
    if (u.size() != size()) throw DimensionMismatch("radial operator: vector length mismatch");
    double acc = 0.0;
    const std::size_t n = size();
    for (std::size_t h = 0; h <= n; ++h) {
        const double left = h == 0 ? 0.0 : u[h - 1];
        const double right = h == n ? 0.0 : u[h];
        const double du = right - left;
        acc += grid.half_weights[h] * du * du / grid.widths[h];
    }
    return acc;
}

RadialOperator assemble_radial_operator(double alpha, const RadialGrid& grid) {
    check_alpha(alpha);
    if (grid.nodes.empty()) throw InvalidArgument("radial grid has no interior nodes");
    RadialOperator op;
    op.alpha = alpha;
    op.grid = grid;
    if (grid.alpha != alpha) {
        for (std::size_t h = 0; h < op.grid.half_nodes.size(); ++h)
            op.grid.half_weights[h] = face_weight(op.grid.edges[h], op.grid.edges[h + 1], alpha);
        op.grid.alpha = alpha;
    }
    const std::size_t n = grid.size();
    op.diag.resize(n);
    op.offdiag.resize(n - 1);
    op.mass = grid.mass;
    for (std::size_t i = 0; i < n; ++i) {
        // node i sits between half cells i (left) and i+1 (right)
        const double left = op.grid.half_weights[i] / grid.widths[i];
        const double right = op.grid.half_weights[i + 1] / grid.widths[i + 1];
        op.diag[i] = left + right;
        if (i + 1 < n) op.offdiag[i] = -right;
    }
    return op;
}

// ---- spectrum ---------------------------------------------------------------

std::size_t count_eigenvalues_below(const RadialOperator& op, double x) {
    const SymTridiag t = make_symmetric(op);
    return sturm_count(t.d, t.e2, x);
}

std::vector<double> radial_eigenvalues(const RadialOperator& op, std::size_t k) {
    if (k > op.size()) throw InvalidArgument("radial_spectrum: k exceeds the number of interior nodes");
    const SymTridiag t = make_symmetric(op);
    std::vector<double> values(k);
    for (std::size_t j = 0; j < k; ++j) values[j] = bisect_eigenvalue(t, j);
    return values;
}

RadialSpectrum radial_spectrum(const RadialOperator& op, std::size_t k) {
    if (k > op.size()) throw InvalidArgument("radial_spectrum: k exceeds the number of interior nodes");
    const SymTridiag t = make_symmetric(op);
    const std::size_t n = op.size();
    RadialSpectrum spec;
    spec.alpha = op.alpha;
    spec.grid = op.grid;
    spec.values.resize(k);
    spec.vectors.resize(k);
    std::vector<std::vector<double>> ys;  // eigenvectors of the symmetric form
    ys.reserve(k);
    const double scale = std::max(std::abs(t.lo), std::abs(t.hi));
    for (std::size_t j = 0; j < k; ++j) {
        const double lambda = bisect_eigenvalue(t, j);
        // inverse iteration from a fixed, non-symmetric start vector
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = 1.0 + 0.5 * std::sin(1.3 * static_cast<double>(i) + 0.7 * j);
        const double shift = lambda + 4.0 * std::numeric_limits<double>::epsilon() * scale;
        for (int it = 0; it < 4; ++it) {
            y = shifted_tridiagonal_solve(t.d, t.e, shift, std::move(y));
            // clustered neighbours: keep the new vector orthogonal to them
            for (std::size_t p = 0; p < j; ++p) {
                if (std::abs(spec.values[p] - lambda) > 1e-6 * std::max(1.0, std::abs(lambda))) continue;
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += ys[p][i] * y[i];
                for (std::size_t i = 0; i < n; ++i) y[i] -= dot * ys[p][i];
            }
            double nrm = 0.0;
            for (double v : y) nrm += v * v;
            nrm = std::sqrt(nrm);
            if (!(nrm > 0.0) || !std::isfinite(nrm))
                throw ConvergenceError("radial_spectrum: inverse iteration failed for eigenvalue index " +
                                       std::to_string(j + 1));
            for (double& v : y) v /= nrm;
        }
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = y[i] / std::sqrt(op.mass[i]);
        if (v[0] < 0.0) {
            for (double& x : v) x = -x;
            for (double& x : y) x = -x;
        }
        spec.values[j] = lambda;
        spec.vectors[j] = std::move(v);
        ys.push_back(std::move(y));
    }
    return spec;
}

// ---- Bessel oracle ----------------------------------------------------------

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

constexpr double kSeriesLimit = 40.0;

double bessel_j_series(double nu, double x) {
    const Big half = Big(x) / 2;
    const Big q = half * half;
    Big term = pow(half, Big(nu)) / boost::multiprecision::tgamma(Big(nu) + 1);
    Big sum = term;
    for (int m = 0; m < 400; ++m) {
        term *= -q / (Big(m + 1) * (Big(m + 1) + Big(nu)));
        sum += term;
        if (abs(term) < abs(sum) * Big("1e-45") && m > static_cast<int>(x)) break;
    }
    return static_cast<double>(sum);
}

double bessel_j_asymptotic(double nu, double x) {
    // Hankel expansion: J = sqrt(2/(pi x)) (P cos chi - Q sin chi)
    using Real = long double;
    const Real mu = 4.0L * nu * nu;
    const Real xx = x;
    Real p = 1.0L, q = 0.0L;
    Real term = 1.0L;
    Real last = std::numeric_limits<Real>::max();
    for (int k = 1; k < 200; ++k) {
        const Real odd = 2.0L * k - 1.0L;
        term *= (mu - odd * odd) / (static_cast<Real>(k) * 8.0L * xx);
        if (std::abs(term) > last) break;  // asymptotic series starts to diverge
        last = std::abs(term);
        // k odd -> Q, k even -> P with alternating signs
        if (k % 2 == 1) q += ((k / 2) % 2 == 0 ? term : -term);
        else p += ((k / 2) % 2 == 0 ? term : -term);
        if (last < 1e-22L) break;
    }
    const Real chi = xx - (0.5L * nu + 0.25L) * std::numbers::pi_v<long double>;
    const Real pref = std::sqrt(2.0L / (std::numbers::pi_v<long double> * xx));
    return static_cast<double>(pref * (p * std::cos(chi) - q * std::sin(chi)));
}

}  // namespace

double bessel_j(double nu, double x) {
    if (nu < 0.0) throw InvalidArgument("bessel_j: order must be >= 0");
    if (x < 0.0) throw InvalidArgument("bessel_j: argument must be >= 0");
    if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    return x <= kSeriesLimit ? bessel_j_series(nu, x) : bessel_j_asymptotic(nu, x);
}

double bessel_zero(double nu, int k) {
    if (k < 1) throw InvalidArgument("bessel_zero: k must be >= 1");
    // McMahon estimate brackets the k-th zero within a quarter period for nu <= 1/2;
    // scan outward in steps of 0.2 to find a sign change, then refine.
    const double beta = (k + 0.5 * nu - 0.25) * std::numbers::pi;
    const double guess = beta - (4.0 * nu * nu - 1.0) / (8.0 * beta);
    double lo = std::max(1e-3, guess - 1.0);
    double flo = bessel_j(nu, lo);
    double hi = lo;
    double fhi = flo;
    bool found = false;
    for (int step = 0; step < 20; ++step) {
        hi = lo + 0.2;
        fhi = bessel_j(nu, hi);
        if ((flo > 0.0) != (fhi > 0.0)) {
            found = true;
            break;
        }
        lo = hi;
        flo = fhi;
    }
    if (!found) throw ConvergenceError("bessel_zero: failed to bracket zero k=" + std::to_string(k));
    // bisection down to a narrow bracket, then Newton with J' = (nu/x) J - J_{nu+1}
    for (int it = 0; it < 30; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = bessel_j(nu, mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 20; ++it) {
        const double f = bessel_j(nu, x);
        if (f == 0.0) break;
        const double df = (nu / x) * f - bessel_j(nu + 1.0, x);
        double next = x - f / df;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if ((f > 0.0) == (flo > 0.0)) lo = x;
        else hi = x;
        if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * x) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

std::vector<double> bessel_oracle(double alpha, int count) {
    check_alpha(alpha);
    if (count < 1) throw InvalidArgument("bessel_oracle: count must be >= 1");
    const double kappa = (2.0 - alpha) / 2.0;
    const double nu = (1.0 - alpha) / (2.0 - alpha);
    std::vector<double> out(count);
    for (int k = 1; k <= count; ++k) {
        const double j = bessel_zero(nu, k);
        if (std::abs(bessel_j(nu, j)) > 1e-12)
            throw ConvergenceError("bessel_oracle: zero residual too large for k=" + std::to_string(k));
        out[k - 1] = kappa * kappa * j * j;
    }
    return out;
}

// ---- Hardy ------------------------------------------------------------------

double hardy_constant(double alpha) {
    check_alpha(alpha);
    const double beta = 0.5 * (1.0 + alpha);
    return 1.0 / ((1.0 - beta) * (beta - alpha));
}

HardyReport hardy_ratio_with_ends(std::span<const double> u, double alpha, const RadialGrid& grid,
                                  std::string label) {
    check_alpha(alpha);
    if (u.size() != grid.edges.size()) throw DimensionMismatch("hardy_ratio: sample count does not match grid");
    const double scale = std::max(1.0, *std::max_element(u.begin(), u.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
    }));
    if (std::abs(u.front()) > 1e-12 * scale || std::abs(u.back()) > 1e-12 * scale)
        throw InvalidArgument("hardy_ratio: u must vanish at both ends");
    HardyReport rep;
    rep.alpha = alpha;
    rep.label = std::move(label);
    rep.constant = hardy_constant(alpha);
    for (std::size_t h = 0; h + 1 < u.size(); ++h) {
        const double width = grid.widths[h];
        const double rm = grid.half_nodes[h];
        const double left = h == 0 ? 0.0 : u[h];
        const double right = h + 2 == u.size() ? 0.0 : u[h + 1];
        const double um = 0.5 * (left + right);
        const double du = (right - left) / width;
        rep.left += width * std::pow(rm, alpha - 2.0) * um * um;
        rep.right += width * std::pow(rm, alpha) * du * du;
    }
    if (!(rep.right > 0.0)) throw InvalidArgument("hardy_ratio: zero denominator");
    rep.ratio = rep.left / rep.right;
    rep.exceeds = rep.ratio > rep.constant;
    return rep;
}

HardyReport hardy_ratio(std::span<const double> u, double alpha, const RadialGrid& grid, std::string label) {
    if (u.size() != grid.size()) throw DimensionMismatch("hardy_ratio: sample count does not match grid");
    std::vector<double> full(grid.edges.size(), 0.0);
    std::copy(u.begin(), u.end(), full.begin() + 1);
    return hardy_ratio_with_ends(full, alpha, grid, std::move(label));
}

}  // namespace degenctrl
