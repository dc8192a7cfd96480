#include "degenctrl/spectral_obs.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <map>
#include <numeric>

#include "degenctrl/error.hpp"
#include "degenctrl/radial_spectral.hpp"

namespace degenctrl {

namespace {

using mp = boost::multiprecision::cpp_bin_float_50;

template <typename T>
T norm_factor(ModeIndex m) {
    using std::sqrt;
    const T pi = boost::math::constants::pi<T>();
    return m.parity == Parity::Cos && m.n == 0 ? T(1) / sqrt(2 * pi) : T(1) / sqrt(pi);
}

// integral of cos(k t) and sin(k t) over (c, d)
template <typename T>
T cos_integral(int k, const T& c, const T& d) {
    using std::sin;
    if (k == 0) return d - c;
    return (sin(T(k) * d) - sin(T(k) * c)) / T(k);
}

template <typename T>
T sin_integral(int k, const T& c, const T& d) {
    using std::cos;
    if (k == 0) return T(0);
    return (cos(T(k) * c) - cos(T(k) * d)) / T(k);
}

template <typename T>
T overlap(ModeIndex m, ModeIndex k, const T& c, const T& d) {
    const int a = m.n;
    const int b = k.n;
    T val;
    if (m.parity == Parity::Cos && k.parity == Parity::Cos)
        val = (cos_integral<T>(a - b, c, d) + cos_integral<T>(a + b, c, d)) / 2;
    else if (m.parity == Parity::Sin && k.parity == Parity::Sin)
        val = (cos_integral<T>(a - b, c, d) - cos_integral<T>(a + b, c, d)) / 2;
    else if (m.parity == Parity::Cos)  // cos(a t) sin(b t)
        val = (sin_integral<T>(b + a, c, d) + sin_integral<T>(b - a, c, d)) / 2;
    else  // sin(a t) cos(b t)
        val = (sin_integral<T>(a + b, c, d) + sin_integral<T>(a - b, c, d)) / 2;
    return val * norm_factor<T>(m) * norm_factor<T>(k);
}

void check_interval(double c, double d) {
    if (!(d > c) || !(d - c < 2.0 * std::numbers::pi + 1e-15) || c < -1e-15 || d > 2.0 * std::numbers::pi + 1e-12)
        throw InvalidArgument("angular interval must be a non-empty subinterval of [0, 2pi]");
}

struct GeneralizedMax {
    double log_value = 0.0;
    std::vector<double> x;
    std::size_t live = 0;
    std::size_t dropped = 0;
    double residual = 0.0;
    double rayleigh = 0.0;
    bool singular = false;
    std::string diagnostic;
};

// Largest eigenvalue of A x = C B x for diagonal A = exp(log_a) and symmetric
// PSD B. Directions whose terminal weight is negligible are eliminated by a
// Schur complement (their best choice minimizes x^T B x), so the result stays
// well defined when B is nearly singular on them.
template <typename R>
GeneralizedMax generalized_max(const std::vector<double>& log_a, const dense::Matrix<R>& b) {
    using std::exp;
    using std::log;
    using std::sqrt;
    constexpr double kDeadLog = -46.0;  // weight below 1e-20 of the largest
    const R drop_tol = R(1e-40);

    const std::size_t n = log_a.size();
    const double shift = *std::max_element(log_a.begin(), log_a.end());
    std::vector<std::size_t> dead, live;
    for (std::size_t i = 0; i < n; ++i) (log_a[i] - shift < kDeadLog ? dead : live).push_back(i);

    GeneralizedMax out;
    out.live = live.size();

    // Pivoted Cholesky of B_DD with physical row/column swaps, dropping
    // numerically dependent columns. perm[i] indexes into `dead`.
    const std::size_t nd = dead.size();
    dense::Matrix<R> work(nd, nd);
    for (std::size_t i = 0; i < nd; ++i)
        for (std::size_t j = 0; j <= i; ++j) work(i, j) = b(dead[i], dead[j]);
    std::vector<std::size_t> perm(nd);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    R max_diag = 0;
    for (std::size_t i = 0; i < nd; ++i)
        if (work(i, i) > max_diag) max_diag = work(i, i);
    auto sym = [&](std::size_t i, std::size_t j) -> R& { return i >= j ? work(i, j) : work(j, i); };
    std::vector<R> col(nd);
    std::size_t rank = 0;
    for (; rank < nd; ++rank) {
        std::size_t piv = rank;
        for (std::size_t i = rank + 1; i < nd; ++i)
            if (work(i, i) > work(piv, piv)) piv = i;
        if (piv != rank) {
            std::swap(perm[rank], perm[piv]);
            for (std::size_t k = 0; k < rank; ++k) std::swap(work(rank, k), work(piv, k));
            for (std::size_t i = rank + 1; i < nd; ++i)
                if (i != piv) std::swap(sym(i, rank), sym(i, piv));
            std::swap(work(rank, rank), work(piv, piv));
        }
        const R d = work(rank, rank);
        if (!(d > drop_tol * max_diag)) break;
        const R l = sqrt(d);
        work(rank, rank) = l;
        for (std::size_t i = rank + 1; i < nd; ++i) {
            work(i, rank) /= l;
            col[i] = work(i, rank);
        }
        for (std::size_t i = rank + 1; i < nd; ++i) {
            const R li = col[i];
            R* rowi = &work(i, 0);
            for (std::size_t j = rank + 1; j <= i; ++j) rowi[j] -= li * col[j];
        }
    }
    out.dropped = nd - rank;
    auto lower = [&](std::size_t i, std::size_t k) -> const R& { return work(i, k); };

    // W = L^{-1} B_{K,L}
    const std::size_t nl = live.size();
    dense::Matrix<R> w(rank, nl);
    for (std::size_t c = 0; c < nl; ++c) {
        for (std::size_t i = 0; i < rank; ++i) {
            R acc = b(dead[perm[i]], live[c]);
            for (std::size_t k = 0; k < i; ++k) acc -= lower(i, k) * w(k, c);
            w(i, c) = acc / lower(i, i);
        }
    }
    dense::Matrix<R> schur(nl, nl);
    for (std::size_t i = 0; i < nl; ++i)
        for (std::size_t j = 0; j < nl; ++j) {
            R acc = b(live[i], live[j]);
            for (std::size_t k = 0; k < rank; ++k) acc -= w(k, i) * w(k, j);
            schur(i, j) = acc;
        }
    dense::Matrix<R> rs;
    if (!dense::cholesky(schur, rs)) {
        out.singular = true;
        out.diagnostic = "B numerically singular on the observed directions";
        return out;
    }

    // M = R^{-1} diag(a_L) R^{-T}
    std::vector<R> a_live(nl);
    for (std::size_t i = 0; i < nl; ++i) a_live[i] = exp(R(log_a[live[i]] - shift));
    dense::Matrix<R> rinv(nl, nl);
    for (std::size_t c = 0; c < nl; ++c) {
        std::vector<R> e(nl, 0);
        e[c] = 1;
        const auto col = dense::forward_substitute(rs, e);
        for (std::size_t i = 0; i < nl; ++i) rinv(i, c) = col[i];
    }
    dense::Matrix<R> m(nl, nl);
    for (std::size_t i = 0; i < nl; ++i)
        for (std::size_t j = 0; j < nl; ++j) {
            R acc = 0;
            for (std::size_t k = 0; k < nl; ++k) acc += rinv(i, k) * a_live[k] * rinv(j, k);
            m(i, j) = acc;
        }
    const auto eig = dense::jacobi_eigen(m);
    const R mu = eig.values.back();
    std::vector<R> z(nl);
    for (std::size_t i = 0; i < nl; ++i) z[i] = eig.vectors(i, nl - 1);
    const std::vector<R> x_live = dense::backward_substitute_transposed(rs, z);

    // x_K = -L^{-T} W x_L
    std::vector<R> wx(rank, 0);
    for (std::size_t i = 0; i < rank; ++i)
        for (std::size_t c = 0; c < nl; ++c) wx[i] += w(i, c) * x_live[c];
    std::vector<R> x_kept(rank);
    for (std::size_t ii = rank; ii-- > 0;) {
        R acc = -wx[ii];
        for (std::size_t k = ii + 1; k < rank; ++k) acc -= lower(k, ii) * x_kept[k];
        x_kept[ii] = acc / lower(ii, ii);
    }

    std::vector<R> x(n, 0);
    for (std::size_t i = 0; i < nl; ++i) x[live[i]] = x_live[i];
    for (std::size_t i = 0; i < rank; ++i) x[dead[perm[i]]] = x_kept[i];
    R nrm = 0;
    for (R v : x) nrm += v * v;
    nrm = sqrt(nrm);
    for (R& v : x) v /= nrm;

    // residual of the scaled problem exp(log_a - shift) x = mu B x
    std::vector<R> bx(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) bx[i] += b(i, j) * x[j];
    R res = 0, bnorm = 0, xax = 0, xbx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const R ai = exp(R(log_a[i] - shift));
        const R r = ai * x[i] - mu * bx[i];
        res += r * r;
        bnorm += bx[i] * bx[i];
        xax += ai * x[i] * x[i];
        xbx += x[i] * bx[i];
    }
    out.residual = static_cast<double>(sqrt(res) / (mu * sqrt(bnorm)));
    out.rayleigh = static_cast<double>((xax / xbx) / mu);
    out.log_value = static_cast<double>(log(mu)) + shift;
    out.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.x[i] = static_cast<double>(x[i]);
    return out;
}

mp time_integral(const mp& rate, double horizon) { return -boost::multiprecision::expm1(-rate * horizon) / rate; }

ObservabilityEstimate assemble_estimate(const Model& model, const std::vector<ModeIndex>& modes, double c, double d,
                                        double a, double b, int k_max) {
    if (!(a >= 0.0 && a < b && b <= 1.0)) throw InvalidArgument("observability: need 0 <= a < b <= 1");
    if (k_max < 1 || static_cast<std::size_t>(k_max) > model.n_radial())
        throw InvalidArgument("observability: k_max out of range");
    const auto op = assemble_radial_operator(model.alpha(), model.grid());
    const auto spec = radial_spectrum(op, static_cast<std::size_t>(k_max));
    const auto& grid = model.grid();
    const double horizon = model.horizon();

    // B is the Gram matrix of the basis space-time functions on the patch; it
    // is formed in 50-digit arithmetic so that it stays positive semidefinite
    // well below double rounding, where the extremal directions live.
    std::vector<std::vector<mp>> vec(k_max);
    for (int j = 0; j < k_max; ++j)
        for (std::size_t i = 0; i < grid.size(); ++i)
            vec[j].push_back(grid.nodes[i] > a && grid.nodes[i] < b ? mp(spec.vectors[j][i]) : mp(0));
    dense::Matrix<mp> radial(k_max, k_max);
    for (int j = 0; j < k_max; ++j)
        for (int k = 0; k <= j; ++k) {
            mp acc = 0;
            for (std::size_t i = 0; i < grid.size(); ++i)
                if (vec[j][i] != 0) acc += mp(grid.mass[i]) * vec[j][i] * vec[k][i];
            radial(j, k) = radial(k, j) = acc;
        }
    const std::size_t nm = modes.size();
    dense::Matrix<mp> angular(nm, nm);
    const mp cm(c), dm(d);
    for (std::size_t p = 0; p < nm; ++p)
        for (std::size_t q = 0; q <= p; ++q) angular(p, q) = angular(q, p) = overlap<mp>(modes[p], modes[q], cm, dm);

    ObservabilityEstimate est;
    est.patch = Patch{c, d, a, b};
    const std::size_t dim = nm * static_cast<std::size_t>(k_max);
    est.basis_dim = dim;
    std::vector<double> log_a(dim);
    dense::Matrix<mp> bm(dim, dim);
    // time integrals depend on (n_p^2 + n_q^2, j, k) only
    std::map<int, dense::Matrix<mp>> time_cache;
    auto time_factor = [&](int np, int nq, int j, int k) -> const mp& {
        const int n2 = np * np + nq * nq;
        auto it = time_cache.find(n2);
        if (it == time_cache.end()) {
            dense::Matrix<mp> t(k_max, k_max);
            for (int jj = 0; jj < k_max; ++jj)
                for (int kk = 0; kk <= jj; ++kk)
                    t(jj, kk) = t(kk, jj) = time_integral(mp(spec.values[jj]) + mp(spec.values[kk]) + n2, horizon);
            it = time_cache.emplace(n2, std::move(t)).first;
        }
        return it->second(j, k);
    };
    for (std::size_t p = 0; p < nm; ++p) {
        const double n2p = static_cast<double>(modes[p].n) * modes[p].n;
        for (int j = 0; j < k_max; ++j) {
            const std::size_t row = p * k_max + j;
            est.basis_modes.push_back(modes[p]);
            est.basis_radial.push_back(j + 1);
            log_a[row] = -2.0 * (spec.values[j] + n2p) * horizon;
            for (std::size_t q = 0; q < nm; ++q) {
                for (int k = 0; k < k_max; ++k) {
                    const mp g = angular(p, q) * radial(j, k);
                    if (g != 0) bm(row, q * k_max + k) = g * time_factor(modes[p].n, modes[q].n, j, k);
                }
            }
        }
    }
    const auto gm = generalized_max(log_a, bm);
    est.live_dim = gm.live;
    est.dropped = gm.dropped;
    est.singular = gm.singular;
    est.diagnostic = gm.diagnostic;
    if (gm.singular) return est;
    est.log_c_emp = gm.log_value;
    est.c_emp = std::exp(gm.log_value);
    est.residual = gm.residual;
    est.rayleigh = gm.rayleigh;
    est.coefficients = gm.x;
    return est;
}

}  // namespace

double angular_overlap(ModeIndex m, ModeIndex k, double c, double d) { return overlap<double>(m, k, c, d); }

std::vector<ModeIndex> torus_basis(int K) {
    std::vector<ModeIndex> out;
    for (int n = 0; n <= K; ++n) out.push_back({Parity::Cos, n});
    for (int n = 1; n <= K; ++n) out.push_back({Parity::Sin, n});
    return out;
}

TorusGram torus_smallest_gram_eigenvalue(int K, double c, double d) {
    if (K < 0) throw InvalidArgument("torus Gram: K must be >= 0");
    check_interval(c, d);
    const auto basis = torus_basis(K);
    const std::size_t n = basis.size();
    const mp cm(c), dm(d);
    dense::Matrix<mp> g(n, n);
    TorusGram out;
    out.K = K;
    out.c = c;
    out.d = d;
    out.gram = dense::Matrix<double>(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            g(i, j) = g(j, i) = overlap<mp>(basis[i], basis[j], cm, dm);
            out.gram(i, j) = out.gram(j, i) = static_cast<double>(g(i, j));
        }
    const auto eig = dense::jacobi_eigen(g, 200);
    const mp lmin = eig.values.front();
    if (!(lmin > 0)) throw InvariantViolation("torus Gram: smallest eigenvalue is not positive");
    out.lambda_min = static_cast<double>(lmin);
    out.log_lambda_min = static_cast<double>(log(lmin));
    out.c_emp = -out.log_lambda_min / std::max(K, 1);
    return out;
}

bool Patch::full_torus() const { return theta_lo <= 0.0 && theta_hi >= 2.0 * std::numbers::pi; }

ObservabilityEstimate mode_observability_constant(const Model& model, int n, double a, double b, int k_max) {
    if (n < 0) throw InvalidArgument("observability: mode frequency must be >= 0");
    auto est = assemble_estimate(model, {ModeIndex{Parity::Cos, n}}, 0.0, 2.0 * std::numbers::pi, a, b, k_max);
    est.cap_type = "mode";
    est.index = n;
    return est;
}

ObservabilityEstimate truncated_observability(const Model& model, const Patch& omega, int j, int k_max) {
    if (j < 0 || j > 20) throw InvalidArgument("observability: j out of range");
    const int cap = 1 << j;
    if (cap > model.n_theta_max()) throw InvalidArgument("observability: 2^j exceeds n_theta_max");
    check_interval(omega.theta_lo, omega.theta_hi);
    if (static_cast<std::size_t>(2 * cap + 1) * static_cast<std::size_t>(k_max) > 4096)
        throw InvalidArgument("observability: basis size over limit");
    auto est = assemble_estimate(model, torus_basis(cap), omega.theta_lo, omega.theta_hi, omega.a, omega.b, k_max);
    est.cap_type = "E_j";
    est.index = j;
    return est;
}

ModeCoeffs extremal_datum(const Model& model, const ObservabilityEstimate& est) {
    if (est.coefficients.size() != est.basis_modes.size()) throw InvalidArgument("estimate has no extremal datum");
    int k_max = 0;
    for (int k : est.basis_radial) k_max = std::max(k_max, k);
    const auto op = assemble_radial_operator(model.alpha(), model.grid());
    const auto spec = radial_spectrum(op, static_cast<std::size_t>(k_max));
    ModeCoeffs out(model);
    for (std::size_t i = 0; i < est.coefficients.size(); ++i) {
        auto dst = out.mode(est.basis_modes[i]);
        const auto& v = spec.vectors[est.basis_radial[i] - 1];
        for (std::size_t r = 0; r < dst.size(); ++r) dst[r] += est.coefficients[i] * v[r];
    }
    return out;
}

}  // namespace degenctrl
