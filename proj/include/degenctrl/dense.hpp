#pragma once

// Small dense linear algebra: row-major matrices, LU and Cholesky solves,
// and the cyclic Jacobi eigensolver for symmetric matrices. Templated on the
// scalar so that ill-conditioned Gram matrices can run in extended precision.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "degenctrl/error.hpp"

namespace degenctrl::dense {

template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T(0))
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

template <typename T>
std::vector<T> multiply(const Matrix<T>& a, const std::vector<T>& x) {
    std::vector<T> y(a.rows(), T(0));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        T acc(0);
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

/// Solves a x = b by Gaussian elimination with partial pivoting.
template <typename T>
std::vector<T> lu_solve(Matrix<T> a, std::vector<T> b) {
    using std::abs;
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw DimensionMismatch("lu_solve: shape mismatch");
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (abs(a(i, k)) > abs(a(piv, k))) piv = i;
        if (a(piv, k) == T(0)) throw InvariantViolation("lu_solve: singular matrix");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const T f = a(i, k) / a(k, k);
            if (f == T(0)) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    std::vector<T> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        T acc = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) acc -= a(ii, j) * x[j];
        x[ii] = acc / a(ii, ii);
    }
    return x;
}

/// Lower Cholesky factor L with a = L L^T. Returns false when a pivot is not
/// positive (matrix numerically not positive definite).
template <typename T>
bool cholesky(const Matrix<T>& a, Matrix<T>& l) {
    using std::sqrt;
    const std::size_t n = a.rows();
    l = Matrix<T>(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        T d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > T(0))) return false;
        const T ljj = sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            T s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return true;
}

/// Solves L y = b for lower-triangular L.
template <typename T>
std::vector<T> forward_substitute(const Matrix<T>& l, std::vector<T> b) {
    for (std::size_t i = 0; i < l.rows(); ++i) {
        for (std::size_t k = 0; k < i; ++k) b[i] -= l(i, k) * b[k];
        b[i] /= l(i, i);
    }
    return b;
}

/// Solves L^T x = b for lower-triangular L.
template <typename T>
std::vector<T> backward_substitute_transposed(const Matrix<T>& l, std::vector<T> b) {
    for (std::size_t ii = l.rows(); ii-- > 0;) {
        for (std::size_t k = ii + 1; k < l.rows(); ++k) b[ii] -= l(k, ii) * b[k];
        b[ii] /= l(ii, ii);
    }
    return b;
}

template <typename T>
struct SymmetricEigen {
    std::vector<T> values;  // ascending
    Matrix<T> vectors;      // column k belongs to values[k]
    int sweeps = 0;
};

/// Cyclic Jacobi rotations on a symmetric matrix. Eigenvalues come back in
/// ascending order; ties keep the original diagonal order.
template <typename T>
SymmetricEigen<T> jacobi_eigen(Matrix<T> a, int max_sweeps = 100) {
    using std::abs;
    using std::sqrt;
    const std::size_t n = a.rows();
    if (a.cols() != n) throw DimensionMismatch("jacobi_eigen: matrix not square");
    Matrix<T> v = Matrix<T>::identity(n);
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        T off(0), diag(0);
        for (std::size_t i = 0; i < n; ++i) {
            diag += a(i, i) * a(i, i);
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        }
        if (off == T(0) || off <= diag * std::numeric_limits<T>::epsilon() * std::numeric_limits<T>::epsilon())
            break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const T apq = a(p, q);
                if (apq == T(0)) continue;
                const T app = a(p, p);
                const T aqq = a(q, q);
                const T theta = (aqq - app) / (T(2) * apq);
                const T sgn = theta >= T(0) ? T(1) : T(-1);
                const T t = sgn / (abs(theta) + sqrt(theta * theta + T(1)));
                const T c = T(1) / sqrt(t * t + T(1));
                const T s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const T akp = a(k, p);
                    const T akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const T apk = a(p, k);
                    const T aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = T(0);
                a(q, p) = T(0);
                for (std::size_t k = 0; k < n; ++k) {
                    const T vkp = v(k, p);
                    const T vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (sweep == max_sweeps) throw ConvergenceError("jacobi_eigen: sweep limit reached");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    SymmetricEigen<T> out;
    out.values.resize(n);
    out.vectors = Matrix<T>(n, n);
    out.sweeps = sweep;
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

}  // namespace degenctrl::dense
