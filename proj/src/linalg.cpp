#include "femnn/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

namespace femnn::linalg {

namespace {

std::atomic<long> g_lu_calls{0};

template <class T>
std::vector<T> matvec_impl(const MatrixT<T>& A, const std::vector<T>& x) {
    if (A.cols != x.size())
        throw ShapeError("matvec: A.cols != x.len");
    std::vector<T> y(A.rows, T{});
    for (std::size_t i = 0; i < A.rows; ++i) {
        T acc{};
        const T* row = &A.a[i * A.cols];
        for (std::size_t j = 0; j < A.cols; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
    return y;
}

template <class T>
std::vector<T> vecmat_impl(const std::vector<T>& x, const MatrixT<T>& A) {
    if (A.rows != x.size())
        throw ShapeError("vecmat: x.len != A.rows");
    std::vector<T> y(A.cols, T{});
    for (std::size_t i = 0; i < A.rows; ++i) {
        const T* row = &A.a[i * A.cols];
        for (std::size_t j = 0; j < A.cols; ++j) y[j] += x[i] * row[j];
    }
    return y;
}

template <class T>
double norm_impl(const std::vector<T>& x) {
    double s = 0.0;
    for (const T& v : x) s += std::norm(std::complex<double>(v));
    return std::sqrt(s);
}

// Gaussian elimination with partial pivoting, in-place on copies.
template <class T>
std::vector<T> lu_solve_impl(const MatrixT<T>& A, const std::vector<T>& b) {
    g_lu_calls.fetch_add(1, std::memory_order_relaxed);
    if (A.rows != A.cols)
        throw ShapeError("lu_solve: matrix not square");
    if (A.rows != b.size())
        throw ShapeError("lu_solve: A.rows != b.len");
    const std::size_t n = A.rows;
    MatrixT<T> M = A;
    std::vector<T> x = b;
    double scale = 0.0;
    for (const T& v : M.a) scale = std::max(scale, std::abs(v));
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(M(col, col));
        for (std::size_t i = col + 1; i < n; ++i) {
            double v = std::abs(M(i, col));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best <= 1e-12 * scale || best == 0.0)
            throw SingularMatrixError("lu_solve: singular matrix (pivot underflow at column " +
                                      std::to_string(col) + ")");
        if (piv != col) {
            for (std::size_t j = col; j < n; ++j) std::swap(M(col, j), M(piv, j));
            std::swap(x[col], x[piv]);
        }
        const T d = M(col, col);
        for (std::size_t i = col + 1; i < n; ++i) {
            T f = M(i, col) / d;
            if (f == T{}) continue;
            for (std::size_t j = col + 1; j < n; ++j) M(i, j) -= f * M(col, j);
            x[i] -= f * x[col];
        }
    }
    for (std::size_t ii = n; ii-- > 0;) {
        T acc = x[ii];
        for (std::size_t j = ii + 1; j < n; ++j) acc -= M(ii, j) * x[j];
        x[ii] = acc / M(ii, ii);
    }
    return x;
}

}  // namespace

Vector matvec(const Matrix& A, const Vector& x) { return matvec_impl(A, x); }
CVector matvec(const CMatrix& A, const CVector& x) { return matvec_impl(A, x); }

Vector vecmat(const Vector& x, const Matrix& A) { return vecmat_impl(x, A); }
CVector vecmat(const CVector& x, const CMatrix& A) { return vecmat_impl(x, A); }

double euclidean_norm(const Vector& x) { return norm_impl(x); }
double euclidean_norm(const CVector& x) { return norm_impl(x); }

Matrix transpose(const Matrix& A) {
    Matrix T(A.cols, A.rows);
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
    return T;
}

bool is_factorizable(const Matrix& A) {
    if (A.rows != A.cols) return false;
    const std::size_t n = A.rows;
    Matrix M = A;
    double scale = 0.0;
    for (double v : M.a) scale = std::max(scale, std::abs(v));
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(M(col, col));
        for (std::size_t i = col + 1; i < n; ++i) {
            double v = std::abs(M(i, col));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best <= 1e-12 * scale || best == 0.0) return false;
        if (piv != col)
            for (std::size_t j = col; j < n; ++j) std::swap(M(col, j), M(piv, j));
        const double d = M(col, col);
        for (std::size_t i = col + 1; i < n; ++i) {
            const double f = M(i, col) / d;
            if (f == 0.0) continue;
            for (std::size_t j = col + 1; j < n; ++j) M(i, j) -= f * M(col, j);
        }
    }
    return true;
}

Vector lu_solve(const Matrix& A, const Vector& b) { return lu_solve_impl(A, b); }
CVector lu_solve(const CMatrix& A, const CVector& b) { return lu_solve_impl(A, b); }

double frobenius_norm(const Matrix& A) {
    double s = 0.0;
    for (double v : A.a) s += v * v;
    return std::sqrt(s);
}

long lu_solve_call_count() { return g_lu_calls.load(std::memory_order_relaxed); }
void reset_lu_solve_call_count() { g_lu_calls.store(0, std::memory_order_relaxed); }

}  // namespace femnn::linalg
