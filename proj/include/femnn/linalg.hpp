#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "femnn/errors.hpp"

namespace femnn {

using Vector = std::vector<double>;
using CVector = std::vector<std::complex<double>>;

// Row-major dense matrix. All paper systems are tiny (<= ~200 DOF), so dense
// storage everywhere; the complex variant exists only for the rotor problem.
template <class T>
struct MatrixT {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> a;

    MatrixT() = default;
    MatrixT(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), a(r * c, fill) {}

    T& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    static MatrixT identity(std::size_t n) {
        MatrixT m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }
};

using Matrix = MatrixT<double>;
using CMatrix = MatrixT<std::complex<double>>;

namespace linalg {

Vector matvec(const Matrix& A, const Vector& x);
CVector matvec(const CMatrix& A, const CVector& x);

// result[j] = sum_i x[i] * A[i][j]   (row vector times matrix, i.e. r^T K)
Vector vecmat(const Vector& x, const Matrix& A);
CVector vecmat(const CVector& x, const CMatrix& A);

double euclidean_norm(const Vector& x);
double euclidean_norm(const CVector& x);

Matrix transpose(const Matrix& A);

// Direct solve with partial pivoting. Pivot below 1e-12 relative to the
// largest entry of the pivot column counts as singular.
Vector lu_solve(const Matrix& A, const Vector& b);
CVector lu_solve(const CMatrix& A, const CVector& b);

double frobenius_norm(const Matrix& A);

// True when LU factorization succeeds under the same pivot threshold as
// lu_solve. Diagnostic only: produces no solution and is not counted by the
// solver-call probe.
bool is_factorizable(const Matrix& A);

// Probe used to verify hybrid training never touches the direct solver.
long lu_solve_call_count();
void reset_lu_solve_call_count();

}  // namespace linalg
}  // namespace femnn
