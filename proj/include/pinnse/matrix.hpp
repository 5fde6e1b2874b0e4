#pragma once

#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "pinnse/errors.hpp"

namespace pinnse {

// Dense row-major matrix of doubles. Sized for this workbench: state vectors,
// mini-batches and MLP layers up to a few thousand columns.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

    double* row(int r) { return a.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return a.data() + static_cast<size_t>(r) * cols; }

    void fill(double v) { std::fill(a.begin(), a.end(), v); }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// out = X * W^T   (X: b x n, W: m x n, out: b x m). Both operands are walked
// along contiguous rows.
inline void gemm_nt(const Matrix& x, const Matrix& w, Matrix& out) {
    assert(x.cols == w.cols);
    out.rows = x.rows;
    out.cols = w.rows;
    out.a.assign(static_cast<size_t>(out.rows) * out.cols, 0.0);
    for (int b = 0; b < x.rows; ++b) {
        const double* xb = x.row(b);
        double* ob = out.row(b);
        for (int m = 0; m < w.rows; ++m) {
            const double* wm = w.row(m);
            double acc = 0.0;
            for (int k = 0; k < x.cols; ++k) acc += xb[k] * wm[k];
            ob[m] = acc;
        }
    }
}

// out = D * W   (D: b x m, W: m x n, out: b x n), accumulated row-wise.
inline void gemm_nn(const Matrix& d, const Matrix& w, Matrix& out) {
    assert(d.cols == w.rows);
    out.rows = d.rows;
    out.cols = w.cols;
    out.a.assign(static_cast<size_t>(out.rows) * out.cols, 0.0);
    for (int b = 0; b < d.rows; ++b) {
        const double* db = d.row(b);
        double* ob = out.row(b);
        for (int m = 0; m < d.cols; ++m) {
            const double s = db[m];
            if (s == 0.0) continue;
            const double* wm = w.row(m);
            for (int k = 0; k < w.cols; ++k) ob[k] += s * wm[k];
        }
    }
}

// out = D^T * X  (D: b x m, X: b x n, out: m x n). Gradient of weights.
inline void gemm_tn(const Matrix& d, const Matrix& x, Matrix& out) {
    assert(d.rows == x.rows);
    out.rows = d.cols;
    out.cols = x.cols;
    out.a.assign(static_cast<size_t>(out.rows) * out.cols, 0.0);
    for (int b = 0; b < d.rows; ++b) {
        const double* db = d.row(b);
        const double* xb = x.row(b);
        for (int m = 0; m < d.cols; ++m) {
            const double s = db[m];
            if (s == 0.0) continue;
            double* om = out.row(m);
            for (int k = 0; k < x.cols; ++k) om[k] += s * xb[k];
        }
    }
}

// Solve A x = b in place by LU with partial pivoting. A is overwritten.
// Returns false when a pivot collapses (singular to working precision).
inline bool lu_solve(Matrix& A, std::vector<double>& b) {
    if (A.rows != A.cols || static_cast<int>(b.size()) != A.rows)
        throw contract_error("lu_solve: non-square system or size mismatch");
    const int n = A.rows;
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;

    for (int k = 0; k < n; ++k) {
        int p = k;
        double amax = std::fabs(A(k, k));
        for (int i = k + 1; i < n; ++i) {
            double v = std::fabs(A(i, k));
            if (v > amax) { amax = v; p = i; }
        }
        if (amax < 1e-13) return false;
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));
            std::swap(b[k], b[p]);
        }
        const double pivv = A(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double f = A(i, k) / pivv;
            A(i, k) = f;
            if (f == 0.0) continue;
            for (int j = k + 1; j < n; ++j) A(i, j) -= f * A(k, j);
            b[i] -= f * b[k];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double acc = b[i];
        for (int j = i + 1; j < n; ++j) acc -= A(i, j) * b[j];
        b[i] = acc / A(i, i);
    }
    return true;
}

using cx = std::complex<double>;

// Dense complex matrix, used for the bus admittance operator.
struct CMatrix {
    int n = 0;
    std::vector<cx> a;

    CMatrix() = default;
    explicit CMatrix(int dim) : n(dim), a(static_cast<size_t>(dim) * dim, cx(0.0, 0.0)) {}

    cx& operator()(int r, int c) { return a[static_cast<size_t>(r) * n + c]; }
    cx operator()(int r, int c) const { return a[static_cast<size_t>(r) * n + c]; }
};

inline void cmatvec(const CMatrix& m, const cx* x, cx* out) {
    for (int i = 0; i < m.n; ++i) {
        cx acc(0.0, 0.0);
        const cx* row = m.a.data() + static_cast<size_t>(i) * m.n;
        for (int j = 0; j < m.n; ++j) acc += row[j] * x[j];
        out[i] = acc;
    }
}

// out = M^H x (conjugate transpose product), used when chaining physics
// gradients back through the admittance operator.
inline void cmatvec_herm(const CMatrix& m, const cx* x, cx* out) {
    for (int j = 0; j < m.n; ++j) out[j] = cx(0.0, 0.0);
    for (int i = 0; i < m.n; ++i) {
        const cx* row = m.a.data() + static_cast<size_t>(i) * m.n;
        for (int j = 0; j < m.n; ++j) out[j] += std::conj(row[j]) * x[i];
    }
}

inline void cmatvec(const CMatrix& m, const std::vector<cx>& x, std::vector<cx>& out) {
    if (static_cast<int>(x.size()) != m.n) throw contract_error("cmatvec: dimension mismatch");
    out.resize(x.size());
    cmatvec(m, x.data(), out.data());
}

inline void cmatvec_herm(const CMatrix& m, const std::vector<cx>& x, std::vector<cx>& out) {
    if (static_cast<int>(x.size()) != m.n) throw contract_error("cmatvec_herm: dimension mismatch");
    out.resize(x.size());
    cmatvec_herm(m, x.data(), out.data());
}

} // namespace pinnse
