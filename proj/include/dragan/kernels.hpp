#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "dragan/tensor.hpp"

// Raw numeric routines shared by the tape engine (training) and the plain
// engine (inference). Loops are written ikj-style so the compiler can
// vectorize the inner j loop.

namespace dragan::kern {

// C[n,m] += or = A[n,k] * B[k,m]
template <typename Real>
void matmul_nn(const Tensor<Real>& A, const Tensor<Real>& B, Tensor<Real>& C, bool accumulate = false) {
    const int n = A.rows(), k = A.cols(), m = B.cols();
    if (!accumulate) C.zero();
    for (int i = 0; i < n; ++i) {
        const Real* a = A.row_ptr(i);
        Real* c = C.row_ptr(i);
        for (int p = 0; p < k; ++p) {
            const Real av = a[p];
            const Real* b = B.row_ptr(p);
            for (int j = 0; j < m; ++j) c[j] += av * b[j];
        }
    }
}

// C[n,m] (+)= A[n,k] * B[m,k]^T
template <typename Real>
void matmul_nt(const Tensor<Real>& A, const Tensor<Real>& B, Tensor<Real>& C, bool accumulate = false) {
    const int n = A.rows(), k = A.cols(), m = B.rows();
    for (int i = 0; i < n; ++i) {
        const Real* a = A.row_ptr(i);
        Real* c = C.row_ptr(i);
        for (int j = 0; j < m; ++j) {
            const Real* b = B.row_ptr(j);
            Real s = 0;
            for (int p = 0; p < k; ++p) s += a[p] * b[p];
            c[j] = accumulate ? c[j] + s : s;
        }
    }
}

// C[n,m] (+)= A[k,n]^T * B[k,m]
template <typename Real>
void matmul_tn(const Tensor<Real>& A, const Tensor<Real>& B, Tensor<Real>& C, bool accumulate = false) {
    const int k = A.rows(), n = A.cols(), m = B.cols();
    if (!accumulate) C.zero();
    for (int p = 0; p < k; ++p) {
        const Real* a = A.row_ptr(p);
        const Real* b = B.row_ptr(p);
        for (int i = 0; i < n; ++i) {
            const Real av = a[i];
            Real* c = C.row_ptr(i);
            for (int j = 0; j < m; ++j) c[j] += av * b[j];
        }
    }
}

template <typename Real>
void add_inplace(Tensor<Real>& dst, const Tensor<Real>& src, Real scale = Real(1)) {
    for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += scale * src.data[i];
}

// adds bias row vector b[1,m] to every row of X[n,m]
template <typename Real>
void add_bias_rows(Tensor<Real>& X, const Tensor<Real>& b) {
    const int n = X.rows(), m = X.cols();
    for (int i = 0; i < n; ++i) {
        Real* x = X.row_ptr(i);
        const Real* bp = b.data.data();
        for (int j = 0; j < m; ++j) x[j] += bp[j];
    }
}

template <typename Real>
void gelu_forward(const Tensor<Real>& X, Tensor<Real>& Y) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    for (std::size_t i = 0; i < X.data.size(); ++i) {
        const double x = static_cast<double>(X.data[i]);
        Y.data[i] = static_cast<Real>(0.5 * x * (1.0 + std::erf(x * inv_sqrt2)));
    }
}

template <typename Real>
void gelu_backward(const Tensor<Real>& X, const Tensor<Real>& dY, Tensor<Real>& dX) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    constexpr double inv_sqrt2pi = 0.39894228040143267794;
    for (std::size_t i = 0; i < X.data.size(); ++i) {
        const double x = static_cast<double>(X.data[i]);
        const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
        const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
        dX.data[i] += dY.data[i] * static_cast<Real>(cdf + x * pdf);
    }
}

// Row-wise layernorm with affine. Saves per-row mean and reciprocal stddev
// for the backward pass.
template <typename Real>
void layernorm_forward(const Tensor<Real>& X, const Tensor<Real>& gamma, const Tensor<Real>& beta,
                       Tensor<Real>& Y, std::vector<Real>& mean, std::vector<Real>& rstd, double eps = 1e-5) {
    const int n = X.rows(), m = X.cols();
    mean.resize(n);
    rstd.resize(n);
    for (int i = 0; i < n; ++i) {
        const Real* x = X.row_ptr(i);
        double mu = 0;
        for (int j = 0; j < m; ++j) mu += x[j];
        mu /= m;
        double var = 0;
        for (int j = 0; j < m; ++j) {
            const double d = x[j] - mu;
            var += d * d;
        }
        var /= m;
        const double rs = 1.0 / std::sqrt(var + eps);
        mean[i] = static_cast<Real>(mu);
        rstd[i] = static_cast<Real>(rs);
        Real* y = Y.row_ptr(i);
        const Real* g = gamma.data.data();
        const Real* b = beta.data.data();
        for (int j = 0; j < m; ++j)
            y[j] = static_cast<Real>(((x[j] - mu) * rs)) * g[j] + b[j];
    }
}

template <typename Real>
void layernorm_backward(const Tensor<Real>& X, const Tensor<Real>& gamma, const std::vector<Real>& mean,
                        const std::vector<Real>& rstd, const Tensor<Real>& dY, Tensor<Real>& dX,
                        Tensor<Real>& dgamma, Tensor<Real>& dbeta) {
    const int n = X.rows(), m = X.cols();
    for (int i = 0; i < n; ++i) {
        const Real* x = X.row_ptr(i);
        const Real* dy = dY.row_ptr(i);
        const double mu = mean[i], rs = rstd[i];
        double sum_dyg = 0, sum_dyg_xhat = 0;
        for (int j = 0; j < m; ++j) {
            const double xhat = (x[j] - mu) * rs;
            const double dyg = static_cast<double>(dy[j]) * gamma.data[j];
            sum_dyg += dyg;
            sum_dyg_xhat += dyg * xhat;
            dgamma.data[j] += dy[j] * static_cast<Real>(xhat);
            dbeta.data[j] += dy[j];
        }
        Real* dx = dX.row_ptr(i);
        for (int j = 0; j < m; ++j) {
            const double xhat = (x[j] - mu) * rs;
            const double dyg = static_cast<double>(dy[j]) * gamma.data[j];
            dx[j] += static_cast<Real>(rs * (dyg - sum_dyg / m - xhat * sum_dyg_xhat / m));
        }
    }
}

// Softmax over the first bounds[i] entries of each row; entries past the
// bound are exact zero. Used with bounds[i]=i+1 for causal attention and
// bounds[i]=m for full attention. Throws on non-finite input.
template <typename Real>
void softmax_rows_bounded(const Tensor<Real>& X, const std::vector<int>& bounds, Tensor<Real>& Y) {
    const int n = X.rows(), m = X.cols();
    for (int i = 0; i < n; ++i) {
        const Real* x = X.row_ptr(i);
        Real* y = Y.row_ptr(i);
        const int b = bounds[i];
        double mx = -1e300;
        for (int j = 0; j < b; ++j) {
            if (!std::isfinite(static_cast<double>(x[j]))) throw NumericError("softmax: non-finite input");
            mx = std::max(mx, static_cast<double>(x[j]));
        }
        double sum = 0;
        for (int j = 0; j < b; ++j) {
            const double e = std::exp(static_cast<double>(x[j]) - mx);
            y[j] = static_cast<Real>(e);
            sum += e;
        }
        const double inv = 1.0 / sum;
        for (int j = 0; j < b; ++j) y[j] = static_cast<Real>(static_cast<double>(y[j]) * inv);
        for (int j = b; j < m; ++j) y[j] = Real(0);
    }
}

// dX_j += P_j * (dY_j - sum_k dY_k P_k), per row, within bounds.
template <typename Real>
void softmax_rows_bounded_backward(const Tensor<Real>& P, const std::vector<int>& bounds,
                                   const Tensor<Real>& dY, Tensor<Real>& dX) {
    const int n = P.rows();
    for (int i = 0; i < n; ++i) {
        const Real* p = P.row_ptr(i);
        const Real* dy = dY.row_ptr(i);
        Real* dx = dX.row_ptr(i);
        const int b = bounds[i];
        double dot = 0;
        for (int j = 0; j < b; ++j) dot += static_cast<double>(dy[j]) * p[j];
        for (int j = 0; j < b; ++j)
            dx[j] += static_cast<Real>(p[j] * (static_cast<double>(dy[j]) - dot));
    }
}

// log softmax of a single row vector, max-subtracted; never -inf on finite input
template <typename Real>
void log_softmax_row(const Real* x, int m, Real* y) {
    double mx = -1e300;
    for (int j = 0; j < m; ++j) {
        if (!std::isfinite(static_cast<double>(x[j]))) throw NumericError("log_softmax: non-finite input");
        mx = std::max(mx, static_cast<double>(x[j]));
    }
    double sum = 0;
    for (int j = 0; j < m; ++j) sum += std::exp(static_cast<double>(x[j]) - mx);
    const double lse = mx + std::log(sum);
    for (int j = 0; j < m; ++j) y[j] = static_cast<Real>(static_cast<double>(x[j]) - lse);
}

template <typename Real>
double logsumexp(const Real* x, int m) {
    double mx = -1e300;
    for (int j = 0; j < m; ++j) {
        if (!std::isfinite(static_cast<double>(x[j]))) throw NumericError("logsumexp: non-finite input");
        mx = std::max(mx, static_cast<double>(x[j]));
    }
    double sum = 0;
    for (int j = 0; j < m; ++j) sum += std::exp(static_cast<double>(x[j]) - mx);
    return mx + std::log(sum);
}

template <typename Real>
void embedding_gather(const Tensor<Real>& table, const std::vector<int>& ids, Tensor<Real>& out) {
    const int d = table.cols();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const Real* src = table.row_ptr(ids[i]);
        Real* dst = out.row_ptr(static_cast<int>(i));
        std::copy(src, src + d, dst);
    }
}

template <typename Real>
void embedding_scatter_add(Tensor<Real>& dtable, const std::vector<int>& ids, const Tensor<Real>& dout) {
    const int d = dtable.cols();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        Real* dst = dtable.row_ptr(ids[i]);
        const Real* src = dout.row_ptr(static_cast<int>(i));
        for (int j = 0; j < d; ++j) dst[j] += src[j];
    }
}

}  // namespace dragan::kern
