#include "spt/kernels.hpp"

#include <cmath>
#include <cstring>

namespace spt::kernels {

namespace {

inline void mm_row(const double* a, const double* B, double* c, int k, int n) {
    std::memset(c, 0, sizeof(double) * n);
    for (int p = 0; p < k; ++p) {
        const double av = a[p];
        const double* b = B + static_cast<size_t>(p) * n;
        for (int j = 0; j < n; ++j) c[j] += av * b[j];
    }
}

inline void mm_row_acc(const double* a, const double* B, double* c, int k, int n) {
    for (int p = 0; p < k; ++p) {
        const double av = a[p];
        const double* b = B + static_cast<size_t>(p) * n;
        for (int j = 0; j < n; ++j) c[j] += av * b[j];
    }
}

}  // namespace

void matmul(const double* A, const double* B, double* C, int m, int k, int n) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i)
        mm_row(A + static_cast<size_t>(i) * k, B, C + static_cast<size_t>(i) * n, k, n);
}

void matmul_serial(const double* A, const double* B, double* C, int m, int k, int n) {
    for (int i = 0; i < m; ++i)
        mm_row(A + static_cast<size_t>(i) * k, B, C + static_cast<size_t>(i) * n, k, n);
}

void matmul_acc(const double* A, const double* B, double* C, int m, int k, int n) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i)
        mm_row_acc(A + static_cast<size_t>(i) * k, B, C + static_cast<size_t>(i) * n, k, n);
}

void matmul_acc_serial(const double* A, const double* B, double* C, int m, int k, int n) {
    for (int i = 0; i < m; ++i)
        mm_row_acc(A + static_cast<size_t>(i) * k, B, C + static_cast<size_t>(i) * n, k, n);
}

// Each output row of C is owned by one thread; the reduction over m runs in
// fixed index order for determinism.
void matmul_tn_acc(const double* A, const double* B, double* C, int m, int k, int n) {
#pragma omp parallel for schedule(static)
    for (int p = 0; p < k; ++p) {
        double* c = C + static_cast<size_t>(p) * n;
        for (int i = 0; i < m; ++i) {
            const double av = A[static_cast<size_t>(i) * k + p];
            const double* b = B + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) c[j] += av * b[j];
        }
    }
}

void matmul_tn_acc_serial(const double* A, const double* B, double* C, int m, int k, int n) {
    for (int p = 0; p < k; ++p) {
        double* c = C + static_cast<size_t>(p) * n;
        for (int i = 0; i < m; ++i) {
            const double av = A[static_cast<size_t>(i) * k + p];
            const double* b = B + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) c[j] += av * b[j];
        }
    }
}

void matmul_nt(const double* A, const double* B, double* C, int m, int k, int n) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        const double* a = A + static_cast<size_t>(i) * k;
        double* c = C + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* b = B + static_cast<size_t>(j) * k;
            double s = 0.0;
            for (int p = 0; p < k; ++p) s += a[p] * b[p];
            c[j] = s;
        }
    }
}

void matmul_nt_serial(const double* A, const double* B, double* C, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const double* a = A + static_cast<size_t>(i) * k;
        double* c = C + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* b = B + static_cast<size_t>(j) * k;
            double s = 0.0;
            for (int p = 0; p < k; ++p) s += a[p] * b[p];
            c[j] = s;
        }
    }
}

namespace {

inline void ln_row(const double* x, const double* gamma, const double* beta,
                   double* out, double* mean, double* rstd, int dim) {
    double mu = 0.0;
    for (int j = 0; j < dim; ++j) mu += x[j];
    mu /= dim;
    double var = 0.0;
    for (int j = 0; j < dim; ++j) {
        const double d = x[j] - mu;
        var += d * d;
    }
    var /= dim;
    const double rs = 1.0 / std::sqrt(var + 1e-6);
    *mean = mu;
    *rstd = rs;
    for (int j = 0; j < dim; ++j) out[j] = (x[j] - mu) * rs * gamma[j] + beta[j];
}

}  // namespace

void layer_norm(const double* x, const double* gamma, const double* beta,
                double* out, double* mean, double* rstd, int rows, int dim) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i)
        ln_row(x + static_cast<size_t>(i) * dim, gamma, beta,
               out + static_cast<size_t>(i) * dim, mean + i, rstd + i, dim);
}

void layer_norm_serial(const double* x, const double* gamma, const double* beta,
                       double* out, double* mean, double* rstd, int rows, int dim) {
    for (int i = 0; i < rows; ++i)
        ln_row(x + static_cast<size_t>(i) * dim, gamma, beta,
               out + static_cast<size_t>(i) * dim, mean + i, rstd + i, dim);
}

void layer_norm_backward(const double* x, const double* gamma,
                         const double* mean, const double* rstd,
                         const double* dout, double* dx, double* dgamma,
                         double* dbeta, int rows, int dim) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i) {
        const double* xi = x + static_cast<size_t>(i) * dim;
        const double* doi = dout + static_cast<size_t>(i) * dim;
        double* dxi = dx + static_cast<size_t>(i) * dim;
        const double mu = mean[i];
        const double rs = rstd[i];
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int j = 0; j < dim; ++j) {
            const double xhat = (xi[j] - mu) * rs;
            const double dy = doi[j] * gamma[j];
            sum_dy += dy;
            sum_dy_xhat += dy * xhat;
        }
        for (int j = 0; j < dim; ++j) {
            const double xhat = (xi[j] - mu) * rs;
            const double dy = doi[j] * gamma[j];
            dxi[j] = rs * (dy - sum_dy / dim - xhat * sum_dy_xhat / dim);
        }
    }
    // Parameter gradients reduced in fixed row order.
    for (int i = 0; i < rows; ++i) {
        const double* xi = x + static_cast<size_t>(i) * dim;
        const double* doi = dout + static_cast<size_t>(i) * dim;
        const double mu = mean[i];
        const double rs = rstd[i];
        for (int j = 0; j < dim; ++j) {
            dgamma[j] += doi[j] * (xi[j] - mu) * rs;
            dbeta[j] += doi[j];
        }
    }
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double gelu_grad(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    return cdf + x * pdf;
}

void gelu_forward(const double* x, double* out, size_t n) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) out[i] = gelu(x[i]);
}

void gelu_backward(const double* x, const double* dout, double* dx, size_t n) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) dx[i] = dout[i] * gelu_grad(x[i]);
}

}  // namespace spt::kernels
