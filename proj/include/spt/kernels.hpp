#pragma once

#include <cstddef>

namespace spt::kernels {

// C(m x n) = A(m x k) * B(k x n). OpenMP over rows of C; each row is computed
// by a single thread with a fixed inner order, so results are bitwise
// identical to the serial reference for any thread count.
void matmul(const double* A, const double* B, double* C, int m, int k, int n);
void matmul_serial(const double* A, const double* B, double* C, int m, int k, int n);

// C(m x n) += A(m x k) * B(k x n)
void matmul_acc(const double* A, const double* B, double* C, int m, int k, int n);
void matmul_acc_serial(const double* A, const double* B, double* C, int m, int k, int n);

// C(k x n) += A(m x k)^T * B(m x n). Used for weight gradients.
void matmul_tn_acc(const double* A, const double* B, double* C, int m, int k, int n);
void matmul_tn_acc_serial(const double* A, const double* B, double* C, int m, int k, int n);

// C(m x n) = A(m x k) * B(n x k)^T. Used for input gradients.
void matmul_nt(const double* A, const double* B, double* C, int m, int k, int n);
void matmul_nt_serial(const double* A, const double* B, double* C, int m, int k, int n);

// Row-wise layer normalization with learned scale/shift.
// x: (rows x dim), out: (rows x dim); mean/rstd: per-row statistics cached
// for the backward pass.
void layer_norm(const double* x, const double* gamma, const double* beta,
                double* out, double* mean, double* rstd, int rows, int dim);
void layer_norm_serial(const double* x, const double* gamma, const double* beta,
                       double* out, double* mean, double* rstd, int rows, int dim);

// Backward of layer_norm. dgamma/dbeta are accumulated serially in fixed
// row order; dx is computed per-row in parallel.
void layer_norm_backward(const double* x, const double* gamma,
                         const double* mean, const double* rstd,
                         const double* dout, double* dx, double* dgamma,
                         double* dbeta, int rows, int dim);

double gelu(double x);
double gelu_grad(double x);

void gelu_forward(const double* x, double* out, size_t n);
void gelu_backward(const double* x, const double* dout, double* dx, size_t n);

}  // namespace spt::kernels
