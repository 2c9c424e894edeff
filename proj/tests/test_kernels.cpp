#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "spt/kernels.hpp"

using namespace spt::kernels;

namespace {

std::vector<double> random_vec(size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("matmul matches a hand-computed 2x2 product") {
    const std::vector<double> A{1, 2, 3, 4};  // 2x2
    const std::vector<double> B{5, 6, 7, 8};
    std::vector<double> C(4);
    matmul(A.data(), B.data(), C.data(), 2, 2, 2);
    CHECK(C[0] == doctest::Approx(19));
    CHECK(C[1] == doctest::Approx(22));
    CHECK(C[2] == doctest::Approx(43));
    CHECK(C[3] == doctest::Approx(50));
}

TEST_CASE("parallel matmul variants are bitwise equal to the serial references") {
    const int m = 37, k = 53, n = 29;
    const auto A = random_vec(static_cast<size_t>(m) * k, 1);
    const auto B = random_vec(static_cast<size_t>(k) * n, 2);
    const auto Bt = random_vec(static_cast<size_t>(n) * k, 3);
    const auto G = random_vec(static_cast<size_t>(m) * n, 4);

    std::vector<double> C1(static_cast<size_t>(m) * n), C2(C1.size());
    matmul_serial(A.data(), B.data(), C1.data(), m, k, n);
    matmul(A.data(), B.data(), C2.data(), m, k, n);
    CHECK(bitwise_equal(C1, C2));

    auto D1 = random_vec(C1.size(), 5);
    auto D2 = D1;
    matmul_acc_serial(A.data(), B.data(), D1.data(), m, k, n);
    matmul_acc(A.data(), B.data(), D2.data(), m, k, n);
    CHECK(bitwise_equal(D1, D2));

    std::vector<double> W1(static_cast<size_t>(k) * n, 0.5), W2(W1);
    matmul_tn_acc_serial(A.data(), G.data(), W1.data(), m, k, n);
    matmul_tn_acc(A.data(), G.data(), W2.data(), m, k, n);
    CHECK(bitwise_equal(W1, W2));

    matmul_nt_serial(A.data(), Bt.data(), C1.data(), m, k, n);
    matmul_nt(A.data(), Bt.data(), C2.data(), m, k, n);
    CHECK(bitwise_equal(C1, C2));
}

TEST_CASE("matmul_tn_acc equals explicit transpose followed by matmul") {
    const int m = 11, k = 7, n = 5;
    const auto A = random_vec(static_cast<size_t>(m) * k, 6);
    const auto B = random_vec(static_cast<size_t>(m) * n, 7);
    std::vector<double> At(static_cast<size_t>(k) * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) At[static_cast<size_t>(j) * m + i] = A[i * k + j];
    std::vector<double> expect(static_cast<size_t>(k) * n);
    matmul(At.data(), B.data(), expect.data(), k, m, n);
    std::vector<double> got(expect.size(), 0.0);
    matmul_tn_acc(A.data(), B.data(), got.data(), m, k, n);
    for (size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(expect[i]));
}

TEST_CASE("layer_norm normalizes each row before scale and shift") {
    const int rows = 9, dim = 16;
    const auto X = random_vec(static_cast<size_t>(rows) * dim, 8);
    std::vector<double> gamma(dim, 1.0), beta(dim, 0.0);
    std::vector<double> out(X.size()), mean(rows), rstd(rows);
    layer_norm(X.data(), gamma.data(), beta.data(), out.data(), mean.data(),
               rstd.data(), rows, dim);
    for (int r = 0; r < rows; ++r) {
        double s = 0.0, sq = 0.0;
        for (int c = 0; c < dim; ++c) {
            s += out[r * dim + c];
            sq += out[r * dim + c] * out[r * dim + c];
        }
        CHECK(s / dim == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(sq / dim == doctest::Approx(1.0).epsilon(1e-4));
    }
    std::vector<double> out2(X.size()), mean2(rows), rstd2(rows);
    layer_norm_serial(X.data(), gamma.data(), beta.data(), out2.data(),
                      mean2.data(), rstd2.data(), rows, dim);
    CHECK(bitwise_equal(out, out2));
}

TEST_CASE("layer_norm_backward matches central finite differences") {
    const int rows = 3, dim = 8;
    const auto X = random_vec(static_cast<size_t>(rows) * dim, 9);
    const auto gamma = random_vec(dim, 10);
    const auto beta = random_vec(dim, 11);
    const auto dout = random_vec(X.size(), 12);

    auto loss = [&](const std::vector<double>& x, const std::vector<double>& g,
                    const std::vector<double>& b) {
        std::vector<double> out(x.size()), mean(rows), rstd(rows);
        layer_norm(x.data(), g.data(), b.data(), out.data(), mean.data(),
                   rstd.data(), rows, dim);
        double l = 0.0;
        for (size_t i = 0; i < out.size(); ++i) l += out[i] * dout[i];
        return l;
    };

    std::vector<double> out(X.size()), mean(rows), rstd(rows);
    layer_norm(X.data(), gamma.data(), beta.data(), out.data(), mean.data(),
               rstd.data(), rows, dim);
    std::vector<double> dx(X.size()), dgamma(dim, 0.0), dbeta(dim, 0.0);
    layer_norm_backward(X.data(), gamma.data(), mean.data(), rstd.data(),
                        dout.data(), dx.data(), dgamma.data(), dbeta.data(), rows,
                        dim);

    const double eps = 1e-6;
    for (size_t i = 0; i < X.size(); i += 5) {
        auto xp = X, xm = X;
        xp[i] += eps;
        xm[i] -= eps;
        const double fd = (loss(xp, gamma, beta) - loss(xm, gamma, beta)) / (2 * eps);
        CHECK(dx[i] == doctest::Approx(fd).epsilon(1e-5));
    }
    for (int c = 0; c < dim; ++c) {
        auto gp = gamma, gm = gamma;
        gp[c] += eps;
        gm[c] -= eps;
        const double fd = (loss(X, gp, beta) - loss(X, gm, beta)) / (2 * eps);
        CHECK(dgamma[c] == doctest::Approx(fd).epsilon(1e-5));
        auto bp = beta, bm = beta;
        bp[c] += eps;
        bm[c] -= eps;
        const double fdb = (loss(X, gamma, bp) - loss(X, gamma, bm)) / (2 * eps);
        CHECK(dbeta[c] == doctest::Approx(fdb).epsilon(1e-5));
    }
}

TEST_CASE("gelu fixed points and derivative") {
    CHECK(gelu(0.0) == 0.0);
    // gelu(x) = x * Phi(x); at x=1: Phi(1) = 0.841344746...
    CHECK(gelu(1.0) == doctest::Approx(0.8413447461).epsilon(1e-9));
    CHECK(gelu(-6.0) == doctest::Approx(0.0).epsilon(1e-8));
    const double eps = 1e-6;
    for (double x : {-2.0, -0.5, 0.0, 0.3, 1.7}) {
        const double fd = (gelu(x + eps) - gelu(x - eps)) / (2 * eps);
        CHECK(gelu_grad(x) == doctest::Approx(fd).epsilon(1e-6));
    }
}
