// Compares the OpenMP kernels against their serial references: wall time and
// bitwise agreement.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>
#include <vector>

#include "spt/kernels.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> random_vec(size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

template <class F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        fn();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void report(const char* name, double serial, double parallel, bool match) {
    std::printf("%-16s serial %8.2f ms   parallel %8.2f ms   speedup %5.2fx   %s\n",
                name, serial * 1e3, parallel * 1e3, serial / parallel,
                match ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main() {
    std::mt19937_64 rng(7);
    const int m = 768, k = 512, n = 768;
    const auto A = random_vec(static_cast<size_t>(m) * k, rng);
    const auto B = random_vec(static_cast<size_t>(k) * n, rng);
    const auto Bt = random_vec(static_cast<size_t>(n) * k, rng);
    std::vector<double> C1(static_cast<size_t>(m) * n), C2(C1.size());
    const int reps = 5;

    double ts = time_best_of(reps, [&] {
        spt::kernels::matmul_serial(A.data(), B.data(), C1.data(), m, k, n);
    });
    double tp = time_best_of(reps, [&] {
        spt::kernels::matmul(A.data(), B.data(), C2.data(), m, k, n);
    });
    report("matmul", ts, tp, bitwise_equal(C1, C2));

    std::fill(C1.begin(), C1.end(), 0.0);
    std::fill(C2.begin(), C2.end(), 0.0);
    ts = time_best_of(reps, [&] {
        spt::kernels::matmul_acc_serial(A.data(), B.data(), C1.data(), m, k, n);
    });
    tp = time_best_of(reps, [&] {
        spt::kernels::matmul_acc(A.data(), B.data(), C2.data(), m, k, n);
    });
    report("matmul_acc", ts, tp, bitwise_equal(C1, C2));

    std::vector<double> W1(static_cast<size_t>(k) * n, 0.0), W2(W1.size(), 0.0);
    const auto G = random_vec(static_cast<size_t>(m) * n, rng);
    ts = time_best_of(reps, [&] {
        spt::kernels::matmul_tn_acc_serial(A.data(), G.data(), W1.data(), m, k, n);
    });
    tp = time_best_of(reps, [&] {
        spt::kernels::matmul_tn_acc(A.data(), G.data(), W2.data(), m, k, n);
    });
    report("matmul_tn_acc", ts, tp, bitwise_equal(W1, W2));

    ts = time_best_of(reps, [&] {
        spt::kernels::matmul_nt_serial(A.data(), Bt.data(), C1.data(), m, k, n);
    });
    tp = time_best_of(reps, [&] {
        spt::kernels::matmul_nt(A.data(), Bt.data(), C2.data(), m, k, n);
    });
    report("matmul_nt", ts, tp, bitwise_equal(C1, C2));

    const int rows = 8192, dim = 192;
    const auto X = random_vec(static_cast<size_t>(rows) * dim, rng);
    const auto gamma = random_vec(dim, rng);
    const auto beta = random_vec(dim, rng);
    std::vector<double> O1(X.size()), O2(X.size()), mu(rows), rstd(rows);
    ts = time_best_of(reps, [&] {
        spt::kernels::layer_norm_serial(X.data(), gamma.data(), beta.data(),
                                        O1.data(), mu.data(), rstd.data(), rows, dim);
    });
    tp = time_best_of(reps, [&] {
        spt::kernels::layer_norm(X.data(), gamma.data(), beta.data(), O2.data(),
                                 mu.data(), rstd.data(), rows, dim);
    });
    report("layer_norm", ts, tp, bitwise_equal(O1, O2));

    return 0;
}
