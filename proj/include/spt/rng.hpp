#pragma once

#include <random>

#include "spt/tensor.hpp"

namespace spt {

using Rng = std::mt19937_64;

inline void uniform_init(Mat& m, double lo, double hi, Rng& rng) {
    std::uniform_real_distribution<double> dist(lo, hi);
    for (auto& x : m.v) x = dist(rng);
}

// Fan-in scaled uniform, the default dense-layer initialization.
inline void fan_in_init(Mat& m, int fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    uniform_init(m, -bound, bound, rng);
}

// Normal(0, std) with samples beyond 2 std rejected.
inline void trunc_normal_init(Mat& m, double std, Rng& rng) {
    std::normal_distribution<double> dist(0.0, std);
    for (auto& x : m.v) {
        double s;
        do {
            s = dist(rng);
        } while (std::abs(s) > 2.0 * std);
        x = s;
    }
}

}  // namespace spt
