#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spt {

// Dense row-major matrix of doubles. Vectors are 1xN matrices.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}

    double* data() { return v.data(); }
    const double* data() const { return v.data(); }
    size_t size() const { return v.size(); }

    double& operator()(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

    double* row(int r) { return v.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return v.data() + static_cast<size_t>(r) * cols; }

    void zero() { std::fill(v.begin(), v.end(), 0.0); }
};

inline void check(bool ok, const std::string& msg) {
    if (!ok) throw std::runtime_error(msg);
}

}  // namespace spt
