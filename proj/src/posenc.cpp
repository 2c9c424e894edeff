#include "spt/posenc.hpp"

#include <cmath>

#include "spt/kernels.hpp"
#include "spt/rng.hpp"

namespace spt {

PosEncParams init_posenc_params(const PosEncConfig& config, unsigned long long seed) {
    check(config.hidden_dim >= 2 && config.hidden_dim % 2 == 0,
          "posenc: hidden_dim must be even and >= 2");
    check(config.hidden_dim >= 2 * config.n_axes,
          "posenc: hidden_dim must be >= 2*n_axes");
    Rng rng(seed);
    PosEncParams p;
    const int h = config.hidden_dim;
    switch (config.strategy) {
        case PosEncStrategy::kBert:
            check(config.max_positions >= 1, "posenc: max_positions required for bert");
            p.bert_table = Mat(config.max_positions, h);
            trunc_normal_init(p.bert_table, 0.02, rng);
            break;
        case PosEncStrategy::kLinearXY:
            p.linear_map = Mat(2, h);
            p.linear_bias = Mat(1, h);
            fan_in_init(p.linear_map, 2, rng);
            break;
        case PosEncStrategy::kSinCosXY:
            p.mixer = Mat(h, h);
            fan_in_init(p.mixer, h, rng);
            break;
    }
    return p;
}

PosEncParams zero_posenc_grads(const PosEncConfig& config) {
    PosEncParams g;
    const int h = config.hidden_dim;
    switch (config.strategy) {
        case PosEncStrategy::kBert:
            g.bert_table = Mat(config.max_positions, h);
            break;
        case PosEncStrategy::kLinearXY:
            g.linear_map = Mat(2, h);
            g.linear_bias = Mat(1, h);
            break;
        case PosEncStrategy::kSinCosXY:
            g.mixer = Mat(h, h);
            break;
    }
    return g;
}

Mat encode_bert(const std::vector<int>& patch_indices, const PosEncParams& params) {
    const int n = static_cast<int>(patch_indices.size());
    Mat out(n, params.bert_table.cols);
    for (int i = 0; i < n; ++i) {
        const int idx = patch_indices[i];
        check(idx >= 0 && idx < params.bert_table.rows, "encode_bert: index out of range");
        std::copy(params.bert_table.row(idx), params.bert_table.row(idx) + out.cols,
                  out.row(i));
    }
    return out;
}

Mat encode_linear_xy(const Mat& centers, const PosEncParams& params) {
    check(centers.cols == 2, "encode_linear_xy: centers must be n x 2");
    const int n = centers.rows, h = params.linear_map.cols;
    Mat out(n, h);
    kernels::matmul(centers.data(), params.linear_map.data(), out.data(), n, 2, h);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < h; ++j) out(i, j) += params.linear_bias(0, j);
    return out;
}

std::vector<int> sincos_cos_indices(int axis, int n_axes, int hidden_dim, bool printed) {
    std::vector<int> idx;
    const int start = printed ? axis : 2 * axis;
    for (int j = start; j < hidden_dim; j += 2 * n_axes) idx.push_back(j);
    return idx;
}

std::vector<int> sincos_sin_indices(int axis, int n_axes, int hidden_dim, bool printed) {
    std::vector<int> idx;
    const int start = (printed ? axis : 2 * axis) + 1;
    for (int j = start; j < hidden_dim; j += 2 * n_axes) idx.push_back(j);
    return idx;
}

Mat encode_sincos_xy(const Mat& centers, const PosEncParams& params,
                     const PosEncConfig& config, Mat* pre_out) {
    const int h = config.hidden_dim;
    const int d = std::min(config.n_axes, centers.cols);
    check(h >= 2 * d, "encode_sincos_xy: hidden_dim must be >= 2*n_axes");
    const int n = centers.rows;
    std::vector<double> div_term(h);
    for (int j = 0; j < h; ++j)
        div_term[j] = std::exp(j * (-std::log(10000.0) / h));

    Mat pre(n, h);
    for (int axis = 0; axis < d; ++axis) {
        const auto jc = sincos_cos_indices(axis, d, h, config.printed_indexing);
        const auto js = sincos_sin_indices(axis, d, h, config.printed_indexing);
        for (int i = 0; i < n; ++i) {
            const double pos = centers(i, axis);
            for (int j : jc) pre(i, j) = std::cos(pos * div_term[j]);
            for (int j : js) pre(i, j) = std::sin(pos * div_term[j]);
        }
    }
    Mat out(n, h);
    kernels::matmul(pre.data(), params.mixer.data(), out.data(), n, h, h);
    if (pre_out) *pre_out = std::move(pre);
    return out;
}

void posenc_backward(const PosEncConfig& config, const PosEncParams& params,
                     const std::vector<int>& patch_indices, const Mat& centers,
                     const Mat& sincos_pre, const Mat& dout, PosEncParams& grads) {
    const int n = dout.rows, h = dout.cols;
    switch (config.strategy) {
        case PosEncStrategy::kBert:
            for (int i = 0; i < n; ++i) {
                double* g = grads.bert_table.row(patch_indices[i]);
                const double* d = dout.row(i);
                for (int j = 0; j < h; ++j) g[j] += d[j];
            }
            break;
        case PosEncStrategy::kLinearXY:
            kernels::matmul_tn_acc(centers.data(), dout.data(), grads.linear_map.data(),
                                   n, 2, h);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < h; ++j) grads.linear_bias(0, j) += dout(i, j);
            break;
        case PosEncStrategy::kSinCosXY:
            kernels::matmul_tn_acc(sincos_pre.data(), dout.data(), grads.mixer.data(),
                                   n, h, h);
            break;
    }
    (void)params;
}

}  // namespace spt
