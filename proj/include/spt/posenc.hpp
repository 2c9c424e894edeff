#pragma once

#include <vector>

#include "spt/tensor.hpp"

namespace spt {

enum class PosEncStrategy { kBert, kLinearXY, kSinCosXY };

struct PosEncConfig {
    PosEncStrategy strategy = PosEncStrategy::kSinCosXY;
    int hidden_dim = 0;
    int n_axes = 2;
    int max_positions = 0;  // bert only
    // Alg-as-printed index sets overlap for n_axes >= 2 (later axis wins);
    // default is the non-overlapping interleave.
    bool printed_indexing = false;
};

// Exactly the variant matching the strategy is populated.
struct PosEncParams {
    Mat bert_table;   // max_positions x h
    Mat linear_map;   // 2 x h
    Mat linear_bias;  // 1 x h
    Mat mixer;        // h x h
};

PosEncParams init_posenc_params(const PosEncConfig& config, unsigned long long seed);
PosEncParams zero_posenc_grads(const PosEncConfig& config);

// n x h table lookup by patch index.
Mat encode_bert(const std::vector<int>& patch_indices, const PosEncParams& params);

// n x h affine map of the (y,x) centers.
Mat encode_linear_xy(const Mat& centers, const PosEncParams& params);

// Per-axis sine-cosine expansion followed by the learned h x h mixer. The
// pre-mixer matrix is returned via *pre_out when non-null (needed for the
// mixer gradient).
Mat encode_sincos_xy(const Mat& centers, const PosEncParams& params,
                     const PosEncConfig& config, Mat* pre_out = nullptr);

// Index families for axis i: cosine and sine positions within [0, h).
std::vector<int> sincos_cos_indices(int axis, int n_axes, int hidden_dim, bool printed);
std::vector<int> sincos_sin_indices(int axis, int n_axes, int hidden_dim, bool printed);

// Accumulates parameter gradients given the gradient of the encoder output
// rows that received positional encodings.
void posenc_backward(const PosEncConfig& config, const PosEncParams& params,
                     const std::vector<int>& patch_indices, const Mat& centers,
                     const Mat& sincos_pre, const Mat& dout, PosEncParams& grads);

}  // namespace spt
