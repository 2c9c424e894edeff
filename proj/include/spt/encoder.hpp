#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spt/graph.hpp"
#include "spt/patchset.hpp"
#include "spt/posenc.hpp"
#include "spt/rng.hpp"
#include "spt/tensor.hpp"

namespace spt {

struct EncoderConfig {
    int hidden_dim = 64;
    int n_layers = 4;
    int n_heads = 2;
    int mlp_dim = 128;
    int n_classes = 10;
    double dropout_rate = 0.1;
    int patch_input_dim = 0;  // 4 * h_chunk * w_chunk (RGB + shape-mask channel)
    int max_patches = 0;      // sequence length is max_patches + 1 (cls token)
    PosEncConfig posenc;

    int seq_len() const { return max_patches + 1; }
    int head_dim() const { return hidden_dim / n_heads; }
};

// The "Tiny" size class: hidden 192, 3 heads, MLP 768.
EncoderConfig ti_preset(int n_layers, int patch_input_dim, int max_patches,
                        int n_classes, PosEncStrategy posenc);

struct EncoderLayerParams {
    Mat ln1_gamma, ln1_beta;
    Mat wq, bq, wk, bk, wv, bv, wo, bo;  // h x h weights, 1 x h biases
    Mat ln2_gamma, ln2_beta;
    Mat w1, b1;  // h x mlp
    Mat w2, b2;  // mlp x h
};

struct EncoderParams {
    Mat patch_proj_w;  // patch_input_dim x h
    Mat patch_proj_b;  // 1 x h
    Mat cls_token;     // 1 x h
    PosEncParams posenc;
    std::vector<EncoderLayerParams> layers;
    Mat lnf_gamma, lnf_beta;
    Mat head_w;  // h x n_classes
    Mat head_b;  // 1 x n_classes
};

EncoderParams init_encoder_params(const EncoderConfig& config, unsigned long long seed);
EncoderParams zero_encoder_grads(const EncoderConfig& config);

// Visits every learned tensor as (name, Mat&) in a fixed order.
void for_each_param(const EncoderConfig& config, EncoderParams& params,
                    const std::function<void(const std::string&, Mat&)>& fn);
size_t encoder_param_count(const EncoderConfig& config);

// Ordered op descriptions, one entry per structural step; used for the
// structural comparison against a reference ViT.
std::vector<std::string> encoder_op_sequence(const EncoderConfig& config);

// One image of a batch. bert_indices defaults to slot order when empty.
struct EncoderInput {
    const SuperpixelPatchSet* patchset = nullptr;
    const AttentionMask* mask = nullptr;
    std::vector<int> bert_indices;
};

struct ForwardOutput {
    Mat logits;  // batch x n_classes
};

// Activation cache for the backward pass (and attention diagnostics).
struct ForwardCache {
    int batch = 0, seq = 0;
    std::vector<const AttentionMask*> masks;
    // Patch-slot bookkeeping: present slots flattened across the batch.
    std::vector<int> present_token_rows;  // row in the stacked sequence
    std::vector<int> bert_indices;
    Mat flat_inputs;  // n_present x patch_input_dim
    Mat centers;      // n_present x 2
    Mat sincos_pre;   // n_present x h (sincos only)
    Mat x0;           // stacked tokens after embedding dropout
    std::vector<uint8_t> emb_drop;
    struct Layer {
        Mat x_in, ln1_out, q, k, v, ctx, x_mid, ln2_out, z1, g1d;
        std::vector<double> ln1_mean, ln1_rstd, ln2_mean, ln2_rstd;
        std::vector<double> attn;  // batch x heads x seq x seq, exact zeros on masked pairs
        std::vector<uint8_t> attn_drop, mlp_drop1, mlp_drop2;
    };
    std::vector<Layer> layers;
    Mat x_final, lnf_out;
    std::vector<double> lnf_mean, lnf_rstd;

    double attn_weight(int layer, int image, int head, int i, int j) const {
        const auto& a = layers[layer].attn;
        const size_t s = seq;
        return a[(((static_cast<size_t>(image) * n_heads_) + head) * s + i) * s + j];
    }
    int n_heads_ = 0;
};

// Forward pass over a batch. In training mode dropout is applied and
// dropout_rng must be provided; cache may be null when no backward pass (or
// attention inspection) is needed. Throws on non-finite activations.
ForwardOutput encoder_forward(const std::vector<EncoderInput>& batch,
                              const EncoderParams& params,
                              const EncoderConfig& config, bool training,
                              Rng* dropout_rng, ForwardCache* cache);

// Accumulates parameter gradients for dLoss/dlogits. The gradient of every
// masked-out attention logit is exactly zero by construction.
void encoder_backward(const Mat& dlogits, const ForwardCache& cache,
                      const EncoderParams& params, const EncoderConfig& config,
                      EncoderParams& grads);

}  // namespace spt
