#include "spt/encoder.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "spt/kernels.hpp"

namespace spt {

namespace {

void add_bias(Mat& m, const Mat& bias) {
    for (int i = 0; i < m.rows; ++i) {
        double* r = m.row(i);
        const double* b = bias.data();
        for (int j = 0; j < m.cols; ++j) r[j] += b[j];
    }
}

void bias_grad(const Mat& dout, Mat& dbias) {
    for (int i = 0; i < dout.rows; ++i) {
        const double* r = dout.row(i);
        for (int j = 0; j < dout.cols; ++j) dbias.v[j] += r[j];
    }
}

// Inverted dropout: mask bytes drawn serially for determinism, survivors
// scaled by 1/(1-p).
void apply_dropout(Mat& m, double rate, Rng& rng, std::vector<uint8_t>& mask) {
    mask.resize(m.size());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double scale = 1.0 / (1.0 - rate);
    for (size_t i = 0; i < m.size(); ++i) {
        if (u(rng) < rate) {
            mask[i] = 0;
            m.v[i] = 0.0;
        } else {
            mask[i] = 1;
            m.v[i] *= scale;
        }
    }
}

void dropout_backward(Mat& dm, double rate, const std::vector<uint8_t>& mask) {
    if (mask.empty()) return;  // eval-mode forward
    const double scale = 1.0 / (1.0 - rate);
    for (size_t i = 0; i < dm.size(); ++i) dm.v[i] = mask[i] ? dm.v[i] * scale : 0.0;
}

}  // namespace

EncoderConfig ti_preset(int n_layers, int patch_input_dim, int max_patches,
                        int n_classes, PosEncStrategy posenc) {
    EncoderConfig c;
    c.hidden_dim = 192;
    c.n_heads = 3;
    c.mlp_dim = 768;
    c.n_layers = n_layers;
    c.patch_input_dim = patch_input_dim;
    c.max_patches = max_patches;
    c.n_classes = n_classes;
    c.posenc.strategy = posenc;
    c.posenc.hidden_dim = c.hidden_dim;
    c.posenc.max_positions = max_patches;
    return c;
}

EncoderParams init_encoder_params(const EncoderConfig& cfg, unsigned long long seed) {
    check(cfg.hidden_dim % cfg.n_heads == 0, "hidden_dim must be divisible by n_heads");
    check(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0, "dropout_rate in [0,1)");
    Rng rng(seed);
    const int h = cfg.hidden_dim;
    EncoderParams p;
    p.patch_proj_w = Mat(cfg.patch_input_dim, h);
    fan_in_init(p.patch_proj_w, cfg.patch_input_dim, rng);
    p.patch_proj_b = Mat(1, h);
    p.cls_token = Mat(1, h);
    p.posenc = init_posenc_params(cfg.posenc, rng());
    p.layers.resize(cfg.n_layers);
    for (auto& l : p.layers) {
        l.ln1_gamma = Mat(1, h);
        std::fill(l.ln1_gamma.v.begin(), l.ln1_gamma.v.end(), 1.0);
        l.ln1_beta = Mat(1, h);
        l.wq = Mat(h, h);
        l.wk = Mat(h, h);
        l.wv = Mat(h, h);
        l.wo = Mat(h, h);
        fan_in_init(l.wq, h, rng);
        fan_in_init(l.wk, h, rng);
        fan_in_init(l.wv, h, rng);
        fan_in_init(l.wo, h, rng);
        l.bq = Mat(1, h);
        l.bk = Mat(1, h);
        l.bv = Mat(1, h);
        l.bo = Mat(1, h);
        l.ln2_gamma = Mat(1, h);
        std::fill(l.ln2_gamma.v.begin(), l.ln2_gamma.v.end(), 1.0);
        l.ln2_beta = Mat(1, h);
        l.w1 = Mat(h, cfg.mlp_dim);
        fan_in_init(l.w1, h, rng);
        l.b1 = Mat(1, cfg.mlp_dim);
        l.w2 = Mat(cfg.mlp_dim, h);
        fan_in_init(l.w2, cfg.mlp_dim, rng);
        l.b2 = Mat(1, h);
    }
    p.lnf_gamma = Mat(1, h);
    std::fill(p.lnf_gamma.v.begin(), p.lnf_gamma.v.end(), 1.0);
    p.lnf_beta = Mat(1, h);
    p.head_w = Mat(h, cfg.n_classes);
    fan_in_init(p.head_w, h, rng);
    p.head_b = Mat(1, cfg.n_classes);
    return p;
}

EncoderParams zero_encoder_grads(const EncoderConfig& cfg) {
    const int h = cfg.hidden_dim;
    EncoderParams g;
    g.patch_proj_w = Mat(cfg.patch_input_dim, h);
    g.patch_proj_b = Mat(1, h);
    g.cls_token = Mat(1, h);
    g.posenc = zero_posenc_grads(cfg.posenc);
    g.layers.resize(cfg.n_layers);
    for (auto& l : g.layers) {
        l.ln1_gamma = Mat(1, h);
        l.ln1_beta = Mat(1, h);
        l.wq = Mat(h, h);
        l.wk = Mat(h, h);
        l.wv = Mat(h, h);
        l.wo = Mat(h, h);
        l.bq = Mat(1, h);
        l.bk = Mat(1, h);
        l.bv = Mat(1, h);
        l.bo = Mat(1, h);
        l.ln2_gamma = Mat(1, h);
        l.ln2_beta = Mat(1, h);
        l.w1 = Mat(h, cfg.mlp_dim);
        l.b1 = Mat(1, cfg.mlp_dim);
        l.w2 = Mat(cfg.mlp_dim, h);
        l.b2 = Mat(1, h);
    }
    g.lnf_gamma = Mat(1, h);
    g.lnf_beta = Mat(1, h);
    g.head_w = Mat(h, cfg.n_classes);
    g.head_b = Mat(1, cfg.n_classes);
    return g;
}

void for_each_param(const EncoderConfig& cfg, EncoderParams& p,
                    const std::function<void(const std::string&, Mat&)>& fn) {
    fn("patch_proj_w", p.patch_proj_w);
    fn("patch_proj_b", p.patch_proj_b);
    fn("cls_token", p.cls_token);
    switch (cfg.posenc.strategy) {
        case PosEncStrategy::kBert:
            fn("posenc.bert_table", p.posenc.bert_table);
            break;
        case PosEncStrategy::kLinearXY:
            fn("posenc.linear_map", p.posenc.linear_map);
            fn("posenc.linear_bias", p.posenc.linear_bias);
            break;
        case PosEncStrategy::kSinCosXY:
            fn("posenc.mixer", p.posenc.mixer);
            break;
    }
    for (size_t i = 0; i < p.layers.size(); ++i) {
        auto& l = p.layers[i];
        const std::string pre = "layer" + std::to_string(i) + ".";
        fn(pre + "ln1_gamma", l.ln1_gamma);
        fn(pre + "ln1_beta", l.ln1_beta);
        fn(pre + "wq", l.wq);
        fn(pre + "bq", l.bq);
        fn(pre + "wk", l.wk);
        fn(pre + "bk", l.bk);
        fn(pre + "wv", l.wv);
        fn(pre + "bv", l.bv);
        fn(pre + "wo", l.wo);
        fn(pre + "bo", l.bo);
        fn(pre + "ln2_gamma", l.ln2_gamma);
        fn(pre + "ln2_beta", l.ln2_beta);
        fn(pre + "w1", l.w1);
        fn(pre + "b1", l.b1);
        fn(pre + "w2", l.w2);
        fn(pre + "b2", l.b2);
    }
    fn("lnf_gamma", p.lnf_gamma);
    fn("lnf_beta", p.lnf_beta);
    fn("head_w", p.head_w);
    fn("head_b", p.head_b);
}

size_t encoder_param_count(const EncoderConfig& cfg) {
    EncoderParams p = zero_encoder_grads(cfg);
    size_t n = 0;
    for_each_param(cfg, p, [&](const std::string&, Mat& m) { n += m.size(); });
    return n;
}

std::vector<std::string> encoder_op_sequence(const EncoderConfig& cfg) {
    std::vector<std::string> ops;
    auto num = [](int v) { return std::to_string(v); };
    ops.push_back("patch_embed linear " + num(cfg.patch_input_dim) + "->" +
                  num(cfg.hidden_dim));
    switch (cfg.posenc.strategy) {
        case PosEncStrategy::kBert:
            ops.push_back("add_posenc learned_table " + num(cfg.posenc.max_positions) +
                          "x" + num(cfg.hidden_dim));
            break;
        case PosEncStrategy::kLinearXY:
            ops.push_back("add_posenc linear_xy 2->" + num(cfg.hidden_dim));
            break;
        case PosEncStrategy::kSinCosXY:
            ops.push_back("add_posenc sincos_xy mixer " + num(cfg.hidden_dim) + "x" +
                          num(cfg.hidden_dim));
            break;
    }
    ops.push_back("prepend_cls_token " + num(cfg.hidden_dim));
    ops.push_back("dropout");
    for (int l = 0; l < cfg.n_layers; ++l) {
        ops.push_back("layer_norm " + num(cfg.hidden_dim));
        ops.push_back("masked_multi_head_attention heads=" + num(cfg.n_heads) +
                      " dim=" + num(cfg.hidden_dim));
        ops.push_back("dropout");
        ops.push_back("residual_add");
        ops.push_back("layer_norm " + num(cfg.hidden_dim));
        ops.push_back("mlp " + num(cfg.hidden_dim) + "->" + num(cfg.mlp_dim) +
                      "->" + num(cfg.hidden_dim) + " gelu");
        ops.push_back("residual_add");
    }
    ops.push_back("layer_norm " + num(cfg.hidden_dim));
    ops.push_back("extract_cls_token");
    ops.push_back("head linear " + num(cfg.hidden_dim) + "->" + num(cfg.n_classes));
    return ops;
}

namespace {

// Masked softmax attention for one (image, head). Masked weights are exact
// zeros; every row has a true diagonal so the softmax is well defined.
void attention_image(const double* q, const double* k, const double* v,
                     const AttentionMask& mask, double* attn, double* ctx,
                     int seq, int n_heads, int head_dim, int hidden) {
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
    std::vector<double> score(seq);
    for (int t = 0; t < n_heads; ++t) {
        const int off = t * head_dim;
        double* attn_h = attn + static_cast<size_t>(t) * seq * seq;
        for (int i = 0; i < seq; ++i) {
            const double* qi = q + static_cast<size_t>(i) * hidden + off;
            double mx = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < seq; ++j) {
                if (!mask.at(i, j)) continue;
                const double* kj = k + static_cast<size_t>(j) * hidden + off;
                double s = 0.0;
                for (int c = 0; c < head_dim; ++c) s += qi[c] * kj[c];
                s *= inv_sqrt;
                score[j] = s;
                if (s > mx) mx = s;
            }
            double sum = 0.0;
            double* wrow = attn_h + static_cast<size_t>(i) * seq;
            for (int j = 0; j < seq; ++j) {
                if (mask.at(i, j)) {
                    const double e = std::exp(score[j] - mx);
                    wrow[j] = e;
                    sum += e;
                } else {
                    wrow[j] = 0.0;
                }
            }
            const double inv = 1.0 / sum;
            double* ci = ctx + static_cast<size_t>(i) * hidden + off;
            std::memset(ci, 0, sizeof(double) * head_dim);
            for (int j = 0; j < seq; ++j) {
                if (!mask.at(i, j)) continue;
                wrow[j] *= inv;
                const double w = wrow[j];
                const double* vj = v + static_cast<size_t>(j) * hidden + off;
                for (int c = 0; c < head_dim; ++c) ci[c] += w * vj[c];
            }
        }
    }
}

void attention_image_backward(const double* q, const double* k, const double* v,
                              const AttentionMask& mask, const double* attn,
                              const double* dctx, double* dq, double* dk,
                              double* dv, int seq, int n_heads, int head_dim,
                              int hidden) {
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
    std::vector<double> dw(seq);
    for (int t = 0; t < n_heads; ++t) {
        const int off = t * head_dim;
        const double* attn_h = attn + static_cast<size_t>(t) * seq * seq;
        for (int i = 0; i < seq; ++i) {
            const double* dci = dctx + static_cast<size_t>(i) * hidden + off;
            const double* wrow = attn_h + static_cast<size_t>(i) * seq;
            double r = 0.0;
            for (int j = 0; j < seq; ++j) {
                if (!mask.at(i, j)) continue;
                const double* vj = v + static_cast<size_t>(j) * hidden + off;
                double d = 0.0;
                for (int c = 0; c < head_dim; ++c) d += dci[c] * vj[c];
                dw[j] = d;
                r += wrow[j] * d;
            }
            const double* qi = q + static_cast<size_t>(i) * hidden + off;
            double* dqi = dq + static_cast<size_t>(i) * hidden + off;
            for (int j = 0; j < seq; ++j) {
                if (!mask.at(i, j)) continue;
                const double w = wrow[j];
                const double ds = w * (dw[j] - r) * inv_sqrt;
                const double* kj = k + static_cast<size_t>(j) * hidden + off;
                double* dkj = dk + static_cast<size_t>(j) * hidden + off;
                double* dvj = dv + static_cast<size_t>(j) * hidden + off;
                for (int c = 0; c < head_dim; ++c) {
                    dqi[c] += ds * kj[c];
                    dkj[c] += ds * qi[c];
                    dvj[c] += w * dci[c];
                }
            }
        }
    }
}

}  // namespace

ForwardOutput encoder_forward(const std::vector<EncoderInput>& batch,
                              const EncoderParams& params,
                              const EncoderConfig& cfg, bool training,
                              Rng* dropout_rng, ForwardCache* cache) {
    const int B = static_cast<int>(batch.size());
    check(B > 0, "encoder_forward: empty batch");
    const int s = cfg.seq_len();
    const int h = cfg.hidden_dim;
    const int N = B * s;
    check(!training || dropout_rng != nullptr,
          "encoder_forward: training mode needs a dropout rng");

    ForwardCache local;
    ForwardCache& cc = cache ? *cache : local;
    cc = ForwardCache{};
    cc.batch = B;
    cc.seq = s;
    cc.n_heads_ = cfg.n_heads;
    cc.masks.resize(B);

    // Gather present patch slots across the batch.
    for (int b = 0; b < B; ++b) {
        const EncoderInput& in = batch[b];
        check(in.patchset && in.mask, "encoder_forward: null input");
        check(in.patchset->max_patches == cfg.max_patches,
              "encoder_forward: patchset/max_patches mismatch");
        check(in.mask->dim == s, "encoder_forward: mask dimension mismatch");
        check(static_cast<int>(in.patchset->patch_stride()) +
                      static_cast<int>(in.patchset->mask_stride()) ==
                  cfg.patch_input_dim,
              "encoder_forward: patch_input_dim mismatch");
        cc.masks[b] = in.mask;
        for (int i = 0; i < cfg.max_patches; ++i)
            if (in.patchset->present[i]) {
                cc.present_token_rows.push_back(b * s + i + 1);
                cc.bert_indices.push_back(
                    in.bert_indices.empty() ? i : in.bert_indices[i]);
            }
    }
    const int P = static_cast<int>(cc.present_token_rows.size());
    cc.flat_inputs = Mat(P, cfg.patch_input_dim);
    cc.centers = Mat(P, 2);
    {
        int r = 0;
        for (int b = 0; b < B; ++b) {
            const SuperpixelPatchSet& ps = *batch[b].patchset;
            const size_t pstride = ps.patch_stride(), mstride = ps.mask_stride();
            for (int i = 0; i < cfg.max_patches; ++i) {
                if (!ps.present[i]) continue;
                double* dst = cc.flat_inputs.row(r);
                const float* pp = ps.patches.data() + i * pstride;
                for (size_t e = 0; e < pstride; ++e) dst[e] = pp[e];
                const uint8_t* mm = ps.patch_present.data() + i * mstride;
                for (size_t e = 0; e < mstride; ++e) dst[pstride + e] = mm[e];
                cc.centers(r, 0) = ps.centers[2 * i];
                cc.centers(r, 1) = ps.centers[2 * i + 1];
                ++r;
            }
        }
    }

    // Content embedding + positional encoding for present slots only; absent
    // slots stay zero so padding content can never reach the network.
    Mat patch_emb(P, h);
    if (P > 0) {
        kernels::matmul(cc.flat_inputs.data(), params.patch_proj_w.data(),
                        patch_emb.data(), P, cfg.patch_input_dim, h);
        add_bias(patch_emb, params.patch_proj_b);
        Mat pos;
        switch (cfg.posenc.strategy) {
            case PosEncStrategy::kBert:
                pos = encode_bert(cc.bert_indices, params.posenc);
                break;
            case PosEncStrategy::kLinearXY:
                pos = encode_linear_xy(cc.centers, params.posenc);
                break;
            case PosEncStrategy::kSinCosXY:
                pos = encode_sincos_xy(cc.centers, params.posenc, cfg.posenc,
                                       &cc.sincos_pre);
                break;
        }
        for (size_t e = 0; e < patch_emb.size(); ++e) patch_emb.v[e] += pos.v[e];
    }

    Mat x(N, h);
    for (int b = 0; b < B; ++b)
        std::copy(params.cls_token.v.begin(), params.cls_token.v.end(),
                  x.row(b * s));
    for (int r = 0; r < P; ++r)
        std::copy(patch_emb.row(r), patch_emb.row(r) + h,
                  x.row(cc.present_token_rows[r]));
    if (training && cfg.dropout_rate > 0.0)
        apply_dropout(x, cfg.dropout_rate, *dropout_rng, cc.emb_drop);
    cc.x0 = x;

    cc.layers.resize(cfg.n_layers);
    for (int l = 0; l < cfg.n_layers; ++l) {
        const EncoderLayerParams& lp = params.layers[l];
        ForwardCache::Layer& lc = cc.layers[l];
        lc.x_in = x;
        lc.ln1_out = Mat(N, h);
        lc.ln1_mean.resize(N);
        lc.ln1_rstd.resize(N);
        kernels::layer_norm(lc.x_in.data(), lp.ln1_gamma.data(), lp.ln1_beta.data(),
                            lc.ln1_out.data(), lc.ln1_mean.data(),
                            lc.ln1_rstd.data(), N, h);
        lc.q = Mat(N, h);
        lc.k = Mat(N, h);
        lc.v = Mat(N, h);
        kernels::matmul(lc.ln1_out.data(), lp.wq.data(), lc.q.data(), N, h, h);
        kernels::matmul(lc.ln1_out.data(), lp.wk.data(), lc.k.data(), N, h, h);
        kernels::matmul(lc.ln1_out.data(), lp.wv.data(), lc.v.data(), N, h, h);
        add_bias(lc.q, lp.bq);
        add_bias(lc.k, lp.bk);
        add_bias(lc.v, lp.bv);
        lc.attn.assign(static_cast<size_t>(B) * cfg.n_heads * s * s, 0.0);
        lc.ctx = Mat(N, h);
#pragma omp parallel for schedule(static)
        for (int b = 0; b < B; ++b)
            attention_image(lc.q.row(b * s), lc.k.row(b * s), lc.v.row(b * s),
                            *cc.masks[b],
                            lc.attn.data() +
                                static_cast<size_t>(b) * cfg.n_heads * s * s,
                            lc.ctx.row(b * s), s, cfg.n_heads, cfg.head_dim(), h);
        Mat attn_out(N, h);
        kernels::matmul(lc.ctx.data(), lp.wo.data(), attn_out.data(), N, h, h);
        add_bias(attn_out, lp.bo);
        if (training && cfg.dropout_rate > 0.0)
            apply_dropout(attn_out, cfg.dropout_rate, *dropout_rng, lc.attn_drop);
        for (size_t e = 0; e < x.size(); ++e) x.v[e] += attn_out.v[e];
        lc.x_mid = x;

        lc.ln2_out = Mat(N, h);
        lc.ln2_mean.resize(N);
        lc.ln2_rstd.resize(N);
        kernels::layer_norm(lc.x_mid.data(), lp.ln2_gamma.data(), lp.ln2_beta.data(),
                            lc.ln2_out.data(), lc.ln2_mean.data(),
                            lc.ln2_rstd.data(), N, h);
        lc.z1 = Mat(N, cfg.mlp_dim);
        kernels::matmul(lc.ln2_out.data(), lp.w1.data(), lc.z1.data(), N, h,
                        cfg.mlp_dim);
        add_bias(lc.z1, lp.b1);
        lc.g1d = Mat(N, cfg.mlp_dim);
        kernels::gelu_forward(lc.z1.data(), lc.g1d.data(), lc.z1.size());
        if (training && cfg.dropout_rate > 0.0)
            apply_dropout(lc.g1d, cfg.dropout_rate, *dropout_rng, lc.mlp_drop1);
        Mat m2(N, h);
        kernels::matmul(lc.g1d.data(), lp.w2.data(), m2.data(), N, cfg.mlp_dim, h);
        add_bias(m2, lp.b2);
        if (training && cfg.dropout_rate > 0.0)
            apply_dropout(m2, cfg.dropout_rate, *dropout_rng, lc.mlp_drop2);
        for (size_t e = 0; e < x.size(); ++e) x.v[e] += m2.v[e];
    }

    cc.x_final = x;
    cc.lnf_out = Mat(N, h);
    cc.lnf_mean.resize(N);
    cc.lnf_rstd.resize(N);
    kernels::layer_norm(cc.x_final.data(), params.lnf_gamma.data(),
                        params.lnf_beta.data(), cc.lnf_out.data(),
                        cc.lnf_mean.data(), cc.lnf_rstd.data(), N, h);

    Mat cls(B, h);
    for (int b = 0; b < B; ++b)
        std::copy(cc.lnf_out.row(b * s), cc.lnf_out.row(b * s) + h, cls.row(b));
    ForwardOutput out;
    out.logits = Mat(B, cfg.n_classes);
    kernels::matmul(cls.data(), params.head_w.data(), out.logits.data(), B, h,
                    cfg.n_classes);
    add_bias(out.logits, params.head_b);
    for (double v : out.logits.v)
        check(std::isfinite(v), "encoder_forward: non-finite logits");
    return out;
}

void encoder_backward(const Mat& dlogits, const ForwardCache& cc,
                      const EncoderParams& params, const EncoderConfig& cfg,
                      EncoderParams& grads) {
    const int B = cc.batch, s = cc.seq, h = cfg.hidden_dim;
    const int N = B * s;
    check(dlogits.rows == B && dlogits.cols == cfg.n_classes,
          "encoder_backward: dlogits shape mismatch");
    check(cc.layers.size() == static_cast<size_t>(cfg.n_layers),
          "encoder_backward: cache/config mismatch");

    // Classification head.
    Mat cls(B, h);
    for (int b = 0; b < B; ++b)
        std::copy(cc.lnf_out.row(b * s), cc.lnf_out.row(b * s) + h, cls.row(b));
    kernels::matmul_tn_acc(cls.data(), dlogits.data(), grads.head_w.data(), B, h,
                           cfg.n_classes);
    bias_grad(dlogits, grads.head_b);
    Mat dcls(B, h);
    kernels::matmul_nt(dlogits.data(), params.head_w.data(), dcls.data(), B,
                       cfg.n_classes, h);
    Mat dlnf(N, h);
    for (int b = 0; b < B; ++b)
        std::copy(dcls.row(b), dcls.row(b) + h, dlnf.row(b * s));

    Mat dx(N, h);
    kernels::layer_norm_backward(cc.x_final.data(), params.lnf_gamma.data(),
                                 cc.lnf_mean.data(), cc.lnf_rstd.data(),
                                 dlnf.data(), dx.data(), grads.lnf_gamma.data(),
                                 grads.lnf_beta.data(), N, h);

    for (int l = cfg.n_layers - 1; l >= 0; --l) {
        const EncoderLayerParams& lp = params.layers[l];
        EncoderLayerParams& lg = grads.layers[l];
        const ForwardCache::Layer& lc = cc.layers[l];

        // MLP block.
        Mat dm2 = dx;
        dropout_backward(dm2, cfg.dropout_rate, lc.mlp_drop2);
        kernels::matmul_tn_acc(lc.g1d.data(), dm2.data(), lg.w2.data(), N,
                               cfg.mlp_dim, h);
        bias_grad(dm2, lg.b2);
        Mat dg1(N, cfg.mlp_dim);
        kernels::matmul_nt(dm2.data(), lp.w2.data(), dg1.data(), N, h, cfg.mlp_dim);
        dropout_backward(dg1, cfg.dropout_rate, lc.mlp_drop1);
        Mat dz1(N, cfg.mlp_dim);
        kernels::gelu_backward(lc.z1.data(), dg1.data(), dz1.data(), dz1.size());
        kernels::matmul_tn_acc(lc.ln2_out.data(), dz1.data(), lg.w1.data(), N, h,
                               cfg.mlp_dim);
        bias_grad(dz1, lg.b1);
        Mat dln2(N, h);
        kernels::matmul_nt(dz1.data(), lp.w1.data(), dln2.data(), N, cfg.mlp_dim, h);
        Mat dx_mid(N, h);
        kernels::layer_norm_backward(lc.x_mid.data(), lp.ln2_gamma.data(),
                                     lc.ln2_mean.data(), lc.ln2_rstd.data(),
                                     dln2.data(), dx_mid.data(),
                                     lg.ln2_gamma.data(), lg.ln2_beta.data(), N, h);
        for (size_t e = 0; e < dx.size(); ++e) dx_mid.v[e] += dx.v[e];

        // Attention block.
        Mat dattn_out = dx_mid;
        dropout_backward(dattn_out, cfg.dropout_rate, lc.attn_drop);
        kernels::matmul_tn_acc(lc.ctx.data(), dattn_out.data(), lg.wo.data(), N, h, h);
        bias_grad(dattn_out, lg.bo);
        Mat dctx(N, h);
        kernels::matmul_nt(dattn_out.data(), lp.wo.data(), dctx.data(), N, h, h);

        Mat dq(N, h), dk(N, h), dv(N, h);
#pragma omp parallel for schedule(static)
        for (int b = 0; b < B; ++b)
            attention_image_backward(
                lc.q.row(b * s), lc.k.row(b * s), lc.v.row(b * s), *cc.masks[b],
                lc.attn.data() + static_cast<size_t>(b) * cfg.n_heads * s * s,
                dctx.row(b * s), dq.row(b * s), dk.row(b * s), dv.row(b * s), s,
                cfg.n_heads, cfg.head_dim(), h);

        kernels::matmul_tn_acc(lc.ln1_out.data(), dq.data(), lg.wq.data(), N, h, h);
        kernels::matmul_tn_acc(lc.ln1_out.data(), dk.data(), lg.wk.data(), N, h, h);
        kernels::matmul_tn_acc(lc.ln1_out.data(), dv.data(), lg.wv.data(), N, h, h);
        bias_grad(dq, lg.bq);
        bias_grad(dk, lg.bk);
        bias_grad(dv, lg.bv);
        Mat dln1(N, h), tmp(N, h);
        kernels::matmul_nt(dq.data(), lp.wq.data(), dln1.data(), N, h, h);
        kernels::matmul_nt(dk.data(), lp.wk.data(), tmp.data(), N, h, h);
        for (size_t e = 0; e < dln1.size(); ++e) dln1.v[e] += tmp.v[e];
        kernels::matmul_nt(dv.data(), lp.wv.data(), tmp.data(), N, h, h);
        for (size_t e = 0; e < dln1.size(); ++e) dln1.v[e] += tmp.v[e];
        Mat dx_in(N, h);
        kernels::layer_norm_backward(lc.x_in.data(), lp.ln1_gamma.data(),
                                     lc.ln1_mean.data(), lc.ln1_rstd.data(),
                                     dln1.data(), dx_in.data(), lg.ln1_gamma.data(),
                                     lg.ln1_beta.data(), N, h);
        for (size_t e = 0; e < dx.size(); ++e) dx.v[e] = dx_mid.v[e] + dx_in.v[e];
    }

    // Embedding and positional encodings.
    Mat dx0 = dx;
    dropout_backward(dx0, cfg.dropout_rate, cc.emb_drop);
    for (int b = 0; b < B; ++b) {
        const double* r = dx0.row(b * s);
        for (int j = 0; j < h; ++j) grads.cls_token.v[j] += r[j];
    }
    const int P = static_cast<int>(cc.present_token_rows.size());
    if (P > 0) {
        Mat dpe(P, h);
        for (int r = 0; r < P; ++r)
            std::copy(dx0.row(cc.present_token_rows[r]),
                      dx0.row(cc.present_token_rows[r]) + h, dpe.row(r));
        kernels::matmul_tn_acc(cc.flat_inputs.data(), dpe.data(),
                               grads.patch_proj_w.data(), P, cfg.patch_input_dim, h);
        bias_grad(dpe, grads.patch_proj_b);
        posenc_backward(cfg.posenc, params.posenc, cc.bert_indices, cc.centers,
                        cc.sincos_pre, dpe, grads.posenc);
    }
}

}  // namespace spt
