// Acceptance gate: one pass/fail line per criterion. The two training
// criteria run real FashionMNIST cells and dominate the runtime.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "spt/runner.hpp"

using namespace spt;
namespace fsys = std::filesystem;

namespace {

std::string g_data_root;

Image random_image(int h, int w, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    Image img(h, w);
    for (auto& v : img.data) v = d(rng);
    return img;
}

SegmentMask random_voronoi(int h, int w, int n_seeds, std::mt19937_64& rng) {
    std::set<std::pair<int, int>> used;
    std::vector<std::pair<int, int>> seeds;
    while (static_cast<int>(seeds.size()) < n_seeds) {
        const std::pair<int, int> p{static_cast<int>(rng() % h),
                                    static_cast<int>(rng() % w)};
        if (used.insert(p).second) seeds.push_back(p);
    }
    SegmentMask m;
    m.height = h;
    m.width = w;
    m.n_segments = n_seeds;
    m.labels.resize(static_cast<size_t>(h) * w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int best = 0;
            long long bd = 1LL << 60;
            for (int s = 0; s < n_seeds; ++s) {
                const long long d =
                    static_cast<long long>(y - seeds[s].first) * (y - seeds[s].first) +
                    static_cast<long long>(x - seeds[s].second) * (x - seeds[s].second);
                if (d < bd) {
                    bd = d;
                    best = s;
                }
            }
            m.at(y, x) = best;
        }
    return m;
}

using EdgeSet = std::set<std::pair<int, int>>;

EdgeSet rag_oracle(const SegmentMask& m) {
    EdgeSet edges;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            if (x + 1 < m.width && m.at(y, x) != m.at(y, x + 1))
                edges.insert({std::min(m.at(y, x), m.at(y, x + 1)),
                              std::max(m.at(y, x), m.at(y, x + 1))});
            if (y + 1 < m.height && m.at(y, x) != m.at(y + 1, x))
                edges.insert({std::min(m.at(y, x), m.at(y + 1, x)),
                              std::max(m.at(y, x), m.at(y + 1, x))});
        }
    return edges;
}

EdgeSet knn_oracle(const std::vector<double>& centers,
                   const std::vector<uint8_t>& present, int k) {
    const int n = static_cast<int>(present.size());
    EdgeSet edges;
    for (int i = 0; i < n; ++i) {
        if (!present[i]) continue;
        std::vector<std::pair<double, int>> cand;
        for (int j = 0; j < n; ++j) {
            if (j == i || !present[j]) continue;
            const double dy = centers[2 * i] - centers[2 * j];
            const double dx = centers[2 * i + 1] - centers[2 * j + 1];
            cand.push_back({dy * dy + dx * dx, j});
        }
        std::sort(cand.begin(), cand.end());
        for (int t = 0; t < std::min<int>(k, cand.size()); ++t)
            edges.insert({std::min(i, cand[t].second), std::max(i, cand[t].second)});
    }
    return edges;
}

bool criterion1_graph_oracles(std::string& detail) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const int h = 4 + static_cast<int>(rng() % 29);
        const int w = 4 + static_cast<int>(rng() % 29);
        const int seeds = 2 + static_cast<int>(rng() % 23);
        const SegmentMask m = random_voronoi(h, w, seeds, rng);
        const auto got = build_rag(m);
        if (EdgeSet(got.edges.begin(), got.edges.end()) != rag_oracle(m)) {
            detail = "rag mismatch on trial " + std::to_string(trial);
            return false;
        }
    }
    std::uniform_real_distribution<double> d(0, 32);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 63);
        std::vector<double> centers(2 * n);
        for (auto& c : centers) c = d(rng);
        std::vector<uint8_t> present(n);
        for (auto& p : present) p = rng() % 5 ? 1 : 0;
        for (int k : {1, 5, 15}) {
            const auto got = build_knn(centers, present, k);
            if (EdgeSet(got.edges.begin(), got.edges.end()) !=
                knn_oracle(centers, present, k)) {
                detail = "knn mismatch, n=" + std::to_string(n) +
                         " k=" + std::to_string(k);
                return false;
            }
        }
    }
    detail = "200 rag masks + 40 knn point sets, k in {1,5,15}";
    return true;
}

// Tiny five-patch fixture shared by the encoder criteria.
struct Tiny {
    SuperpixelPatchSet patchset;
    AttentionMask mask;
    EncoderConfig cfg;

    Tiny(GraphStrategy graph, PosEncStrategy posenc, unsigned seed) {
        std::mt19937_64 rng(seed);
        const Image img = random_image(4, 4, rng);
        SegmentMask seg;
        seg.height = seg.width = 4;
        seg.n_segments = 4;
        seg.labels.resize(16);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) seg.at(y, x) = (y / 2) * 2 + x / 2;
        PatchConfig pc{5, 2, 2, 2};
        patchset = get_superpixel_patches(img, seg, pc);
        ConnectivityGraph g;
        switch (graph) {
            case GraphStrategy::kFcg: g = build_fcg(patchset.present); break;
            case GraphStrategy::kRag: g = build_rag(seg); break;
            case GraphStrategy::kKnn:
                g = build_knn(patchset.centers, patchset.present, 2);
                break;
        }
        g.n_nodes = 5;
        mask = to_attention_mask(g, patchset.present);
        cfg.hidden_dim = 8;
        cfg.n_layers = 2;
        cfg.n_heads = 2;
        cfg.mlp_dim = 16;
        cfg.n_classes = 3;
        cfg.dropout_rate = 0.0;
        cfg.patch_input_dim = 16;
        cfg.max_patches = 5;
        cfg.posenc.strategy = posenc;
        cfg.posenc.hidden_dim = 8;
        cfg.posenc.max_positions = 5;
    }

    EncoderInput input() const {
        EncoderInput in;
        in.patchset = &patchset;
        in.mask = &mask;
        return in;
    }
};

std::vector<Mat*> param_list(const EncoderConfig& cfg, EncoderParams& p) {
    std::vector<Mat*> mats;
    for_each_param(cfg, p, [&](const std::string&, Mat& m) { mats.push_back(&m); });
    return mats;
}

bool criterion2_gradient_fidelity(std::string& detail) {
    Tiny fx(GraphStrategy::kRag, PosEncStrategy::kSinCosXY, 2);
    EncoderParams p = init_encoder_params(fx.cfg, 3);
    Mat dlogits(1, 3);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(-1, 1);
    for (auto& v : dlogits.v) v = d(rng);
    // check at a generic point: the all-zero cls row makes the first layer
    // norm degenerate, which breaks the finite-difference oracle (not the
    // analytic gradient)
    for (auto& v : p.cls_token.v) v = 0.02 * d(rng);

    ForwardCache cache;
    Rng drng(0);
    encoder_forward({fx.input()}, p, fx.cfg, true, &drng, &cache);
    EncoderParams grads = zero_encoder_grads(fx.cfg);
    encoder_backward(dlogits, cache, p, fx.cfg, grads);

    auto loss = [&]() {
        const ForwardOutput out =
            encoder_forward({fx.input()}, p, fx.cfg, false, nullptr, nullptr);
        double l = 0.0;
        for (int c = 0; c < 3; ++c) l += out.logits(0, c) * dlogits(0, c);
        return l;
    };

    auto pm = param_list(fx.cfg, p);
    auto gm = param_list(fx.cfg, grads);
    const double eps = 1e-5;
    int checked = 0;
    double worst = 0.0;
    std::mt19937_64 pick(5);
    while (checked < 220) {
        const size_t t = pick() % pm.size();
        if (pm[t]->v.empty()) continue;
        const size_t i = pick() % pm[t]->v.size();
        const double save = pm[t]->v[i];
        auto central = [&](double h) {
            pm[t]->v[i] = save + h;
            const double up = loss();
            pm[t]->v[i] = save - h;
            const double dn = loss();
            pm[t]->v[i] = save;
            return (up - dn) / (2 * h);
        };
        // Richardson extrapolation cancels the h^2 truncation term
        const double fd = (4 * central(eps / 2) - central(eps)) / 3;
        const double an = gm[t]->v[i];
        const double rel =
            std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
        worst = std::max(worst, rel);
        ++checked;
    }
    std::ostringstream ss;
    ss << checked << " sampled parameters, worst relative error " << worst;
    detail = ss.str();
    return worst < 1e-4;
}

bool criterion3_mask_exactness(std::string& detail) {
    for (GraphStrategy g :
         {GraphStrategy::kFcg, GraphStrategy::kKnn, GraphStrategy::kRag}) {
        Tiny fx(g, PosEncStrategy::kSinCosXY, 6 + static_cast<int>(g));
        EncoderParams p = init_encoder_params(fx.cfg, 7);
        ForwardCache cache;
        Rng rng(1);
        encoder_forward({fx.input()}, p, fx.cfg, true, &rng, &cache);
        for (int l = 0; l < fx.cfg.n_layers; ++l)
            for (int h = 0; h < fx.cfg.n_heads; ++h)
                for (int i = 0; i < cache.seq; ++i)
                    for (int j = 0; j < cache.seq; ++j)
                        if (!fx.mask.at(i, j) &&
                            cache.attn_weight(l, 0, h, i, j) != 0.0) {
                            detail = "nonzero masked weight, strategy " +
                                     to_string(g);
                            return false;
                        }
        // padding invariance, bitwise, eval mode
        const ForwardOutput ref =
            encoder_forward({fx.input()}, p, fx.cfg, false, nullptr, nullptr);
        Tiny fuzz = fx;
        std::mt19937_64 r2(8);
        std::uniform_real_distribution<double> d(-5, 5);
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < 2; ++y)
                for (int x = 0; x < 2; ++x)
                    fuzz.patchset.patch_at(4, c, y, x) = static_cast<float>(d(r2));
        fuzz.patchset.centers[8] = d(r2);
        fuzz.patchset.centers[9] = d(r2);
        const ForwardOutput out =
            encoder_forward({fuzz.input()}, p, fx.cfg, false, nullptr, nullptr);
        if (out.logits.v != ref.logits.v) {
            detail = "padding not bitwise invariant, strategy " + to_string(g);
            return false;
        }
    }
    detail = "all strategies, 2 layers x 2 heads, exact zeros + bitwise padding";
    return true;
}

bool criterion4_vit_reduction(std::string& detail) {
    EncoderConfig cfg;
    cfg.hidden_dim = 192;
    cfg.n_layers = 4;
    cfg.n_heads = 3;
    cfg.mlp_dim = 768;
    cfg.n_classes = 10;
    cfg.patch_input_dim = 4 * 4 * 4;
    cfg.max_patches = 49;
    cfg.posenc.strategy = PosEncStrategy::kBert;
    cfg.posenc.hidden_dim = 192;
    cfg.posenc.max_positions = 49;

    const size_t h = 192, mlp = 768, L = 4, n_cls = 10, pid = 64, npos = 49;
    const size_t per_layer =
        2 * h + 4 * (h * h + h) + 2 * h + h * mlp + mlp + mlp * h + h;
    const size_t expect =
        pid * h + h + h + npos * h + L * per_layer + 2 * h + h * n_cls + n_cls;
    if (encoder_param_count(cfg) != expect) {
        detail = "parameter count mismatch";
        return false;
    }
    std::vector<std::string> vit{"patch_embed linear 64->192",
                                 "add_posenc learned_table 49x192",
                                 "prepend_cls_token 192", "dropout"};
    for (int l = 0; l < 4; ++l) {
        vit.push_back("layer_norm 192");
        vit.push_back("masked_multi_head_attention heads=3 dim=192");
        vit.push_back("dropout");
        vit.push_back("residual_add");
        vit.push_back("layer_norm 192");
        vit.push_back("mlp 192->768->192 gelu");
        vit.push_back("residual_add");
    }
    vit.push_back("layer_norm 192");
    vit.push_back("extract_cls_token");
    vit.push_back("head linear 192->10");
    if (encoder_op_sequence(cfg) != vit) {
        detail = "op sequence differs from the reference ViT";
        return false;
    }
    detail = "parameter count and per-layer op sequence match the reference ViT";
    return true;
}

bool criterion5_sincos(std::string& detail) {
    for (int h : {8, 192}) {
        std::set<int> seen;
        size_t total = 0;
        for (int axis = 0; axis < 2; ++axis) {
            for (int j : sincos_cos_indices(axis, 2, h, false)) seen.insert(j);
            for (int j : sincos_sin_indices(axis, 2, h, false)) seen.insert(j);
            total += sincos_cos_indices(axis, 2, h, false).size() +
                     sincos_sin_indices(axis, 2, h, false).size();
        }
        if (seen.size() != static_cast<size_t>(h) ||
            total != static_cast<size_t>(h)) {
            detail = "index families do not partition [0," + std::to_string(h) + ")";
            return false;
        }
    }
    // d=1 scalar transcription
    PosEncConfig cfg;
    cfg.strategy = PosEncStrategy::kSinCosXY;
    cfg.n_axes = 1;
    for (int h : {8, 64}) {
        cfg.hidden_dim = h;
        PosEncParams p;
        p.mixer = Mat(h, h);
        for (int i = 0; i < h; ++i) p.mixer(i, i) = 1.0;
        for (double pos : {0.0, 1.0, 7.25, 13.5, 27.0}) {
            Mat centers(1, 1);
            centers(0, 0) = pos;
            const Mat out = encode_sincos_xy(centers, p, cfg);
            for (int j = 0; j < h; ++j) {
                const double dt = std::exp(j * (-std::log(10000.0) / h));
                const double expect =
                    (j % 2 == 0) ? std::cos(pos * dt) : std::sin(pos * dt);
                if (std::abs(out(0, j) - expect) > 1e-12) {
                    detail = "scalar transcription mismatch at h=" +
                             std::to_string(h) + " j=" + std::to_string(j);
                    return false;
                }
            }
        }
    }
    detail = "coverage partition for h in {8,192}; d=1 matches scalar to 1e-12";
    return true;
}

bool criterion6_patch_extraction(std::string& detail) {
    std::mt19937_64 rng(9);
    // grid masks: exact pixel conservation
    for (int trial = 0; trial < 20; ++trial) {
        const Image img = random_image(28, 28, rng);
        SegmentMask seg;
        seg.height = seg.width = 28;
        seg.n_segments = 49;
        seg.labels.resize(784);
        for (int y = 0; y < 28; ++y)
            for (int x = 0; x < 28; ++x) seg.at(y, x) = (y / 4) * 7 + x / 4;
        PatchConfig pc{49, 4, 4, 4};
        const SuperpixelPatchSet ps = get_superpixel_patches(img, seg, pc);
        size_t bits = 0;
        for (uint8_t b : ps.patch_present) bits += b;
        if (bits != 784) {
            detail = "grid pixel conservation failed";
            return false;
        }
        // the copied content must equal the source blocks exactly
        for (int i = 0; i < 49; ++i) {
            const int oy = (i / 7) * 4, ox = (i % 7) * 4;
            for (int c = 0; c < 3; ++c)
                for (int y = 0; y < 4; ++y)
                    for (int x = 0; x < 4; ++x)
                        if (ps.patch_at(i, c, y, x) !=
                            static_cast<float>(img.at(c, oy + y, ox + x))) {
                            detail = "grid patch content mismatch";
                            return false;
                        }
        }
    }
    // slic masks: clipping recount oracle
    SlicConfig slic;
    slic.k = 49;
    slic.spacing = 4;
    for (int trial = 0; trial < 100; ++trial) {
        const Image img = random_image(28, 28, rng);
        const SegmentMask seg = slic0_segments(img, slic);
        PatchConfig pc{2 * slic.k, 12, 12, 12};
        const SuperpixelPatchSet ps = get_superpixel_patches(img, seg, pc);
        for (int s = 0; s < seg.n_segments; ++s) {
            // brute-force recount of segment pixels inside the search box
            int ymin = 1 << 30, ymax = -1, xmin = 1 << 30, xmax = -1;
            for (int y = 0; y < 28; ++y)
                for (int x = 0; x < 28; ++x)
                    if (seg.at(y, x) == s) {
                        ymin = std::min(ymin, y);
                        ymax = std::max(ymax, y);
                        xmin = std::min(xmin, x);
                        xmax = std::max(xmax, x);
                    }
            auto start = [&](double c) {
                int lo = static_cast<int>(std::floor(c - 6.0 + 0.5));
                lo = std::max(0, std::min(lo, 28 - 12));
                return lo;
            };
            const int y0 = start(ymin + (ymax - ymin) / 2.0);
            const int x0 = start(xmin + (xmax - xmin) / 2.0);
            int expect = 0;
            for (int y = y0; y < y0 + 12; ++y)
                for (int x = x0; x < x0 + 12; ++x)
                    if (seg.at(y, x) == s) ++expect;
            int got = 0;
            for (int y = 0; y < 12; ++y)
                for (int x = 0; x < 12; ++x) got += ps.mask_at(s, y, x);
            if (got != expect) {
                detail = "clipping recount mismatch, trial " +
                         std::to_string(trial) + " segment " + std::to_string(s);
                return false;
            }
        }
    }
    detail = "20 grid images conserve all pixels; 100 slic images match the recount";
    return true;
}

RunConfig proxy_config(const std::string& out_dir) {
    RunConfig cfg;
    cfg.dataset = "fashionmnist";
    cfg.data_root = g_data_root;
    cfg.out_dir = out_dir;
    cfg.cache_dir = "acceptance_cache";
    cfg.hidden_dim = 64;
    cfg.n_layers = 4;
    cfg.n_heads = 2;
    cfg.mlp_dim = 128;
    cfg.train.n_epochs = 3;
    cfg.train.rng_seed = 0;
    cfg.train.zero_timing = true;
    cfg.eval_test = false;
    return cfg;
}

bool criterion7_training_proxy(std::string& detail) {
    RunConfig a = proxy_config("acceptance_runs/slic-sincos-rag");
    a.pre.superpixels = SuperpixelStrategy::kSlic;
    a.pre.graph = GraphStrategy::kRag;
    a.posenc = PosEncStrategy::kSinCosXY;
    fsys::remove_all(a.out_dir);
    const RunMetrics ma = run_single(a);

    RunConfig b = proxy_config("acceptance_runs/grid-bert-fcg");
    b.pre.superpixels = SuperpixelStrategy::kGrid;
    b.pre.graph = GraphStrategy::kFcg;
    b.posenc = PosEncStrategy::kBert;
    fsys::remove_all(b.out_dir);
    const RunMetrics mb = run_single(b);

    std::ostringstream ss;
    ss << "slic+sincos+rag best valid " << ma.best_valid_acc
       << " (need >= 0.80); grid+bert+fcg best valid " << mb.best_valid_acc
       << " (need >= 0.78)";
    detail = ss.str();
    return ma.best_valid_acc >= 0.80 && mb.best_valid_acc >= 0.78 &&
           ma.best_valid_acc > 0.5 && mb.best_valid_acc > 0.5;  // >> 10% baseline
}

bool criterion8_recipe(std::string& detail) {
    // NaN batch skip with bit-identical parameters
    DatasetSpec spec;
    spec.name = "toy";
    spec.channels = 1;
    spec.height = 8;
    spec.width = 8;
    spec.n_classes = 10;
    spec.spacing = 4;
    RawDataset raw;
    raw.channels = 1;
    raw.height = raw.width = 8;
    std::mt19937_64 rng(10);
    for (int i = 0; i < 8; ++i) {
        std::vector<uint8_t> img(64);
        for (auto& bb : img) bb = static_cast<uint8_t>(rng() % 256);
        raw.images.push_back(std::move(img));
        raw.labels.push_back(static_cast<uint8_t>(i % 10));
    }
    PreprocessConfig pre;
    pre.superpixels = SuperpixelStrategy::kGrid;
    pre.graph = GraphStrategy::kFcg;
    pre.spacing = 4;
    const PreparedDataset ds = prepare_dataset(raw, spec, pre, "toy", "");
    EncoderConfig enc =
        make_encoder_config(spec, pre, 8, 1, 2, 16, PosEncStrategy::kSinCosXY);
    enc.dropout_rate = 0.0;
    EncoderParams p = init_encoder_params(enc, 1);
    EncoderParams grads = zero_encoder_grads(enc);
    AdamState adam = init_adam_state(enc);
    TrainConfig t;
    t.microbatch = 4;
    BatchView batch = make_batch(ds, {0, 1, 2, 3});
    batch.storage[1].patchset.patches[3] =
        std::numeric_limits<float>::quiet_NaN();
    std::vector<std::vector<double>> before;
    for (Mat* m : param_list(enc, p)) before.push_back(m->v);
    Rng drng(0);
    const StepResult res = train_step(batch.inputs, batch.labels, p, grads, adam,
                                      enc, t, t.learning_rate, drng);
    auto after = param_list(enc, p);
    bool untouched = res.skipped;
    for (size_t i = 0; i < after.size(); ++i)
        if (after[i]->v != before[i]) untouched = false;
    if (!untouched) {
        detail = "NaN batch was not skipped cleanly";
        return false;
    }

    // plateau: patience = ceil(0.2 * 10) = 2 stagnant epochs on a flat metric
    TrainConfig pt;
    pt.n_epochs = 10;
    if (pt.plateau_patience() != 2) {
        detail = "patience rounding wrong";
        return false;
    }
    PlateauScheduler sched(pt.plateau_factor, pt.plateau_patience());
    double lr = 1e-3;
    lr = sched.observe(0.5, lr);  // first observation sets the best
    lr = sched.observe(0.5, lr);  // stagnant 1
    if (lr != 1e-3) {
        detail = "scheduler fired early";
        return false;
    }
    lr = sched.observe(0.5, lr);  // stagnant 2 -> fire
    if (std::abs(lr - 1e-4) > 1e-18) {
        detail = "scheduler did not fire after exactly `patience` epochs";
        return false;
    }

    // clipping bound
    EncoderParams big = zero_encoder_grads(enc);
    std::uniform_real_distribution<double> d(-0.5, 0.5);
    for (Mat* m : param_list(enc, big))
        for (auto& v : m->v) v = d(rng);
    clip_global_norm(enc, big, 1.0);
    double sq = 0.0;
    for (Mat* m : param_list(enc, big))
        for (double v : m->v) sq += v * v;
    if (std::sqrt(sq) > 1.0 + 1e-6) {
        detail = "post-clip norm exceeds the bound";
        return false;
    }
    detail = "NaN skip bit-exact; plateau fires at ceil(0.2*n); clip bound holds";
    return true;
}

bool criterion9_determinism(std::string& detail) {
    RunConfig a = proxy_config("acceptance_runs/slic-sincos-rag-rerun");
    a.pre.superpixels = SuperpixelStrategy::kSlic;
    a.pre.graph = GraphStrategy::kRag;
    a.posenc = PosEncStrategy::kSinCosXY;
    fsys::remove_all(a.out_dir);
    run_single(a);
    auto slurp = [](const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        std::ostringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    const std::string first = slurp("acceptance_runs/slic-sincos-rag/metrics.csv");
    const std::string second = slurp(a.out_dir + "/metrics.csv");
    if (first.empty() || first != second) {
        detail = "metrics CSVs differ between identical runs";
        return false;
    }
    detail = "two identical-seed runs produced byte-equal metrics CSVs";
    return true;
}

}  // namespace

int main() {
    const char* env = std::getenv("SPT_DATA_ROOT");
    g_data_root = env ? env : "/root/data";

    struct Criterion {
        const char* name;
        bool (*fn)(std::string&);
    };
    const Criterion criteria[] = {
        {"graph oracle equivalence", criterion1_graph_oracles},
        {"gradient fidelity", criterion2_gradient_fidelity},
        {"mask exactness + padding invariance", criterion3_mask_exactness},
        {"ViT structural reduction", criterion4_vit_reduction},
        {"sine-cosine encoding", criterion5_sincos},
        {"patch extraction conformance", criterion6_patch_extraction},
        {"desk-scale training proxy", criterion7_training_proxy},
        {"training recipe conformance", criterion8_recipe},
        {"run determinism", criterion9_determinism},
    };
    int failures = 0;
    int index = 1;
    for (const auto& c : criteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %d (%s): %s — %s\n", index, c.name,
                    ok ? "PASS" : "FAIL", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
        ++index;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    else std::printf("all 9 criteria passed\n");
    return failures == 0 ? 0 : 1;
}
