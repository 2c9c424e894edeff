#include "spt/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace spt {

SuperpixelStrategy superpixel_strategy_from_string(const std::string& s) {
    if (s == "grid") return SuperpixelStrategy::kGrid;
    if (s == "slic") return SuperpixelStrategy::kSlic;
    throw std::runtime_error("unknown superpixel strategy: " + s);
}

GraphStrategy graph_strategy_from_string(const std::string& s) {
    if (s == "fcg") return GraphStrategy::kFcg;
    if (s == "knn") return GraphStrategy::kKnn;
    if (s == "rag") return GraphStrategy::kRag;
    throw std::runtime_error("unknown graph strategy: " + s);
}

PosEncStrategy posenc_strategy_from_string(const std::string& s) {
    if (s == "bert") return PosEncStrategy::kBert;
    if (s == "linear") return PosEncStrategy::kLinearXY;
    if (s == "sincos") return PosEncStrategy::kSinCosXY;
    throw std::runtime_error("unknown positional encoding: " + s);
}

std::string to_string(SuperpixelStrategy s) {
    return s == SuperpixelStrategy::kGrid ? "grid" : "slic";
}

std::string to_string(GraphStrategy s) {
    switch (s) {
        case GraphStrategy::kFcg: return "fcg";
        case GraphStrategy::kKnn: return "knn";
        default: return "rag";
    }
}

std::string to_string(PosEncStrategy s) {
    switch (s) {
        case PosEncStrategy::kBert: return "bert";
        case PosEncStrategy::kLinearXY: return "linear";
        default: return "sincos";
    }
}

int PreprocessConfig::max_patches(const DatasetSpec& spec) const {
    if (superpixels == SuperpixelStrategy::kGrid) {
        check(spec.height == spec.width && spec.height % spacing == 0,
              "grid chunking requires square images divisible by the patch size");
        const int n = spec.height / spacing;
        return n * n;
    }
    return 2 * slic_k(spec);
}

std::string PreprocessConfig::cache_key(const DatasetSpec& spec,
                                        const std::string& split) const {
    std::ostringstream key;
    key << spec.name << "-" << split << "-" << to_string(superpixels) << "-S"
        << spacing;
    if (superpixels == SuperpixelStrategy::kSlic)
        key << "-k" << slic_k(spec) << "-it" << slic_max_iterations << "-th"
            << slic_convergence_threshold;
    return key.str();
}

namespace {

const uint32_t kCacheMagic = 0x53504d53;  // "SMPS"

bool load_mask_cache(const std::string& path, size_t n, int h, int w,
                     std::vector<SegmentMask>& out) {
    std::ifstream f(path, std::ios::binary);
    if (!f.good()) return false;
    uint32_t header[4];
    f.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!f.good() || header[0] != kCacheMagic || header[1] != n ||
        header[2] != static_cast<uint32_t>(h) || header[3] != static_cast<uint32_t>(w))
        return false;
    out.resize(n);
    for (auto& m : out) {
        int32_t ns;
        f.read(reinterpret_cast<char*>(&ns), sizeof(ns));
        m.height = h;
        m.width = w;
        m.n_segments = ns;
        m.labels.resize(static_cast<size_t>(h) * w);
        f.read(reinterpret_cast<char*>(m.labels.data()),
               static_cast<std::streamsize>(m.labels.size() * sizeof(int32_t)));
        if (!f.good()) return false;
    }
    return true;
}

void save_mask_cache(const std::string& path, int h, int w,
                     const std::vector<SegmentMask>& masks) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        check(f.good(), "cannot write " + tmp);
        uint32_t header[4] = {kCacheMagic, static_cast<uint32_t>(masks.size()),
                              static_cast<uint32_t>(h), static_cast<uint32_t>(w)};
        f.write(reinterpret_cast<const char*>(header), sizeof(header));
        for (const auto& m : masks) {
            const int32_t ns = m.n_segments;
            f.write(reinterpret_cast<const char*>(&ns), sizeof(ns));
            f.write(reinterpret_cast<const char*>(m.labels.data()),
                    static_cast<std::streamsize>(m.labels.size() * sizeof(int32_t)));
        }
        check(f.good(), "write failed: " + tmp);
    }
    std::rename(tmp.c_str(), path.c_str());
}

}  // namespace

PreparedDataset prepare_dataset(const RawDataset& raw, const DatasetSpec& spec,
                                const PreprocessConfig& pre,
                                const std::string& split_name,
                                const std::string& cache_dir) {
    check(raw.height == spec.height && raw.width == spec.width,
          "image geometry does not match the dataset spec");
    PreparedDataset ds;
    ds.spec = spec;
    ds.pre = pre;
    ds.patch_config.max_patches = pre.max_patches(spec);
    ds.patch_config.h_chunk = pre.chunk_size();
    ds.patch_config.w_chunk = pre.chunk_size();
    ds.patch_config.search_patch_size = pre.chunk_size();

    const size_t n = raw.size();
    std::vector<SegmentMask> masks;
    bool from_cache = false;
    std::string cache_path;
    if (!cache_dir.empty() && pre.superpixels == SuperpixelStrategy::kSlic) {
        cache_path = cache_dir + "/" + pre.cache_key(spec, split_name) + ".segs";
        from_cache = load_mask_cache(cache_path, n, spec.height, spec.width, masks);
    }
    if (!from_cache) {
        masks.resize(n);
        if (pre.superpixels == SuperpixelStrategy::kGrid) {
            const SegmentMask grid =
                square_grid_segments(spec.height, spec.width, pre.spacing);
            for (auto& m : masks) m = grid;
        } else {
            SlicConfig slic;
            slic.k = pre.slic_k(spec);
            slic.spacing = pre.spacing;
            slic.max_iterations = pre.slic_max_iterations;
            slic.convergence_threshold = pre.slic_convergence_threshold;
#pragma omp parallel for schedule(dynamic, 64)
            for (long long i = 0; i < static_cast<long long>(n); ++i)
                masks[i] = slic0_segments(raw.get_image(i), slic);
            if (!cache_path.empty())
                save_mask_cache(cache_path, spec.height, spec.width, masks);
        }
    }

    ds.images.resize(n);
#pragma omp parallel for schedule(dynamic, 64)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        PreparedImage& img = ds.images[i];
        img.pixels = raw.images[i];
        img.segments = std::move(masks[i]);
        img.label = raw.labels[i];
        switch (pre.graph) {
            case GraphStrategy::kRag:
                img.graph = build_rag(img.segments);
                img.graph.n_nodes = ds.patch_config.max_patches;
                break;
            case GraphStrategy::kFcg:
            case GraphStrategy::kKnn: {
                const SuperpixelPatchSet ps = get_superpixel_patches(
                    raw.get_image(i), img.segments, ds.patch_config);
                img.graph = pre.graph == GraphStrategy::kFcg
                                ? build_fcg(ps.present)
                                : build_knn(ps.centers, ps.present, pre.knn_k);
                break;
            }
        }
    }
    return ds;
}

MaterializedInput materialize(const PreparedDataset& ds, int index) {
    const PreparedImage& img = ds.images[index];
    MaterializedInput out;
    const Image image = Image::from_bytes(img.pixels.data(), ds.spec.channels,
                                          ds.spec.height, ds.spec.width);
    out.patchset = get_superpixel_patches(image, img.segments, ds.patch_config);
    out.mask = to_attention_mask(img.graph, out.patchset.present);
    return out;
}

BatchView make_batch(const PreparedDataset& ds, const std::vector<int>& indices) {
    BatchView batch;
    batch.storage.resize(indices.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (long long i = 0; i < static_cast<long long>(indices.size()); ++i)
        batch.storage[i] = materialize(ds, indices[i]);
    batch.inputs.resize(indices.size());
    batch.labels.resize(indices.size());
    for (size_t i = 0; i < indices.size(); ++i) {
        batch.inputs[i].patchset = &batch.storage[i].patchset;
        batch.inputs[i].mask = &batch.storage[i].mask;
        batch.labels[i] = ds.images[indices[i]].label;
    }
    return batch;
}

EncoderConfig make_encoder_config(const DatasetSpec& spec, const PreprocessConfig& pre,
                                  int hidden_dim, int n_layers, int n_heads,
                                  int mlp_dim, PosEncStrategy posenc) {
    EncoderConfig cfg;
    cfg.hidden_dim = hidden_dim;
    cfg.n_layers = n_layers;
    cfg.n_heads = n_heads;
    cfg.mlp_dim = mlp_dim;
    cfg.n_classes = spec.n_classes;
    cfg.patch_input_dim = 4 * pre.chunk_size() * pre.chunk_size();
    cfg.max_patches = pre.max_patches(spec);
    cfg.posenc.strategy = posenc;
    cfg.posenc.hidden_dim = hidden_dim;
    cfg.posenc.max_positions = cfg.max_patches;
    return cfg;
}

}  // namespace spt
