#pragma once

#include <string>
#include <vector>

#include "spt/data.hpp"
#include "spt/encoder.hpp"
#include "spt/graph.hpp"
#include "spt/patchset.hpp"
#include "spt/segmentation.hpp"

namespace spt {

enum class SuperpixelStrategy { kGrid, kSlic };

SuperpixelStrategy superpixel_strategy_from_string(const std::string& s);
GraphStrategy graph_strategy_from_string(const std::string& s);
PosEncStrategy posenc_strategy_from_string(const std::string& s);
std::string to_string(SuperpixelStrategy s);
std::string to_string(GraphStrategy s);
std::string to_string(PosEncStrategy s);

struct PreprocessConfig {
    SuperpixelStrategy superpixels = SuperpixelStrategy::kSlic;
    GraphStrategy graph = GraphStrategy::kRag;
    int spacing = 4;  // S; patches are 3*S, SLIC k is (h/S)*(w/S)
    int knn_k = 15;
    int slic_max_iterations = 10;
    double slic_convergence_threshold = 1e-3;

    // max_patches: exact segment count for grid, 2k for SLIC.
    int max_patches(const DatasetSpec& spec) const;
    // Patch box side: 3*S for superpixels (clipped search box); for grid
    // chunking the box equals the grid cell so the model is plain ViT.
    int chunk_size() const {
        return superpixels == SuperpixelStrategy::kGrid ? spacing : 3 * spacing;
    }
    int slic_k(const DatasetSpec& spec) const {
        return (spec.height / spacing) * (spec.width / spacing);
    }
    std::string cache_key(const DatasetSpec& spec, const std::string& split) const;
};

// One preprocessed image: raw bytes plus segmentation and connectivity,
// computed once. The dense patch tensors and the attention mask are cheap
// and rebuilt at batch time.
struct PreparedImage {
    std::vector<uint8_t> pixels;
    SegmentMask segments;
    ConnectivityGraph graph;
    int label = 0;
};

struct PreparedDataset {
    DatasetSpec spec;
    PreprocessConfig pre;
    PatchConfig patch_config;
    std::vector<PreparedImage> images;
};

// Runs segmentation + graph construction for every image. When cache_dir is
// non-empty, SLIC segment masks are read from / written to a cache file
// keyed by the preprocessing configuration.
PreparedDataset prepare_dataset(const RawDataset& raw, const DatasetSpec& spec,
                                const PreprocessConfig& pre,
                                const std::string& split_name,
                                const std::string& cache_dir);

// Materialized per-image encoder input (owns its tensors).
struct MaterializedInput {
    SuperpixelPatchSet patchset;
    AttentionMask mask;
};

MaterializedInput materialize(const PreparedDataset& ds, int index);

// Builds EncoderInput views over a batch of materialized inputs.
struct BatchView {
    std::vector<MaterializedInput> storage;
    std::vector<EncoderInput> inputs;
    std::vector<int> labels;
};

BatchView make_batch(const PreparedDataset& ds, const std::vector<int>& indices);

EncoderConfig make_encoder_config(const DatasetSpec& spec, const PreprocessConfig& pre,
                                  int hidden_dim, int n_layers, int n_heads,
                                  int mlp_dim, PosEncStrategy posenc);

}  // namespace spt
