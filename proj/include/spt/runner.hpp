#pragma once

#include <map>
#include <string>
#include <vector>

#include "spt/pipeline.hpp"
#include "spt/training.hpp"

namespace spt {

// One ablation cell: dataset + preprocessing + model + training recipe.
struct RunConfig {
    std::string dataset = "fashionmnist";
    std::string data_root;
    std::string out_dir;
    std::string cache_dir;  // empty disables the segmentation cache
    PreprocessConfig pre;
    PosEncStrategy posenc = PosEncStrategy::kSinCosXY;
    bool sincos_printed_indexing = false;
    int n_layers = 4;
    int hidden_dim = 192;  // Ti defaults
    int n_heads = 3;
    int mlp_dim = 768;
    TrainConfig train;
    int limit_train = 0;  // 0 = full split; small values for smoke runs
    int limit_valid = 0;
    bool eval_test = true;
};

std::map<std::string, std::string> run_config_kv(const RunConfig& cfg);

// preprocess (cached) -> train -> metrics.csv + checkpoint + manifest.txt in
// cfg.out_dir. The manifest is written only after a successful run.
RunMetrics run_single(const RunConfig& cfg);

// Preprocess both dev splits and populate the segmentation cache; no training.
void run_preprocess(const RunConfig& cfg);

// Cartesian sweep; each cell runs in <sweep_dir>/<sp>-<pe>-<g>-L<n>. Cells
// whose manifest already exists are skipped; failures are recorded in
// failure.txt and the sweep continues. Writes <sweep_dir>/summary.csv with
// one row per completed cell: best/last validation accuracy and epochs.
void run_sweep(const RunConfig& base, const std::vector<std::string>& superpixels,
               const std::vector<std::string>& posencs,
               const std::vector<std::string>& graphs,
               const std::vector<int>& layer_counts, bool include_linear,
               const std::string& sweep_dir);

// Validation-accuracy curves from per-run metrics CSVs: one overview figure,
// plus per-layer-count and per-(posenc,graph) groupings when the run
// directory names follow the sweep naming scheme.
void plot_metrics(const std::vector<std::string>& csv_paths,
                  const std::string& out_dir);

// Segmentation/patch/graph debug dumps for one image: label map (binary +
// color PPM), patchset dump, edge list, and a mean-color rendering.
void dump_preprocessing(const Image& image, const PreprocessConfig& pre,
                        const std::string& out_dir);

// Binary PPM (P6) / PGM (P5) reader, maxval 255; grayscale is replicated to
// 3 channels.
Image read_pnm_image(const std::string& path);

}  // namespace spt
