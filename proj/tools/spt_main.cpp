#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spt/runner.hpp"

namespace {

void add_run_flags(CLI::App* cmd, spt::RunConfig& cfg, std::string& superpixels,
                   std::string& posenc, std::string& graph) {
    cmd->add_option("--dataset", cfg.dataset, "fashionmnist or cifar10")
        ->check(CLI::IsMember({"fashionmnist", "cifar10"}));
    cmd->add_option("--data-root", cfg.data_root, "dataset root directory")
        ->envname("SPT_DATA_ROOT");
    cmd->add_option("--cache-dir", cfg.cache_dir,
                    "segmentation cache directory (empty disables caching)");
    cmd->add_option("--superpixels", superpixels, "chunking strategy: slic or grid")
        ->check(CLI::IsMember({"slic", "grid"}));
    cmd->add_option("--posenc", posenc,
                    "positional encoding: bert, linear or sincos")
        ->check(CLI::IsMember({"bert", "linear", "sincos"}));
    cmd->add_option("--graph", graph, "connectivity strategy: rag, knn or fcg")
        ->check(CLI::IsMember({"rag", "knn", "fcg"}));
    cmd->add_option("--spacing", cfg.pre.spacing, "superpixel spacing S");
    cmd->add_option("--knn-k", cfg.pre.knn_k, "neighbour count for knn graphs");
    cmd->add_flag("--sincos-printed-indexing", cfg.sincos_printed_indexing,
                  "use the overlapping sincos index layout");
    cmd->add_option("--layers", cfg.n_layers, "encoder layer count");
    cmd->add_option("--hidden", cfg.hidden_dim, "hidden dimension");
    cmd->add_option("--heads", cfg.n_heads, "attention head count");
    cmd->add_option("--mlp", cfg.mlp_dim, "MLP dimension");
    cmd->add_option("--epochs", cfg.train.n_epochs, "training epochs");
    cmd->add_option("--batch-size", cfg.train.batch_size, "mini-batch size");
    cmd->add_option("--lr", cfg.train.learning_rate, "learning rate");
    cmd->add_option("--weight-decay", cfg.train.weight_decay, "weight decay");
    cmd->add_option("--grad-clip", cfg.train.grad_clip_norm,
                    "global gradient-norm clip threshold");
    cmd->add_flag("!--no-clip", cfg.train.clip_enabled, "disable gradient clipping");
    cmd->add_option("--plateau-factor", cfg.train.plateau_factor,
                    "LR multiplier on validation plateau");
    cmd->add_option("--plateau-patience-fraction",
                    cfg.train.plateau_patience_fraction,
                    "patience as a fraction of the epoch count");
    cmd->add_option("--seed", cfg.train.rng_seed, "RNG seed");
    cmd->add_option("--microbatch", cfg.train.microbatch,
                    "forward/backward chunk size");
    cmd->add_flag("--zero-timing", cfg.train.zero_timing,
                  "write 0 in the seconds column for reproducible CSVs");
    cmd->add_option("--limit-train", cfg.limit_train,
                    "cap the training set size (0 = full, smoke runs)");
    cmd->add_option("--limit-valid", cfg.limit_valid,
                    "cap the validation set size (0 = full)");
    cmd->add_flag("!--no-test", cfg.eval_test, "skip the test-set evaluation");
    cmd->set_config("--config", "", "key=value config file; flags override it");
}

void apply_strings(spt::RunConfig& cfg, const std::string& superpixels,
                   const std::string& posenc, const std::string& graph) {
    cfg.pre.superpixels = spt::superpixel_strategy_from_string(superpixels);
    cfg.posenc = spt::posenc_strategy_from_string(posenc);
    cfg.pre.graph = spt::graph_strategy_from_string(graph);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Superpixel transformer experiments"};
    app.require_subcommand(1);

    spt::RunConfig cfg;
    std::string superpixels = "slic", posenc = "sincos", graph = "rag";

    auto* pre = app.add_subcommand("preprocess",
                                   "segment the dataset and fill the cache");
    add_run_flags(pre, cfg, superpixels, posenc, graph);

    auto* train = app.add_subcommand("train", "train one configuration");
    add_run_flags(train, cfg, superpixels, posenc, graph);
    train->add_option("--out", cfg.out_dir, "run output directory")->required();

    auto* sweep = app.add_subcommand("sweep", "train the full ablation grid");
    add_run_flags(sweep, cfg, superpixels, posenc, graph);
    std::string sweep_dir;
    std::vector<std::string> sp_list{"slic", "grid"};
    std::vector<std::string> pe_list{"bert", "linear", "sincos"};
    std::vector<std::string> g_list{"fcg", "knn", "rag"};
    std::vector<int> layer_list{1, 2, 4, 6, 8, 10, 12};
    bool include_linear = false;
    sweep->add_option("--out", sweep_dir, "sweep output directory")->required();
    sweep->add_option("--superpixels-list", sp_list, "strategies to sweep");
    sweep->add_option("--posenc-list", pe_list, "encodings to sweep");
    sweep->add_option("--graph-list", g_list, "graphs to sweep");
    sweep->add_option("--layers-list", layer_list, "layer counts to sweep");
    sweep->add_flag("--include-linear", include_linear,
                    "keep the linear encoding in CIFAR-10 sweeps");

    auto* plot = app.add_subcommand("plot", "render validation-accuracy curves");
    std::vector<std::string> metrics_files;
    std::string plot_dir = ".";
    plot->add_option("metrics", metrics_files, "per-run metrics.csv files")
        ->required();
    plot->add_option("--out", plot_dir, "figure output directory");

    auto* dump = app.add_subcommand("dump", "preprocessing debug dumps");
    add_run_flags(dump, cfg, superpixels, posenc, graph);
    std::string image_path, dump_dir = ".", split = "train";
    int image_index = 0;
    dump->add_option("--image", image_path, "PPM/PGM image to preprocess");
    dump->add_option("--index", image_index, "dataset image index (when no --image)");
    dump->add_option("--split", split, "dataset split for --index")
        ->check(CLI::IsMember({"train", "test"}));
    dump->add_option("--out", dump_dir, "dump output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        apply_strings(cfg, superpixels, posenc, graph);
        if (pre->parsed()) {
            spt::run_preprocess(cfg);
        } else if (train->parsed()) {
            spt::RunMetrics m = spt::run_single(cfg);
            std::printf("best_valid_acc=%.4f best_epoch=%d", m.best_valid_acc,
                        m.best_epoch);
            if (m.test_acc >= 0) std::printf(" test_acc=%.4f", m.test_acc);
            std::printf("\n");
        } else if (sweep->parsed()) {
            spt::run_sweep(cfg, sp_list, pe_list, g_list, layer_list,
                           include_linear, sweep_dir);
        } else if (plot->parsed()) {
            spt::plot_metrics(metrics_files, plot_dir);
        } else if (dump->parsed()) {
            spt::Image img;
            if (!image_path.empty()) {
                img = spt::read_pnm_image(image_path);
            } else {
                const spt::DatasetSpec ds = spt::dataset_spec_by_name(cfg.dataset);
                const spt::RawDataset raw =
                    split == "train" ? spt::load_dev_split(ds, cfg.data_root)
                                     : spt::load_test_split(ds, cfg.data_root);
                img = raw.get_image(image_index);
            }
            spt::dump_preprocessing(img, cfg.pre, dump_dir);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
