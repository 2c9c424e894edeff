#include "spt/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "spt/checkpoint.hpp"
#include "spt/svgplot.hpp"

namespace fs = std::filesystem;

namespace spt {

namespace {

std::string fmt_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

RawDataset subset(const RawDataset& raw, const std::vector<int>& idx, int limit) {
    RawDataset out;
    out.channels = raw.channels;
    out.height = raw.height;
    out.width = raw.width;
    const size_t n = limit > 0 ? std::min<size_t>(limit, idx.size()) : idx.size();
    for (size_t i = 0; i < n; ++i) {
        out.images.push_back(raw.images[idx[i]]);
        out.labels.push_back(raw.labels[idx[i]]);
    }
    return out;
}

struct LoadedSplits {
    DatasetSpec spec;
    RawDataset train, valid, test;
};

LoadedSplits load_splits(const RunConfig& cfg) {
    LoadedSplits out;
    out.spec = dataset_spec_by_name(cfg.dataset);
    const RawDataset dev = load_dev_split(out.spec, cfg.data_root);
    check(static_cast<int>(dev.size()) == out.spec.dev_total(),
          "development split size does not match the dataset spec");
    auto [train_idx, valid_idx] =
        split_train_valid(out.spec.dev_total(), out.spec.n_train, cfg.train.rng_seed);
    out.train = subset(dev, train_idx, cfg.limit_train);
    out.valid = subset(dev, valid_idx, cfg.limit_valid);
    if (cfg.eval_test) out.test = load_test_split(out.spec, cfg.data_root);
    return out;
}

}  // namespace

std::map<std::string, std::string> run_config_kv(const RunConfig& cfg) {
    std::map<std::string, std::string> kv;
    kv["dataset"] = cfg.dataset;
    kv["superpixels"] = to_string(cfg.pre.superpixels);
    kv["graph"] = to_string(cfg.pre.graph);
    kv["posenc"] = to_string(cfg.posenc);
    kv["spacing"] = std::to_string(cfg.pre.spacing);
    kv["knn_k"] = std::to_string(cfg.pre.knn_k);
    kv["n_layers"] = std::to_string(cfg.n_layers);
    kv["hidden_dim"] = std::to_string(cfg.hidden_dim);
    kv["n_heads"] = std::to_string(cfg.n_heads);
    kv["mlp_dim"] = std::to_string(cfg.mlp_dim);
    kv["learning_rate"] = fmt_double(cfg.train.learning_rate);
    kv["weight_decay"] = fmt_double(cfg.train.weight_decay);
    kv["beta1"] = fmt_double(cfg.train.beta1);
    kv["beta2"] = fmt_double(cfg.train.beta2);
    kv["grad_clip_norm"] = fmt_double(cfg.train.grad_clip_norm);
    kv["clip_enabled"] = cfg.train.clip_enabled ? "1" : "0";
    kv["plateau_patience_fraction"] = fmt_double(cfg.train.plateau_patience_fraction);
    kv["plateau_factor"] = fmt_double(cfg.train.plateau_factor);
    kv["batch_size"] = std::to_string(cfg.train.batch_size);
    kv["n_epochs"] = std::to_string(cfg.train.n_epochs);
    kv["seed"] = std::to_string(cfg.train.rng_seed);
    kv["skip_invalid_gradients"] = cfg.train.skip_invalid_gradients ? "1" : "0";
    kv["dropout"] = fmt_double(0.1);
    kv["limit_train"] = std::to_string(cfg.limit_train);
    kv["limit_valid"] = std::to_string(cfg.limit_valid);
    return kv;
}

void run_preprocess(const RunConfig& cfg) {
    LoadedSplits splits = load_splits(cfg);
    if (!cfg.cache_dir.empty()) fs::create_directories(cfg.cache_dir);
    prepare_dataset(splits.train, splits.spec, cfg.pre, "train", cfg.cache_dir);
    prepare_dataset(splits.valid, splits.spec, cfg.pre, "valid", cfg.cache_dir);
    if (cfg.eval_test)
        prepare_dataset(splits.test, splits.spec, cfg.pre, "test", cfg.cache_dir);
}

RunMetrics run_single(const RunConfig& cfg) {
    check(!cfg.out_dir.empty(), "run: output directory required");
    fs::create_directories(cfg.out_dir);
    if (!cfg.cache_dir.empty()) fs::create_directories(cfg.cache_dir);

    LoadedSplits splits = load_splits(cfg);
    // Only full splits hit the shared cache; partial runs would collide.
    const std::string cache = cfg.limit_train > 0 ? "" : cfg.cache_dir;
    PreparedDataset train_ds =
        prepare_dataset(splits.train, splits.spec, cfg.pre, "train", cache);
    PreparedDataset valid_ds = prepare_dataset(
        splits.valid, splits.spec, cfg.pre, "valid", cfg.limit_valid > 0 ? "" : cfg.cache_dir);
    PreparedDataset test_ds;
    if (cfg.eval_test)
        test_ds = prepare_dataset(splits.test, splits.spec, cfg.pre, "test",
                                  cfg.cache_dir);

    EncoderConfig enc = make_encoder_config(splits.spec, cfg.pre, cfg.hidden_dim,
                                            cfg.n_layers, cfg.n_heads, cfg.mlp_dim,
                                            cfg.posenc);
    enc.posenc.printed_indexing = cfg.sincos_printed_indexing;
    EncoderParams params = init_encoder_params(enc, cfg.train.rng_seed);
    RunMetrics metrics = train(train_ds, valid_ds, cfg.eval_test ? &test_ds : nullptr,
                               params, enc, cfg.train, cfg.out_dir);

    auto kv = run_config_kv(cfg);
    kv["best_epoch"] = std::to_string(metrics.best_epoch);
    kv["best_valid_acc"] = fmt_double(metrics.best_valid_acc);
    if (metrics.test_acc >= 0) kv["test_acc"] = fmt_double(metrics.test_acc);
    write_kv_file(cfg.out_dir + "/manifest.txt", kv);
    return metrics;
}

namespace {

struct ParsedMetrics {
    std::vector<double> epoch, valid_acc;
};

ParsedMetrics parse_metrics_csv(const std::string& path) {
    std::ifstream f(path);
    check(f.good(), "cannot open " + path);
    std::string line;
    check(static_cast<bool>(std::getline(f, line)), "empty metrics file: " + path);
    check(line == metrics_csv_header(), "unexpected metrics header in " + path);
    ParsedMetrics out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        check(cells.size() == 6, "malformed metrics row in " + path + ": " + line);
        out.epoch.push_back(std::stod(cells[0]));
        out.valid_acc.push_back(std::stod(cells[2]));
    }
    return out;
}

}  // namespace

void run_sweep(const RunConfig& base, const std::vector<std::string>& superpixels,
               const std::vector<std::string>& posencs,
               const std::vector<std::string>& graphs,
               const std::vector<int>& layer_counts, bool include_linear,
               const std::string& sweep_dir) {
    fs::create_directories(sweep_dir);
    std::ofstream summary(sweep_dir + "/summary.csv");
    check(summary.good(), "cannot write " + sweep_dir + "/summary.csv");
    summary << "superpixels,posenc,graph,layers,best_valid,best_epoch,last_valid,"
               "last_epoch,status\n";
    for (const auto& sp : superpixels)
        for (const auto& pe : posencs) {
            // The linear encoding is excluded from CIFAR-10 sweeps by default.
            if (pe == "linear" && base.dataset == "cifar10" && !include_linear)
                continue;
            for (const auto& g : graphs)
                for (int layers : layer_counts) {
                    RunConfig cfg = base;
                    cfg.pre.superpixels = superpixel_strategy_from_string(sp);
                    cfg.pre.graph = graph_strategy_from_string(g);
                    cfg.posenc = posenc_strategy_from_string(pe);
                    cfg.n_layers = layers;
                    std::ostringstream name;
                    name << sp << "-" << pe << "-" << g << "-L" << layers;
                    cfg.out_dir = sweep_dir + "/" + name.str();
                    const bool done = fs::exists(cfg.out_dir + "/manifest.txt");
                    std::string status = done ? "cached" : "ok";
                    if (!done) {
                        try {
                            run_single(cfg);
                        } catch (const std::exception& e) {
                            std::ofstream fail(cfg.out_dir + "/failure.txt");
                            fail << e.what() << "\n";
                            status = "failed";
                        }
                    }
                    summary << sp << "," << pe << "," << g << "," << layers << ",";
                    if (status != "failed") {
                        ParsedMetrics m = parse_metrics_csv(cfg.out_dir + "/metrics.csv");
                        const auto best =
                            std::max_element(m.valid_acc.begin(), m.valid_acc.end());
                        const size_t bi = best - m.valid_acc.begin();
                        summary << fmt_double(*best) << "," << m.epoch[bi] << ","
                                << fmt_double(m.valid_acc.back()) << ","
                                << m.epoch.back();
                    } else {
                        summary << ",,,";
                    }
                    summary << "," << status << "\n" << std::flush;
                }
        }
}

void plot_metrics(const std::vector<std::string>& csv_paths,
                  const std::string& out_dir) {
    check(!csv_paths.empty(), "plot: no metrics files");
    fs::create_directories(out_dir);
    std::vector<PlotSeries> all;
    for (const auto& path : csv_paths) {
        ParsedMetrics m = parse_metrics_csv(path);
        PlotSeries s;
        s.label = fs::path(path).parent_path().filename().string();
        if (s.label.empty()) s.label = fs::path(path).filename().string();
        s.x = m.epoch;
        s.y = m.valid_acc;
        all.push_back(std::move(s));
    }
    write_line_plot(out_dir + "/valid_acc.svg", "Validation accuracy", "epoch",
                    "validation accuracy", all);

    // Grouped figures when labels follow the sweep naming scheme sp-pe-g-LN.
    std::set<std::string> layer_keys, pg_keys;
    std::vector<std::vector<std::string>> parts(all.size());
    for (size_t i = 0; i < all.size(); ++i) {
        std::istringstream ss(all[i].label);
        std::string tok;
        while (std::getline(ss, tok, '-')) parts[i].push_back(tok);
        if (parts[i].size() == 4 && parts[i][3].size() > 1 && parts[i][3][0] == 'L') {
            layer_keys.insert(parts[i][3]);
            pg_keys.insert(parts[i][1] + "-" + parts[i][2]);
        }
    }
    for (const auto& lk : layer_keys) {
        std::vector<PlotSeries> group;
        for (size_t i = 0; i < all.size(); ++i)
            if (parts[i].size() == 4 && parts[i][3] == lk) group.push_back(all[i]);
        write_line_plot(out_dir + "/by_layers_" + lk + ".svg",
                        "Validation accuracy, " + lk + " layers", "epoch",
                        "validation accuracy", group);
    }
    for (const auto& pg : pg_keys) {
        std::vector<PlotSeries> group;
        for (size_t i = 0; i < all.size(); ++i)
            if (parts[i].size() == 4 && parts[i][1] + "-" + parts[i][2] == pg)
                group.push_back(all[i]);
        write_line_plot(out_dir + "/by_combo_" + pg + ".svg",
                        "Validation accuracy, " + pg, "epoch",
                        "validation accuracy", group);
    }
}

namespace {

void write_ppm(const std::string& path, int h, int w,
               const std::vector<uint8_t>& rgb) {
    std::ofstream f(path, std::ios::binary);
    check(f.good(), "cannot write " + path);
    f << "P6\n" << w << " " << h << "\n255\n";
    f.write(reinterpret_cast<const char*>(rgb.data()),
            static_cast<std::streamsize>(rgb.size()));
}

// Distinct-ish label colors via a hash of the label index.
void label_color(int32_t label, uint8_t* rgb) {
    uint32_t x = static_cast<uint32_t>(label) * 2654435761u + 12345u;
    rgb[0] = 64 + (x & 0x7f) + ((x >> 21) & 0x3f);
    rgb[1] = 64 + ((x >> 7) & 0x7f) + ((x >> 25) & 0x3f);
    rgb[2] = 64 + ((x >> 14) & 0x7f) + ((x >> 17) & 0x3f);
}

}  // namespace

void dump_preprocessing(const Image& image, const PreprocessConfig& pre,
                        const std::string& out_dir) {
    fs::create_directories(out_dir);
    SegmentMask mask;
    if (pre.superpixels == SuperpixelStrategy::kGrid) {
        mask = square_grid_segments(image.height, image.width, pre.spacing);
    } else {
        SlicConfig slic;
        DatasetSpec geom;
        geom.height = image.height;
        geom.width = image.width;
        slic.k = pre.slic_k(geom);
        slic.spacing = pre.spacing;
        slic.max_iterations = pre.slic_max_iterations;
        slic.convergence_threshold = pre.slic_convergence_threshold;
        mask = slic0_segments(image, slic);
    }
    write_segment_mask(mask, out_dir + "/segments.bin");

    const int h = image.height, w = image.width;
    std::vector<uint8_t> viz(static_cast<size_t>(h) * w * 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            label_color(mask.at(y, x), &viz[(static_cast<size_t>(y) * w + x) * 3]);
    write_ppm(out_dir + "/segments.ppm", h, w, viz);

    // Mean-color rendering: every pixel gets its segment's average RGB.
    std::vector<double> sums(static_cast<size_t>(mask.n_segments) * 3, 0.0);
    std::vector<int> counts(mask.n_segments, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int32_t s = mask.at(y, x);
            for (int c = 0; c < 3; ++c) sums[s * 3 + c] += image.at(c, y, x);
            ++counts[s];
        }
    std::vector<uint8_t> mean(static_cast<size_t>(h) * w * 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int32_t s = mask.at(y, x);
            for (int c = 0; c < 3; ++c)
                mean[(static_cast<size_t>(y) * w + x) * 3 + c] = static_cast<uint8_t>(
                    std::min(255.0, sums[s * 3 + c] / counts[s] * 255.0 + 0.5));
        }
    write_ppm(out_dir + "/meancolor.ppm", h, w, mean);

    PatchConfig pc;
    pc.h_chunk = pc.w_chunk = pc.search_patch_size = pre.chunk_size();
    DatasetSpec geom;
    geom.height = h;
    geom.width = w;
    pc.max_patches = std::max(mask.n_segments,
                              pre.superpixels == SuperpixelStrategy::kGrid
                                  ? mask.n_segments
                                  : 2 * pre.slic_k(geom));
    SuperpixelPatchSet ps = get_superpixel_patches(image, mask, pc);
    write_patchset(ps, out_dir + "/patchset.bin");

    ConnectivityGraph graph;
    switch (pre.graph) {
        case GraphStrategy::kRag: graph = build_rag(mask); break;
        case GraphStrategy::kFcg: graph = build_fcg(ps.present); break;
        case GraphStrategy::kKnn:
            graph = build_knn(ps.centers, ps.present, pre.knn_k);
            break;
    }
    write_edge_list(graph, out_dir + "/edges.txt");
}

Image read_pnm_image(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    check(f.good(), "cannot open " + path);
    std::string magic;
    f >> magic;
    check(magic == "P5" || magic == "P6", "unsupported image format in " + path);
    auto next_int = [&]() {
        // Skip whitespace and '#' comment lines between header tokens.
        for (;;) {
            int c = f.peek();
            if (c == '#') {
                std::string line;
                std::getline(f, line);
            } else if (std::isspace(c)) {
                f.get();
            } else {
                break;
            }
        }
        int v;
        f >> v;
        return v;
    };
    const int w = next_int(), h = next_int(), maxval = next_int();
    check(maxval == 255, "only maxval 255 supported in " + path);
    f.get();  // single whitespace before pixel data
    const int channels = magic == "P6" ? 3 : 1;
    std::vector<uint8_t> interleaved(static_cast<size_t>(h) * w * channels);
    f.read(reinterpret_cast<char*>(interleaved.data()),
           static_cast<std::streamsize>(interleaved.size()));
    check(f.good(), "truncated pixel data in " + path);
    // Reorder to channel-major for Image::from_bytes.
    std::vector<uint8_t> planar(interleaved.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c)
                planar[(static_cast<size_t>(c) * h + y) * w + x] =
                    interleaved[(static_cast<size_t>(y) * w + x) * channels + c];
    return Image::from_bytes(planar.data(), channels, h, w);
}

}  // namespace spt
