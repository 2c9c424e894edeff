#include "spt/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "spt/checkpoint.hpp"

namespace spt {

int TrainConfig::plateau_patience() const {
    const int p = static_cast<int>(std::ceil(plateau_patience_fraction * n_epochs));
    return std::max(1, p);
}

AdamState init_adam_state(const EncoderConfig& config) {
    AdamState s;
    s.m.assign(encoder_param_count(config), 0.0);
    s.v.assign(encoder_param_count(config), 0.0);
    return s;
}

double softmax_cross_entropy(const Mat& logits, const std::vector<int>& labels,
                             Mat* dlogits) {
    check(static_cast<size_t>(logits.rows) == labels.size(),
          "cross_entropy: label count mismatch");
    if (dlogits) *dlogits = Mat(logits.rows, logits.cols);
    double total = 0.0;
    for (int r = 0; r < logits.rows; ++r) {
        const double* row = logits.row(r);
        double mx = row[0];
        for (int c = 1; c < logits.cols; ++c) mx = std::max(mx, row[c]);
        double z = 0.0;
        for (int c = 0; c < logits.cols; ++c) z += std::exp(row[c] - mx);
        const int y = labels[r];
        check(y >= 0 && y < logits.cols, "cross_entropy: label out of range");
        total += std::log(z) - (row[y] - mx);
        if (dlogits) {
            double* d = dlogits->row(r);
            for (int c = 0; c < logits.cols; ++c)
                d[c] = (std::exp(row[c] - mx) / z - (c == y ? 1.0 : 0.0)) / logits.rows;
        }
    }
    return total / logits.rows;
}

double clip_global_norm(const EncoderConfig& config, EncoderParams& grads,
                        double max_norm) {
    double sq = 0.0;
    for_each_param(config, grads, [&](const std::string&, Mat& g) {
        for (double x : g.v) sq += x * x;
    });
    const double norm = std::sqrt(sq);
    if (norm > max_norm) {
        const double scale = max_norm / norm;
        for_each_param(config, grads,
                       [&](const std::string&, Mat& g) {
                           for (double& x : g.v) x *= scale;
                       });
    }
    return norm;
}

void adam_step(const EncoderConfig& config, EncoderParams& params,
               EncoderParams& grads, AdamState& state, const TrainConfig& train,
               double lr) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(train.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(train.beta2, static_cast<double>(state.step));
    size_t off = 0;
    // Walk params and grads in lockstep; visitation order is fixed.
    std::vector<Mat*> gmats;
    for_each_param(config, grads,
                   [&](const std::string&, Mat& g) { gmats.push_back(&g); });
    size_t gi = 0;
    for_each_param(config, params, [&](const std::string&, Mat& p) {
        const Mat& g = *gmats[gi++];
        check(g.v.size() == p.v.size(), "adam: shape mismatch");
        for (size_t i = 0; i < p.v.size(); ++i) {
            double& m = state.m[off + i];
            double& v = state.v[off + i];
            m = train.beta1 * m + (1.0 - train.beta1) * g.v[i];
            v = train.beta2 * v + (1.0 - train.beta2) * g.v[i] * g.v[i];
            const double mh = m / bc1;
            const double vh = v / bc2;
            p.v[i] -= lr * mh / (std::sqrt(vh) + train.adam_eps);
            p.v[i] -= lr * train.weight_decay * p.v[i];
        }
        off += p.v.size();
    });
}

namespace {

bool grads_finite(const EncoderConfig& config, EncoderParams& grads) {
    bool ok = true;
    for_each_param(config, grads, [&](const std::string&, Mat& g) {
        for (double x : g.v)
            if (!std::isfinite(x)) ok = false;
    });
    return ok;
}

bool is_nonfinite_error(const std::runtime_error& e) {
    return std::string(e.what()).find("non-finite") != std::string::npos;
}

}  // namespace

StepResult train_step(const std::vector<EncoderInput>& inputs,
                      const std::vector<int>& labels, EncoderParams& params,
                      EncoderParams& grads, AdamState& adam,
                      const EncoderConfig& config, const TrainConfig& train,
                      double lr, Rng& dropout_rng) {
    StepResult res;
    const int n = static_cast<int>(inputs.size());
    check(n > 0 && labels.size() == inputs.size(), "train_step: empty or mismatched batch");
    for_each_param(config, grads, [](const std::string&, Mat& g) { g.zero(); });
    double loss_sum = 0.0;
    bool bad = false;
    for (int start = 0; start < n && !bad; start += train.microbatch) {
        const int end = std::min(n, start + train.microbatch);
        std::vector<EncoderInput> micro(inputs.begin() + start, inputs.begin() + end);
        std::vector<int> mlabels(labels.begin() + start, labels.begin() + end);
        ForwardCache cache;
        try {
            ForwardOutput out =
                encoder_forward(micro, params, config, true, &dropout_rng, &cache);
            Mat dlogits;
            const double mloss = softmax_cross_entropy(out.logits, mlabels, &dlogits);
            if (!std::isfinite(mloss)) {
                bad = true;
                break;
            }
            loss_sum += mloss * (end - start);
            const double scale = static_cast<double>(end - start) / n;
            for (double& x : dlogits.v) x *= scale;
            encoder_backward(dlogits, cache, params, config, grads);
        } catch (const std::runtime_error& e) {
            if (train.skip_invalid_gradients && is_nonfinite_error(e)) {
                bad = true;
                break;
            }
            throw;
        }
    }
    if (!bad) bad = !grads_finite(config, grads);
    if (bad) {
        if (!train.skip_invalid_gradients)
            throw std::runtime_error("train_step: non-finite loss or gradients");
        res.skipped = true;
        res.loss = std::numeric_limits<double>::quiet_NaN();
        return res;
    }
    res.loss = loss_sum / n;
    if (train.clip_enabled)
        res.grad_norm = clip_global_norm(config, grads, train.grad_clip_norm);
    adam_step(config, params, grads, adam, train, lr);
    return res;
}

EvalResult evaluate(const PreparedDataset& ds, EncoderParams& params,
                    const EncoderConfig& config, int batch_size) {
    const int n = static_cast<int>(ds.images.size());
    check(n > 0, "evaluate: empty dataset");
    EvalResult res;
    int correct = 0;
    double loss_sum = 0.0;
    for (int start = 0; start < n; start += batch_size) {
        const int end = std::min(n, start + batch_size);
        std::vector<int> idx(end - start);
        std::iota(idx.begin(), idx.end(), start);
        BatchView batch = make_batch(ds, idx);
        ForwardOutput out = encoder_forward(batch.inputs, params, config, false,
                                            nullptr, nullptr);
        loss_sum += softmax_cross_entropy(out.logits, batch.labels, nullptr) *
                    (end - start);
        for (int r = 0; r < out.logits.rows; ++r) {
            const double* row = out.logits.row(r);
            int arg = 0;
            for (int c = 1; c < out.logits.cols; ++c)
                if (row[c] > row[arg]) arg = c;  // ties keep the smaller index
            if (arg == batch.labels[r]) ++correct;
        }
    }
    res.accuracy = static_cast<double>(correct) / n;
    res.mean_loss = loss_sum / n;
    return res;
}

double PlateauScheduler::observe(double metric, double lr) {
    if (metric > best) {
        best = metric;
        stagnant = 0;
        return lr;
    }
    if (++stagnant >= patience) {
        stagnant = 0;
        return lr * factor;
    }
    return lr;
}

std::string metrics_csv_header() {
    return "epoch,train_loss,valid_acc,lr,seconds,skipped_batches";
}

std::string metrics_csv_row(const EpochRecord& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.8g,%.3f,%d", r.epoch,
                  r.train_loss, r.valid_acc, r.lr, r.seconds, r.skipped_batches);
    return buf;
}

RunMetrics train(const PreparedDataset& train_ds, const PreparedDataset& valid_ds,
                 const PreparedDataset* test_ds, EncoderParams& params,
                 const EncoderConfig& config, const TrainConfig& train_cfg,
                 const std::string& out_dir) {
    check(!train_ds.images.empty() && !valid_ds.images.empty(),
          "train: empty dataset");
    RunMetrics metrics;
    EncoderParams grads = zero_encoder_grads(config);
    AdamState adam = init_adam_state(config);
    PlateauScheduler sched(train_cfg.plateau_factor, train_cfg.plateau_patience());
    Rng shuffle_rng(train_cfg.rng_seed);
    Rng dropout_rng(train_cfg.rng_seed ^ 0x9e3779b97f4a7c15ull);

    std::ofstream csv;
    if (!out_dir.empty()) {
        csv.open(out_dir + "/metrics.csv");
        check(csv.good(), "cannot write " + out_dir + "/metrics.csv");
        csv << metrics_csv_header() << "\n" << std::flush;
    }

    std::vector<int> order(train_ds.images.size());
    std::iota(order.begin(), order.end(), 0);
    double lr = train_cfg.learning_rate;
    bool saved = false;
    for (int epoch = 0; epoch < train_cfg.n_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        long long loss_n = 0;
        int skipped = 0;
        bool first_batch = true;
        for (size_t start = 0; start < order.size(); start += train_cfg.batch_size) {
            const size_t end = std::min(order.size(), start + train_cfg.batch_size);
            std::vector<int> idx(order.begin() + start, order.begin() + end);
            BatchView batch = make_batch(train_ds, idx);
            StepResult step = train_step(batch.inputs, batch.labels, params, grads,
                                         adam, config, train_cfg, lr, dropout_rng);
            if (step.skipped) {
                ++skipped;
                if (first_batch && epoch == 0)
                    throw std::runtime_error(
                        "train: non-finite loss on the first batch; check the "
                        "model configuration");
            } else {
                loss_sum += step.loss * (end - start);
                loss_n += static_cast<long long>(end - start);
            }
            first_batch = false;
        }
        EvalResult val = evaluate(valid_ds, params, config);
        const auto t1 = std::chrono::steady_clock::now();
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_n ? loss_sum / loss_n : 0.0;
        rec.valid_acc = val.accuracy;
        rec.lr = lr;
        rec.seconds = train_cfg.zero_timing
                          ? 0.0
                          : std::chrono::duration<double>(t1 - t0).count();
        rec.skipped_batches = skipped;
        metrics.epochs.push_back(rec);
        if (csv.is_open()) csv << metrics_csv_row(rec) << "\n" << std::flush;
        if (val.accuracy > metrics.best_valid_acc || metrics.best_epoch < 0) {
            metrics.best_valid_acc = val.accuracy;
            metrics.best_epoch = epoch;
            if (!out_dir.empty()) {
                save_checkpoint(out_dir + "/checkpoint", config, params);
                saved = true;
            }
        }
        lr = sched.observe(val.accuracy, lr);
    }
    if (test_ds) {
        EncoderParams best = params;
        if (saved) load_checkpoint(out_dir + "/checkpoint", config, best);
        metrics.test_acc = evaluate(*test_ds, best, config).accuracy;
    }
    return metrics;
}

}  // namespace spt
