#pragma once

#include <string>
#include <vector>

#include "spt/encoder.hpp"
#include "spt/pipeline.hpp"

namespace spt {

struct TrainConfig {
    double learning_rate = 1e-3;
    double weight_decay = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double grad_clip_norm = 1.0;
    bool clip_enabled = true;
    double plateau_patience_fraction = 0.2;
    double plateau_factor = 0.1;
    int batch_size = 512;
    int n_epochs = 32;
    unsigned long long rng_seed = 0;
    bool skip_invalid_gradients = true;
    int microbatch = 64;      // forward/backward chunk inside a batch
    bool zero_timing = false;  // write 0 in the seconds column (reproducible CSVs)

    int plateau_patience() const;
};

struct AdamState {
    std::vector<double> m, v;
    long long step = 0;
};

AdamState init_adam_state(const EncoderConfig& config);

// Mean cross-entropy over rows; when dlogits is non-null it receives
// d(mean loss)/dlogits.
double softmax_cross_entropy(const Mat& logits, const std::vector<int>& labels,
                             Mat* dlogits);

// Scales gradients in place so the global L2 norm is at most max_norm;
// returns the pre-clip norm.
double clip_global_norm(const EncoderConfig& config, EncoderParams& grads,
                        double max_norm);

// One Adam step with decoupled weight decay (decay applied to the weights
// directly, scaled by the current learning rate, not through the moments).
void adam_step(const EncoderConfig& config, EncoderParams& params,
               EncoderParams& grads, AdamState& state, const TrainConfig& train,
               double lr);

struct StepResult {
    double loss = 0.0;
    bool skipped = false;
    double grad_norm = 0.0;  // pre-clip, 0 when skipped
};

// Processes one mini-batch: micro-batched forward/backward with fixed-order
// accumulation, optional clipping, Adam update. A non-finite activation or
// gradient skips the update and leaves the parameters bit-identical.
StepResult train_step(const std::vector<EncoderInput>& inputs,
                      const std::vector<int>& labels, EncoderParams& params,
                      EncoderParams& grads, AdamState& adam,
                      const EncoderConfig& config, const TrainConfig& train,
                      double lr, Rng& dropout_rng);

struct EvalResult {
    double accuracy = 0.0;
    double mean_loss = 0.0;
};

// Eval-mode accuracy and mean loss; argmax ties break to the smallest class.
EvalResult evaluate(const PreparedDataset& ds, EncoderParams& params,
                    const EncoderConfig& config, int batch_size = 256);

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double valid_acc = 0.0;
    double lr = 0.0;
    double seconds = 0.0;
    int skipped_batches = 0;
};

struct RunMetrics {
    std::vector<EpochRecord> epochs;
    int best_epoch = -1;
    double best_valid_acc = 0.0;
    double test_acc = -1.0;  // -1 when no test split evaluated
};

// Validation-accuracy plateau scheduler: after `patience` consecutive epochs
// without improvement the LR is multiplied by `factor`.
struct PlateauScheduler {
    double factor;
    int patience;
    double best = -1.0;
    int stagnant = 0;

    PlateauScheduler(double factor, int patience) : factor(factor), patience(patience) {}
    // Returns the new LR (== lr if no reduction fired).
    double observe(double metric, double lr);
};

// Full epoch loop: shuffled mini-batches, per-epoch validation, plateau
// scheduling, best-checkpoint saving. Appends to <out_dir>/metrics.csv after
// every epoch and writes <out_dir>/checkpoint.{bin,json} on improvement.
// out_dir may be empty to skip all file output.
RunMetrics train(const PreparedDataset& train_ds, const PreparedDataset& valid_ds,
                 const PreparedDataset* test_ds, EncoderParams& params,
                 const EncoderConfig& config, const TrainConfig& train_cfg,
                 const std::string& out_dir);

std::string metrics_csv_header();
std::string metrics_csv_row(const EpochRecord& r);

}  // namespace spt
