#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/graph.hpp"
#include "core/model.hpp"
#include "core/sampler.hpp"

namespace entropart {

enum class PhaseSwitchMode { FixedFraction, Auto };

struct TrainConfig {
  std::uint32_t num_workers = 4;
  double lr = 1e-3;
  std::uint32_t hidden_dim = 256;
  std::vector<std::uint32_t> fanouts = {25, 25};
  std::uint32_t batch_size = 1024;
  double fraction = 0.25;
  bool sampler_enabled = true;
  AdjNormalization normalization = AdjNormalization::AsWritten;
  double lambda = 1e-4;
  std::uint32_t patience = 5;
  std::uint32_t phase0_max_epochs = 100;
  std::uint32_t phase1_max_epochs = 100;
  PhaseSwitchMode switch_mode = PhaseSwitchMode::Auto;
  double switch_fixed_fraction = 0.5;  // fixed mode: switch after this share
  std::uint32_t switch_window = 5;     // auto mode: flatness window
  double switch_threshold = 0.01;      // auto mode: relative decrease bound
  std::uint32_t halo_depth = 2;
  std::uint64_t seed = 1;
  bool baseline = false;    // generalization + early stopping only, CBS off
  std::uint32_t max_threads = 0;  // 0 = one thread per worker
  bool collect_replica_hashes = false;
};

void validate_train_config(const TrainConfig& cfg);

struct HistoryRecord {
  int phase = 0;
  std::uint32_t worker_id = 0;
  std::uint32_t mini_epoch = 0;
  double wall_time = 0.0;  // seconds of this worker's own work so far
  double train_loss = 0.0;
  double val_micro_f1 = 0.0;
};

// Tracks the best validation score and keeps a checkpoint of the best
// parameters; signals stop after `patience` scores without improvement.
class EarlyStopper {
public:
  explicit EarlyStopper(std::uint32_t patience) : patience_(patience) {}

  bool step(double score, const ModelParams& params) {
    if (!has_best_ || score > best_score_) {
      best_score_ = score;
      best_params_ = params;
      has_best_ = true;
      since_best_ = 0;
      return false;
    }
    ++since_best_;
    return since_best_ >= patience_;
  }

  double best_score() const { return best_score_; }
  const ModelParams& best_params() const { return best_params_; }

private:
  std::uint32_t patience_;
  std::uint32_t since_best_ = 0;
  bool has_best_ = false;
  double best_score_ = 0.0;
  ModelParams best_params_;
};

struct TrainerWorker {
  std::uint32_t id = 0;
  LocalPartition local;
  SampleProbabilities cbs;
  ModelParams params;
  OptimizerState opt;
  Rng rng;
  double wall_seconds = 0.0;
};

std::vector<TrainerWorker> make_workers(const Dataset& ds,
                                        const PartitionAssignment& assignment,
                                        const TrainConfig& cfg);

// Element-wise mean over the gradient slots with a fixed, worker-id-ordered
// sequential summation, so every replica computes the bitwise-same result.
Gradients all_reduce_mean(const std::vector<Gradients>& slots);

// Flatness trigger over per-mini-epoch mean training losses.
bool switch_trigger(std::span<const double> epoch_mean_loss,
                    const TrainConfig& cfg);

struct Phase0Result {
  ModelParams best_params;  // W^G
  double best_val_micro = 0.0;
  std::uint32_t mini_epochs = 0;
  std::string stop_reason;  // early_stop | flatness | fixed | max_epochs
  std::vector<double> epoch_mean_loss;
  std::vector<double> epoch_mean_val;
  std::vector<double> epoch_train_seconds;  // iteration loop only, per epoch
  std::vector<HistoryRecord> history;
  std::vector<std::vector<std::uint64_t>> replica_hashes;  // iter x worker
  std::uint64_t messages = 0;  // gradient deposits into the channel
};

// Synchronous generalization: per iteration every worker computes local
// gradients, the channel averages them in worker order, and every replica
// applies the identical optimizer step. One shared stopper on the mean
// validation micro-F1; all workers stop together.
Phase0Result train_phase0(std::vector<TrainerWorker>& workers,
                          const Dataset& ds, const TrainConfig& cfg);

struct Phase1Result {
  std::vector<ModelParams> best_params;  // W_i^P per worker
  std::vector<double> best_val_micro;
  std::vector<std::uint32_t> mini_epochs;
  std::vector<HistoryRecord> history;
  std::uint64_t messages = 0;  // stays 0: no inter-worker communication
};

// Asynchronous personalization: workers run independently from the anchor
// W^G, each minimizing the proximally regularized loss with its own stopper
// on its local validation micro-F1.
Phase1Result train_phase1(std::vector<TrainerWorker>& workers,
                          const Dataset& ds, const ModelParams& anchor,
                          const TrainConfig& cfg);

struct EvaluateResult {
  std::vector<double> per_worker_micro;     // NaN where a test split is empty
  std::vector<double> per_worker_weighted;
  double aggregate_micro = 0.0;   // pooled global counts
  double aggregate_weighted = 0.0;
};

EvaluateResult evaluate_all(const std::vector<ModelParams>& models,
                            const std::vector<TrainerWorker>& workers,
                            const Dataset& ds, std::uint32_t max_threads = 0);

struct TrainResult {
  ModelParams global_params;
  std::vector<ModelParams> personal_params;
  std::vector<HistoryRecord> history;  // phase 0 rows then phase 1 rows
  std::uint32_t phase0_mini_epochs = 0;
  std::string phase0_stop_reason;
  double phase0_best_val_micro = 0.0;
  std::vector<double> phase0_epoch_mean_val;
  std::vector<double> phase0_epoch_mean_loss;
  std::vector<double> phase0_epoch_train_seconds;
  bool personalized = false;
  std::vector<double> phase1_best_val_micro;
  std::vector<std::uint32_t> phase1_mini_epochs;
  std::uint64_t phase0_messages = 0;
  std::uint64_t phase1_messages = 0;
  std::vector<std::vector<std::uint64_t>> replica_hashes;

  EvaluateResult final_eval;   // personalized models (or W^G when baseline)
  EvaluateResult global_eval;  // W^G on every worker, for lift comparisons

  double phase0_seconds = 0.0;  // measured wall time
  double phase1_seconds = 0.0;
  double total_seconds = 0.0;
};

TrainResult train(const Dataset& ds, const PartitionAssignment& assignment,
                  const TrainConfig& cfg);

// history.csv + metrics.json are deterministic given identical inputs;
// measured wall times go to timings.json. Checkpoints: global.ckpt plus one
// worker_<i>.ckpt per worker.
void write_train_outputs(const TrainResult& result, const TrainConfig& cfg,
                         const std::string& out_dir);

} // namespace entropart
