#include "core/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>

#include <json.hpp>

#include "core/io_util.hpp"
#include "core/thread_util.hpp"

namespace entropart {

namespace {

constexpr std::uint64_t kTagWorkerStream = 0x574b5253;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t fnv1a_params(const ModelParams& params) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& t : params.layers) {
    for (double x : t.data) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, 8);
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xff;
        h *= 1099511628211ULL;
      }
    }
  }
  return h;
}

std::vector<NodeId> to_global(const LocalPartition& local,
                              std::span<const NodeId> local_ids) {
  std::vector<NodeId> global;
  global.reserve(local_ids.size());
  for (NodeId v : local_ids) global.push_back(local.local_to_global[v]);
  return global;
}

double local_val_micro(const TrainerWorker& w, const ModelParams& params,
                       const Dataset& ds) {
  if (w.local.val_ids.empty()) return 0.0;
  const Predictions pred =
      predict(params, w.local, ds.features, ds.labels, w.local.val_ids);
  const std::vector<NodeId> global_ids = to_global(w.local, w.local.val_ids);
  return micro_f1(pred, ds.labels, global_ids);
}

std::vector<NodeId> draw_subset(TrainerWorker& w, const TrainConfig& cfg) {
  if (!cfg.sampler_enabled || cfg.baseline) {
    return w.local.train_ids;  // full training set each epoch
  }
  return sample_mini_epoch(w.local.train_ids, w.cbs.probs, cfg.fraction,
                           w.rng);
}

} // namespace

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.num_workers == 0)
    throw ValidationError("num_workers must be >= 1");
  if (cfg.lr <= 0.0) throw ValidationError("lr must be positive");
  if (cfg.hidden_dim == 0) throw ValidationError("hidden_dim must be >= 1");
  if (cfg.fanouts.size() != 2)
    throw ValidationError("fanouts must list exactly 2 layers");
  for (std::uint32_t f : cfg.fanouts)
    if (f == 0) throw ValidationError("fanout must be >= 1");
  if (cfg.batch_size == 0) throw ValidationError("batch_size must be >= 1");
  if (cfg.fraction <= 0.0 || cfg.fraction > 1.0)
    throw ValidationError("fraction must be in (0, 1]");
  if (cfg.lambda < 0.0) throw ValidationError("lambda must be >= 0");
  if (cfg.patience == 0) throw ValidationError("patience must be >= 1");
  if (cfg.switch_mode == PhaseSwitchMode::FixedFraction &&
      (cfg.switch_fixed_fraction <= 0.0 || cfg.switch_fixed_fraction > 1.0))
    throw ValidationError("switch fixed fraction must be in (0, 1]");
  if (cfg.switch_mode == PhaseSwitchMode::Auto && cfg.switch_window == 0)
    throw ValidationError("switch window must be >= 1");
  if (cfg.switch_threshold < 0.0)
    throw ValidationError("switch threshold must be >= 0");
  if (cfg.halo_depth < 2)
    throw ValidationError("halo_depth must cover the 2 GNN layers");
}

std::vector<TrainerWorker> make_workers(const Dataset& ds,
                                        const PartitionAssignment& assignment,
                                        const TrainConfig& cfg) {
  validate_train_config(cfg);
  validate_assignment(ds.graph, assignment);
  if (assignment.num_parts != cfg.num_workers)
    throw ValidationError("num_workers (" + std::to_string(cfg.num_workers) +
                          ") != assignment parts (" +
                          std::to_string(assignment.num_parts) + ")");

  std::vector<TrainerWorker> workers(cfg.num_workers);
  const ModelParams init = init_params(ds.features.dim, cfg.hidden_dim,
                                       ds.labels.num_classes, cfg.seed);
  parallel_for(cfg.num_workers, cfg.max_threads, [&](std::uint32_t i) {
    TrainerWorker& w = workers[i];
    w.id = i;
    w.local = induce_local_partition(ds.graph, assignment, ds.splits, i,
                                     cfg.halo_depth);
    if (w.local.train_ids.empty())
      throw ValidationError("worker " + std::to_string(i) +
                            " has no training nodes");
    if (w.local.val_ids.empty())
      throw ValidationError("worker " + std::to_string(i) +
                            " has no validation nodes");
    if (cfg.sampler_enabled && !cfg.baseline)
      w.cbs = cbs_probabilities(w.local, ds.labels, cfg.normalization);
    w.params = init;
    w.opt = init_optimizer(w.params, cfg.lr);
    w.rng = Rng(derive_seed(cfg.seed, kTagWorkerStream, i));
  });
  return workers;
}

Gradients all_reduce_mean(const std::vector<Gradients>& slots) {
  if (slots.empty()) throw ValidationError("all_reduce over zero workers");
  Gradients acc = slots[0];
  for (std::size_t w = 1; w < slots.size(); ++w) {
    if (slots[w].size() != acc.size())
      throw ValidationError("gradient set shape mismatch");
    for (std::size_t t = 0; t < acc.size(); ++t) {
      if (slots[w][t].data.size() != acc[t].data.size())
        throw ValidationError("gradient set shape mismatch");
      for (std::size_t k = 0; k < acc[t].data.size(); ++k)
        acc[t].data[k] += slots[w][t].data[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(slots.size());
  for (auto& t : acc)
    for (double& x : t.data) x *= inv;
  return acc;
}

bool switch_trigger(std::span<const double> epoch_mean_loss,
                    const TrainConfig& cfg) {
  if (cfg.switch_mode == PhaseSwitchMode::FixedFraction) {
    return static_cast<double>(epoch_mean_loss.size()) >=
           cfg.switch_fixed_fraction * cfg.phase0_max_epochs;
  }
  const std::size_t window = cfg.switch_window;
  const std::size_t n = epoch_mean_loss.size();
  if (n < window || n < 2) return false;
  double cur = 0.0;
  for (std::size_t i = n - window; i < n; ++i) cur += epoch_mean_loss[i];
  cur /= static_cast<double>(window);
  const std::size_t prev_begin = n > window ? n - window - 1 : 0;
  const std::size_t prev_count = (n - 1) - prev_begin;
  if (prev_count == 0) return false;
  double prev = 0.0;
  for (std::size_t i = prev_begin; i < n - 1; ++i) prev += epoch_mean_loss[i];
  prev /= static_cast<double>(prev_count);
  if (std::abs(prev) < 1e-12) return true;
  return (prev - cur) / std::abs(prev) < cfg.switch_threshold;
}

Phase0Result train_phase0(std::vector<TrainerWorker>& workers,
                          const Dataset& ds, const TrainConfig& cfg) {
  const std::uint32_t N = static_cast<std::uint32_t>(workers.size());
  Phase0Result result;
  EarlyStopper stopper(cfg.patience);
  std::vector<Gradients> slots(N);
  std::atomic<std::uint64_t> deposits{0};

  for (std::uint32_t epoch = 0; epoch < cfg.phase0_max_epochs; ++epoch) {
    const auto epoch_start = Clock::now();

    std::vector<std::vector<std::vector<NodeId>>> batches(N);
    parallel_for(N, cfg.max_threads, [&](std::uint32_t i) {
      const auto t0 = Clock::now();
      TrainerWorker& w = workers[i];
      const std::vector<NodeId> subset = draw_subset(w, cfg);
      batches[i] = make_batches(subset, cfg.batch_size, w.rng);
      w.wall_seconds += seconds_since(t0);
    });
    std::size_t iterations = 0;
    for (const auto& b : batches) iterations = std::max(iterations, b.size());

    std::vector<double> loss_sum(N, 0.0);
    std::vector<std::uint32_t> loss_count(N, 0);
    for (std::size_t iter = 0; iter < iterations; ++iter) {
      parallel_for(N, cfg.max_threads, [&](std::uint32_t i) {
        const auto t0 = Clock::now();
        TrainerWorker& w = workers[i];
        if (iter < batches[i].size()) {
          const auto& batch = batches[i][iter];
          const MiniBatchBlock block =
              sample_block(w.local.local_graph, batch, cfg.fanouts, w.rng);
          const ForwardTrace trace =
              forward(w.params, block, ds.features, w.local.local_to_global);
          BackwardResult back = backward(w.params, block, trace, ds.labels,
                                         to_global(w.local, block.seeds()));
          if (!std::isfinite(back.loss))
            throw ValidationError("phase-0 loss diverged (non-finite)");
          loss_sum[i] += back.loss;
          loss_count[i] += 1;
          slots[i] = std::move(back.grads);
        } else {
          slots[i] = zero_like(w.params);  // exhausted: zero contribution
        }
        deposits.fetch_add(1, std::memory_order_relaxed);
        w.wall_seconds += seconds_since(t0);
      });
      // The join above is the per-iteration barrier; every replica now
      // applies the identical averaged update.
      const Gradients mean = all_reduce_mean(slots);
      parallel_for(N, cfg.max_threads, [&](std::uint32_t i) {
        const auto t0 = Clock::now();
        adam_step(workers[i].params, mean, workers[i].opt);
        workers[i].wall_seconds += seconds_since(t0);
      });
      if (cfg.collect_replica_hashes) {
        std::vector<std::uint64_t> row(N);
        for (std::uint32_t i = 0; i < N; ++i)
          row[i] = fnv1a_params(workers[i].params);
        result.replica_hashes.push_back(std::move(row));
      }
    }
    result.epoch_train_seconds.push_back(seconds_since(epoch_start));

    std::vector<double> val(N, 0.0);
    parallel_for(N, cfg.max_threads, [&](std::uint32_t i) {
      const auto t0 = Clock::now();
      val[i] = local_val_micro(workers[i], workers[i].params, ds);
      workers[i].wall_seconds += seconds_since(t0);
    });
    double mean_val = 0.0;
    for (std::uint32_t i = 0; i < N; ++i) mean_val += val[i];
    mean_val /= N;

    double mean_loss = 0.0;
    for (std::uint32_t i = 0; i < N; ++i)
      mean_loss += loss_count[i] > 0 ? loss_sum[i] / loss_count[i] : 0.0;
    mean_loss /= N;
    result.epoch_mean_loss.push_back(mean_loss);
    result.epoch_mean_val.push_back(mean_val);

    for (std::uint32_t i = 0; i < N; ++i) {
      HistoryRecord rec;
      rec.phase = 0;
      rec.worker_id = i;
      rec.mini_epoch = epoch;
      rec.wall_time = workers[i].wall_seconds;
      rec.train_loss = loss_count[i] > 0 ? loss_sum[i] / loss_count[i] : 0.0;
      rec.val_micro_f1 = val[i];
      result.history.push_back(rec);
    }

    result.mini_epochs = epoch + 1;
    if (stopper.step(mean_val, workers[0].params)) {
      result.stop_reason = "early_stop";
      break;
    }
    if (!cfg.baseline && switch_trigger(result.epoch_mean_loss, cfg)) {
      result.stop_reason = cfg.switch_mode == PhaseSwitchMode::Auto
                               ? "flatness"
                               : "fixed";
      break;
    }
    if (epoch + 1 == cfg.phase0_max_epochs) result.stop_reason = "max_epochs";
  }

  result.best_params = stopper.best_params();
  result.best_val_micro = stopper.best_score();
  result.messages = deposits.load();
  return result;
}

Phase1Result train_phase1(std::vector<TrainerWorker>& workers,
                          const Dataset& ds, const ModelParams& anchor,
                          const TrainConfig& cfg) {
  const std::uint32_t N = static_cast<std::uint32_t>(workers.size());
  Phase1Result result;
  result.best_params.resize(N);
  result.best_val_micro.assign(N, 0.0);
  result.mini_epochs.assign(N, 0);
  std::vector<std::vector<HistoryRecord>> histories(N);

  // Fully independent workers: no channel, no barriers, zero messages.
  parallel_for(N, cfg.max_threads, [&](std::uint32_t i) {
    TrainerWorker& w = workers[i];
    w.params = anchor;  // "load personal model from the saved general model"
    w.opt = init_optimizer(w.params, cfg.lr);
    EarlyStopper stopper(cfg.patience);

    for (std::uint32_t epoch = 0; epoch < cfg.phase1_max_epochs; ++epoch) {
      const auto t0 = Clock::now();
      const std::vector<NodeId> subset = draw_subset(w, cfg);
      const auto epoch_batches = make_batches(subset, cfg.batch_size, w.rng);
      double loss_sum = 0.0;
      for (const auto& batch : epoch_batches) {
        const MiniBatchBlock block =
            sample_block(w.local.local_graph, batch, cfg.fanouts, w.rng);
        const ForwardTrace trace =
            forward(w.params, block, ds.features, w.local.local_to_global);
        BackwardResult back =
            backward(w.params, block, trace, ds.labels,
                     to_global(w.local, block.seeds()), cfg.lambda, &anchor);
        if (!std::isfinite(back.loss))
          throw ValidationError("phase-1 loss diverged (non-finite) on worker " +
                                std::to_string(i));
        loss_sum += back.loss;
        adam_step(w.params, back.grads, w.opt);
      }
      const double val = local_val_micro(w, w.params, ds);
      w.wall_seconds += seconds_since(t0);

      HistoryRecord rec;
      rec.phase = 1;
      rec.worker_id = i;
      rec.mini_epoch = epoch;
      rec.wall_time = w.wall_seconds;
      rec.train_loss =
          epoch_batches.empty() ? 0.0 : loss_sum / epoch_batches.size();
      rec.val_micro_f1 = val;
      histories[i].push_back(rec);
      result.mini_epochs[i] = epoch + 1;

      if (stopper.step(val, w.params)) break;
    }
    if (result.mini_epochs[i] == 0) {
      result.best_params[i] = anchor;
      result.best_val_micro[i] = local_val_micro(w, anchor, ds);
    } else {
      result.best_params[i] = stopper.best_params();
      result.best_val_micro[i] = stopper.best_score();
    }
  });

  for (auto& h : histories)
    result.history.insert(result.history.end(), h.begin(), h.end());
  return result;
}

EvaluateResult evaluate_all(const std::vector<ModelParams>& models,
                            const std::vector<TrainerWorker>& workers,
                            const Dataset& ds, std::uint32_t max_threads) {
  if (models.size() != workers.size())
    throw ValidationError("one model per worker required");
  const std::uint32_t N = static_cast<std::uint32_t>(workers.size());
  EvaluateResult result;
  result.per_worker_micro.assign(N, std::nan(""));
  result.per_worker_weighted.assign(N, std::nan(""));
  std::vector<F1Counts> counts(N);

  parallel_for(N, max_threads, [&](std::uint32_t i) {
    const TrainerWorker& w = workers[i];
    if (w.local.test_ids.empty()) return;
    const Predictions pred = predict(models[i], w.local, ds.features,
                                     ds.labels, w.local.test_ids);
    const std::vector<NodeId> global_ids = to_global(w.local, w.local.test_ids);
    counts[i] = f1_counts(pred, ds.labels, global_ids);
    result.per_worker_micro[i] = micro_f1_from_counts(counts[i]);
    result.per_worker_weighted[i] = weighted_f1_from_counts(counts[i]);
  });

  F1Counts pooled;
  pooled.tp.assign(ds.labels.num_classes, 0.0);
  pooled.fp.assign(ds.labels.num_classes, 0.0);
  pooled.fn.assign(ds.labels.num_classes, 0.0);
  for (std::uint32_t i = 0; i < N; ++i) {
    if (counts[i].tp.empty()) continue;
    for (std::uint32_t l = 0; l < ds.labels.num_classes; ++l) {
      pooled.tp[l] += counts[i].tp[l];
      pooled.fp[l] += counts[i].fp[l];
      pooled.fn[l] += counts[i].fn[l];
    }
  }
  result.aggregate_micro = micro_f1_from_counts(pooled);
  result.aggregate_weighted = weighted_f1_from_counts(pooled);
  return result;
}

TrainResult train(const Dataset& ds, const PartitionAssignment& assignment,
                  const TrainConfig& cfg) {
  const auto t_start = Clock::now();
  std::vector<TrainerWorker> workers = make_workers(ds, assignment, cfg);
  const std::uint32_t N = static_cast<std::uint32_t>(workers.size());

  TrainResult result;
  Phase0Result p0 = train_phase0(workers, ds, cfg);
  result.phase0_seconds = seconds_since(t_start);
  result.global_params = p0.best_params;
  result.phase0_mini_epochs = p0.mini_epochs;
  result.phase0_stop_reason = p0.stop_reason;
  result.phase0_best_val_micro = p0.best_val_micro;
  result.phase0_epoch_mean_val = p0.epoch_mean_val;
  result.phase0_epoch_mean_loss = p0.epoch_mean_loss;
  result.phase0_epoch_train_seconds = p0.epoch_train_seconds;
  result.phase0_messages = p0.messages;
  result.replica_hashes = std::move(p0.replica_hashes);
  result.history = std::move(p0.history);

  const auto t_phase1 = Clock::now();
  if (!cfg.baseline && cfg.phase1_max_epochs > 0) {
    Phase1Result p1 = train_phase1(workers, ds, result.global_params, cfg);
    result.personalized = true;
    result.personal_params = std::move(p1.best_params);
    result.phase1_best_val_micro = std::move(p1.best_val_micro);
    result.phase1_mini_epochs = std::move(p1.mini_epochs);
    result.phase1_messages = p1.messages;
    result.history.insert(result.history.end(), p1.history.begin(),
                          p1.history.end());
  } else {
    result.personal_params.assign(N, result.global_params);
    result.phase1_best_val_micro.assign(N, 0.0);
    result.phase1_mini_epochs.assign(N, 0);
  }
  result.phase1_seconds = seconds_since(t_phase1);

  std::vector<ModelParams> global_copies(N, result.global_params);
  result.global_eval = evaluate_all(global_copies, workers, ds, cfg.max_threads);
  result.final_eval =
      evaluate_all(result.personal_params, workers, ds, cfg.max_threads);
  result.total_seconds = seconds_since(t_start);
  return result;
}

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

nlohmann::json json_or_null(double x) {
  if (std::isnan(x)) return nullptr;
  return x;
}

} // namespace

void write_train_outputs(const TrainResult& result, const TrainConfig& cfg,
                         const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directory(out_dir, ec);  // parent must already exist
  if (!fs::is_directory(out_dir))
    throw IoError("cannot create output directory: " + out_dir);

  // history.csv: deterministic telemetry. Wall-clock measurements live in
  // timings.json instead so identical runs produce identical bytes.
  {
    std::string csv = "record,phase,worker_id,mini_epoch,train_loss,val_micro_f1\n";
    for (const auto& rec : result.history) {
      if (rec.phase != 0) continue;
      csv += "train,0," + std::to_string(rec.worker_id) + "," +
             std::to_string(rec.mini_epoch) + "," +
             format_double(rec.train_loss) + "," +
             format_double(rec.val_micro_f1) + "\n";
    }
    if (result.personalized) {
      csv += "switch,1,-1," + std::to_string(result.phase0_mini_epochs) +
             ",,\n";
      for (const auto& rec : result.history) {
        if (rec.phase != 1) continue;
        csv += "train,1," + std::to_string(rec.worker_id) + "," +
               std::to_string(rec.mini_epoch) + "," +
               format_double(rec.train_loss) + "," +
               format_double(rec.val_micro_f1) + "\n";
      }
    }
    write_file_atomic(out_dir + "/history.csv", csv);
  }

  {
    nlohmann::json j;
    j["num_workers"] = cfg.num_workers;
    j["baseline"] = cfg.baseline;
    j["phase0"] = {
        {"mini_epochs", result.phase0_mini_epochs},
        {"stop_reason", result.phase0_stop_reason},
        {"best_val_micro_f1", result.phase0_best_val_micro},
    };
    j["phase_switch_mini_epoch"] =
        result.personalized ? nlohmann::json(result.phase0_mini_epochs)
                            : nlohmann::json(nullptr);
    nlohmann::json per_worker = nlohmann::json::array();
    for (std::size_t i = 0; i < result.personal_params.size(); ++i) {
      nlohmann::json w;
      w["worker"] = i;
      w["test_micro_f1"] = json_or_null(result.final_eval.per_worker_micro[i]);
      w["test_weighted_f1"] =
          json_or_null(result.final_eval.per_worker_weighted[i]);
      w["global_model_test_micro_f1"] =
          json_or_null(result.global_eval.per_worker_micro[i]);
      w["phase1_mini_epochs"] = result.phase1_mini_epochs[i];
      w["phase1_best_val_micro_f1"] = result.phase1_best_val_micro[i];
      per_worker.push_back(w);
    }
    j["per_worker"] = per_worker;
    j["aggregate"] = {
        {"micro_f1", result.final_eval.aggregate_micro},
        {"weighted_f1", result.final_eval.aggregate_weighted},
        {"global_model_micro_f1", result.global_eval.aggregate_micro},
        {"global_model_weighted_f1", result.global_eval.aggregate_weighted},
    };
    write_file_atomic(out_dir + "/metrics.json", j.dump(2) + "\n");
  }

  {
    nlohmann::json j;
    j["phase0_seconds"] = result.phase0_seconds;
    j["phase1_seconds"] = result.phase1_seconds;
    j["total_seconds"] = result.total_seconds;
    j["phase0_epoch_train_seconds"] = result.phase0_epoch_train_seconds;
    write_file_atomic(out_dir + "/timings.json", j.dump(2) + "\n");
  }

  save_checkpoint(result.global_params, out_dir + "/global.ckpt");
  for (std::size_t i = 0; i < result.personal_params.size(); ++i)
    save_checkpoint(result.personal_params[i],
                    out_dir + "/worker_" + std::to_string(i) + ".ckpt");
}

} // namespace entropart
