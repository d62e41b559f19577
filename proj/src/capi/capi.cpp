#include "entropart/entropart.h"

#include <cstring>
#include <string>

#include "core/datagen.hpp"
#include "core/dataset_io.hpp"
#include "core/edge_weights.hpp"
#include "core/metrics.hpp"
#include "core/partitioner.hpp"
#include "core/trainer.hpp"

using namespace entropart;

struct ep_dataset {
  Dataset ds;
};
struct ep_edge_weights {
  EdgeWeights w;
};
struct ep_assignment {
  PartitionAssignment a;
};
struct ep_train_result {
  TrainResult r;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
ep_status guarded(Fn&& fn) {
  try {
    fn();
    return EP_OK;
  } catch (const ValidationError& e) {
    g_last_error = e.what();
    return EP_ERR_VALIDATION;
  } catch (const IoError& e) {
    g_last_error = e.what();
    return EP_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EP_ERR_RUNTIME;
  }
}

ep_status invalid(const char* msg) {
  g_last_error = msg;
  return EP_ERR_INVALID_ARGUMENT;
}

} // namespace

extern "C" {

const char* ep_status_name(ep_status status) {
  switch (status) {
    case EP_OK: return "ok";
    case EP_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case EP_ERR_VALIDATION: return "validation_error";
    case EP_ERR_IO: return "io_error";
    case EP_ERR_RUNTIME: return "runtime_error";
  }
  return "unknown";
}

const char* ep_last_error(void) { return g_last_error.c_str(); }

ep_status ep_dataset_generate(const ep_gen_spec* spec, ep_dataset** out) {
  if (!spec || !out) return invalid("null argument");
  if (!spec->class_proportions) return invalid("null class_proportions");
  return guarded([&] {
    GenSpec gs;
    gs.num_nodes = spec->num_nodes;
    gs.num_classes = spec->num_classes;
    gs.class_proportions.assign(spec->class_proportions,
                                spec->class_proportions + spec->num_classes);
    gs.homophily = spec->homophily;
    gs.avg_degree = spec->avg_degree;
    gs.feature_dim = spec->feature_dim;
    gs.feature_noise = spec->feature_noise;
    gs.seed = spec->seed;
    *out = new ep_dataset{generate(gs)};
  });
}

ep_status ep_dataset_load(const char* dir, ep_dataset** out) {
  if (!dir || !out) return invalid("null argument");
  return guarded([&] { *out = new ep_dataset{load_dataset(dir)}; });
}

ep_status ep_dataset_save(const ep_dataset* ds, const char* dir) {
  if (!ds || !dir) return invalid("null argument");
  return guarded([&] { save_dataset(ds->ds, dir); });
}

void ep_dataset_free(ep_dataset* ds) { delete ds; }

uint32_t ep_dataset_num_nodes(const ep_dataset* ds) {
  return ds ? ds->ds.graph.num_nodes : 0;
}
uint64_t ep_dataset_num_edges(const ep_dataset* ds) {
  return ds ? ds->ds.graph.num_edges : 0;
}
uint32_t ep_dataset_feature_dim(const ep_dataset* ds) {
  return ds ? ds->ds.features.dim : 0;
}
uint32_t ep_dataset_num_classes(const ep_dataset* ds) {
  return ds ? ds->ds.labels.num_classes : 0;
}
int ep_dataset_is_multilabel(const ep_dataset* ds) {
  return ds && ds->ds.labels.mode == LabelMode::Multi ? 1 : 0;
}

ep_status ep_dataset_validate(const ep_dataset* ds, char** out_report) {
  if (!ds || !out_report) return invalid("null argument");
  return guarded([&] {
    const auto violations = validate_dataset(ds->ds);
    std::string joined;
    for (std::size_t i = 0; i < violations.size(); ++i) {
      if (i > 0) joined += "\n";
      joined += violations[i];
    }
    char* buf = new char[joined.size() + 1];
    std::memcpy(buf, joined.c_str(), joined.size() + 1);
    *out_report = buf;
  });
}

void ep_string_free(char* s) { delete[] s; }

ep_status ep_edge_weights_compute(const ep_dataset* ds, double c,
                                  uint32_t fanout_k, ep_edge_weights** out) {
  if (!ds || !out) return invalid("null argument");
  return guarded([&] {
    *out = new ep_edge_weights{
        assign_edge_weights(ds->ds.graph, ds->ds.features, c, fanout_k)};
  });
}

ep_status ep_edge_weights_unit(const ep_dataset* ds, ep_edge_weights** out) {
  if (!ds || !out) return invalid("null argument");
  return guarded([&] { *out = new ep_edge_weights{unit_weights(ds->ds.graph)}; });
}

void ep_edge_weights_free(ep_edge_weights* w) { delete w; }

ep_status ep_partition_run(const ep_dataset* ds, const ep_edge_weights* w,
                           const ep_partition_options* options,
                           ep_assignment** out) {
  if (!ds || !w || !options || !out) return invalid("null argument");
  return guarded([&] {
    PartitionerConfig cfg;
    cfg.num_parts = options->num_parts;
    cfg.imbalance_epsilon =
        options->imbalance_epsilon > 0.0 ? options->imbalance_epsilon : 0.05;
    cfg.coarsen_stop = options->coarsen_stop > 0 ? options->coarsen_stop : 200;
    cfg.refine_passes =
        options->refine_passes > 0 ? options->refine_passes : 10;
    cfg.seed = options->seed;
    *out = new ep_assignment{partition(ds->ds.graph, w->w, cfg)};
  });
}

void ep_assignment_free(ep_assignment* a) { delete a; }

uint32_t ep_assignment_num_parts(const ep_assignment* a) {
  return a ? a->a.num_parts : 0;
}

ep_status ep_assignment_parts(const ep_assignment* a, uint32_t* out,
                              size_t out_len) {
  if (!a || !out) return invalid("null argument");
  if (out_len < a->a.part_of.size()) return invalid("output buffer too small");
  std::memcpy(out, a->a.part_of.data(), a->a.part_of.size() * 4);
  return EP_OK;
}

ep_status ep_assignment_save(const ep_assignment* a, const char* path) {
  if (!a || !path) return invalid("null argument");
  return guarded([&] { save_assignment(a->a, path); });
}

ep_status ep_assignment_load(const char* path, const ep_dataset* ds,
                             ep_assignment** out) {
  if (!path || !ds || !out) return invalid("null argument");
  return guarded([&] {
    *out = new ep_assignment{load_assignment(path, ds->ds.graph.num_nodes)};
  });
}

ep_status ep_edge_cut(const ep_dataset* ds, const ep_edge_weights* w,
                      const ep_assignment* a, uint64_t* out_cut) {
  if (!ds || !w || !a || !out_cut) return invalid("null argument");
  return guarded([&] { *out_cut = edge_cut(ds->ds.graph, w->w, a->a); });
}

ep_status ep_entropy_report(const ep_dataset* ds, const ep_assignment* a,
                            double* out_per_part_entropy,
                            uint64_t* out_per_part_sizes,
                            double* out_total_entropy) {
  if (!ds || !a || !out_per_part_entropy || !out_per_part_sizes ||
      !out_total_entropy)
    return invalid("null argument");
  return guarded([&] {
    validate_assignment(ds->ds.graph, a->a);
    const EntropyReport report = total_entropy(ds->ds.labels, a->a);
    for (std::size_t p = 0; p < report.per_part_entropy.size(); ++p) {
      out_per_part_entropy[p] = report.per_part_entropy[p];
      out_per_part_sizes[p] = report.per_part_sizes[p];
    }
    *out_total_entropy = report.total_entropy;
  });
}

ep_status ep_graph_entropy(const ep_dataset* ds, double* out_entropy) {
  if (!ds || !out_entropy) return invalid("null argument");
  return guarded([&] {
    std::vector<NodeId> all(ds->ds.graph.num_nodes);
    for (NodeId v = 0; v < ds->ds.graph.num_nodes; ++v) all[v] = v;
    *out_entropy = entropy(label_distribution(ds->ds.labels, all));
  });
}

void ep_train_options_init(ep_train_options* options) {
  if (!options) return;
  std::memset(options, 0, sizeof(*options));
  options->num_workers = 4;
  options->lr = 1e-3;
  options->hidden_dim = 256;
  options->fanouts[0] = 25;
  options->fanouts[1] = 25;
  options->batch_size = 1024;
  options->fraction = 0.25;
  options->sampler_enabled = 1;
  options->lambda = 1e-4;
  options->patience = 5;
  options->phase0_max_epochs = 100;
  options->phase1_max_epochs = 100;
  options->switch_fixed_fraction = 0.5;
  options->switch_window = 5;
  options->switch_threshold = 0.01;
  options->seed = 1;
}

ep_status ep_train_run(const ep_dataset* ds, const ep_assignment* a,
                       const ep_train_options* options, const char* out_dir,
                       ep_train_result** out) {
  if (!ds || !a || !options || !out) return invalid("null argument");
  return guarded([&] {
    TrainConfig cfg;
    cfg.num_workers = options->num_workers;
    cfg.lr = options->lr > 0.0 ? options->lr : 1e-3;
    cfg.hidden_dim = options->hidden_dim > 0 ? options->hidden_dim : 256;
    cfg.fanouts = {options->fanouts[0] > 0 ? options->fanouts[0] : 25,
                   options->fanouts[1] > 0 ? options->fanouts[1] : 25};
    cfg.batch_size = options->batch_size > 0 ? options->batch_size : 1024;
    cfg.fraction = options->fraction > 0.0 ? options->fraction : 0.25;
    cfg.sampler_enabled = options->sampler_enabled != 0;
    cfg.normalization = options->symmetric_normalization
                            ? AdjNormalization::Symmetric
                            : AdjNormalization::AsWritten;
    cfg.lambda = options->lambda >= 0.0 ? options->lambda : 1e-4;
    cfg.patience = options->patience > 0 ? options->patience : 5;
    cfg.phase0_max_epochs =
        options->phase0_max_epochs > 0 ? options->phase0_max_epochs : 100;
    cfg.phase1_max_epochs =
        options->phase1_max_epochs > 0 ? options->phase1_max_epochs : 100;
    cfg.switch_mode = options->fixed_switch ? PhaseSwitchMode::FixedFraction
                                            : PhaseSwitchMode::Auto;
    cfg.switch_fixed_fraction = options->switch_fixed_fraction > 0.0
                                    ? options->switch_fixed_fraction
                                    : 0.5;
    cfg.switch_window =
        options->switch_window > 0 ? options->switch_window : 5;
    cfg.switch_threshold =
        options->switch_threshold >= 0.0 ? options->switch_threshold : 0.01;
    cfg.seed = options->seed;
    cfg.baseline = options->baseline != 0;
    cfg.max_threads = options->max_threads;
    cfg.halo_depth = options->halo_depth > 0 ? options->halo_depth : 2;

    TrainResult result = train(ds->ds, a->a, cfg);
    if (out_dir) write_train_outputs(result, cfg, out_dir);
    *out = new ep_train_result{std::move(result)};
  });
}

void ep_train_result_free(ep_train_result* r) { delete r; }

double ep_train_result_aggregate_micro_f1(const ep_train_result* r) {
  return r ? r->r.final_eval.aggregate_micro : 0.0;
}
double ep_train_result_aggregate_weighted_f1(const ep_train_result* r) {
  return r ? r->r.final_eval.aggregate_weighted : 0.0;
}
double ep_train_result_worker_test_micro_f1(const ep_train_result* r,
                                            uint32_t worker) {
  if (!r || worker >= r->r.final_eval.per_worker_micro.size()) return 0.0;
  return r->r.final_eval.per_worker_micro[worker];
}
double ep_train_result_global_test_micro_f1(const ep_train_result* r,
                                            uint32_t worker) {
  if (!r || worker >= r->r.global_eval.per_worker_micro.size()) return 0.0;
  return r->r.global_eval.per_worker_micro[worker];
}
uint32_t ep_train_result_phase0_epochs(const ep_train_result* r) {
  return r ? r->r.phase0_mini_epochs : 0;
}
double ep_train_result_phase0_best_val_micro_f1(const ep_train_result* r) {
  return r ? r->r.phase0_best_val_micro : 0.0;
}
uint64_t ep_train_result_phase1_messages(const ep_train_result* r) {
  return r ? r->r.phase1_messages : 0;
}
double ep_train_result_phase0_seconds(const ep_train_result* r) {
  return r ? r->r.phase0_seconds : 0.0;
}
double ep_train_result_phase1_seconds(const ep_train_result* r) {
  return r ? r->r.phase1_seconds : 0.0;
}

} // extern "C"
