/* entropart — entropy-aware graph partitioning and distributed GNN training
 * toolkit. C API over the C++ core: opaque handles, status codes, and
 * thread-local error messages. All functions return EP_OK on success.
 */
#ifndef ENTROPART_H
#define ENTROPART_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ep_status {
  EP_OK = 0,
  EP_ERR_INVALID_ARGUMENT = 1, /* null handles, malformed calls */
  EP_ERR_VALIDATION = 2,       /* semantically invalid inputs */
  EP_ERR_IO = 3,               /* filesystem / serialization failures */
  EP_ERR_RUNTIME = 4
} ep_status;

const char* ep_status_name(ep_status status);

/* Message for the most recent failure on this thread. */
const char* ep_last_error(void);

typedef struct ep_dataset ep_dataset;
typedef struct ep_edge_weights ep_edge_weights;
typedef struct ep_assignment ep_assignment;
typedef struct ep_train_result ep_train_result;

/* ------------------------------------------------------------------ */
/* datasets                                                           */

typedef struct ep_gen_spec {
  uint32_t num_nodes;
  uint32_t num_classes;
  const double* class_proportions; /* num_classes entries, sums to 1 */
  double homophily;                /* [0,1] */
  double avg_degree;
  uint32_t feature_dim;
  double feature_noise;
  uint64_t seed;
} ep_gen_spec;

ep_status ep_dataset_generate(const ep_gen_spec* spec, ep_dataset** out);
ep_status ep_dataset_load(const char* dir, ep_dataset** out);
ep_status ep_dataset_save(const ep_dataset* ds, const char* dir);
void ep_dataset_free(ep_dataset* ds);

uint32_t ep_dataset_num_nodes(const ep_dataset* ds);
uint64_t ep_dataset_num_edges(const ep_dataset* ds); /* directed entries */
uint32_t ep_dataset_feature_dim(const ep_dataset* ds);
uint32_t ep_dataset_num_classes(const ep_dataset* ds);
int ep_dataset_is_multilabel(const ep_dataset* ds);

/* Invariant report: returns a newline-joined list of violations (empty
 * string when the dataset is consistent). Free with ep_string_free. */
ep_status ep_dataset_validate(const ep_dataset* ds, char** out_report);
void ep_string_free(char* s);

/* ------------------------------------------------------------------ */
/* partitioning                                                       */

/* Algorithm-1 weights: (c * feature_similarity + degree_term) * 100,
 * clamped to >= 1 and symmetrized. */
ep_status ep_edge_weights_compute(const ep_dataset* ds, double c,
                                  uint32_t fanout_k, ep_edge_weights** out);
ep_status ep_edge_weights_unit(const ep_dataset* ds, ep_edge_weights** out);
void ep_edge_weights_free(ep_edge_weights* w);

typedef struct ep_partition_options {
  uint32_t num_parts;
  double imbalance_epsilon; /* <= 0 picks the 0.05 default */
  uint32_t coarsen_stop;    /* 0 picks the 200 default */
  uint32_t refine_passes;   /* 0 picks the 10 default */
  uint64_t seed;
} ep_partition_options;

ep_status ep_partition_run(const ep_dataset* ds, const ep_edge_weights* w,
                           const ep_partition_options* options,
                           ep_assignment** out);
void ep_assignment_free(ep_assignment* a);

uint32_t ep_assignment_num_parts(const ep_assignment* a);
ep_status ep_assignment_parts(const ep_assignment* a, uint32_t* out,
                              size_t out_len);
ep_status ep_assignment_save(const ep_assignment* a, const char* path);
ep_status ep_assignment_load(const char* path, const ep_dataset* ds,
                             ep_assignment** out);

ep_status ep_edge_cut(const ep_dataset* ds, const ep_edge_weights* w,
                      const ep_assignment* a, uint64_t* out_cut);

/* Per-part entropy diagnostics (log base 2). Arrays must hold
 * ep_assignment_num_parts entries. */
ep_status ep_entropy_report(const ep_dataset* ds, const ep_assignment* a,
                            double* out_per_part_entropy,
                            uint64_t* out_per_part_sizes,
                            double* out_total_entropy);

/* Entropy of the whole graph's label distribution. */
ep_status ep_graph_entropy(const ep_dataset* ds, double* out_entropy);

/* ------------------------------------------------------------------ */
/* training                                                           */

typedef struct ep_train_options {
  uint32_t num_workers;
  double lr;                /* <= 0 picks 0.001 */
  uint32_t hidden_dim;      /* 0 picks 256 */
  uint32_t fanouts[2];      /* 0 entries pick 25 */
  uint32_t batch_size;      /* 0 picks 1024 */
  double fraction;          /* <= 0 picks 0.25 */
  int sampler_enabled;      /* nonzero = CBS mini-epochs */
  int symmetric_normalization; /* 0 = as-written D^{-1/2} A D^{+1/2} */
  double lambda;            /* < 0 picks 1e-4 */
  uint32_t patience;        /* 0 picks 5 */
  uint32_t phase0_max_epochs; /* 0 picks 100 */
  uint32_t phase1_max_epochs; /* 0 picks 100 */
  int fixed_switch;         /* nonzero = fixed-fraction phase switch */
  double switch_fixed_fraction; /* <= 0 picks 0.5 */
  uint32_t switch_window;   /* 0 picks 5 */
  double switch_threshold;  /* < 0 picks 0.01 */
  uint64_t seed;
  int baseline;             /* phase 0 + early stopping only, CBS off */
  uint32_t max_threads;     /* 0 = one thread per worker */
  uint32_t halo_depth;      /* 0 picks 2 (= number of GNN layers) */
} ep_train_options;

/* Fills every field with the documented defaults (4 workers, seed 1). */
void ep_train_options_init(ep_train_options* options);

/* Runs the full two-phase pipeline. When out_dir is non-null, writes
 * history.csv, metrics.json, timings.json and the model checkpoints there. */
ep_status ep_train_run(const ep_dataset* ds, const ep_assignment* a,
                       const ep_train_options* options, const char* out_dir,
                       ep_train_result** out);
void ep_train_result_free(ep_train_result* r);

double ep_train_result_aggregate_micro_f1(const ep_train_result* r);
double ep_train_result_aggregate_weighted_f1(const ep_train_result* r);
double ep_train_result_worker_test_micro_f1(const ep_train_result* r,
                                            uint32_t worker);
/* Test micro-F1 of the phase-0 global model on a worker's split. */
double ep_train_result_global_test_micro_f1(const ep_train_result* r,
                                            uint32_t worker);
uint32_t ep_train_result_phase0_epochs(const ep_train_result* r);
double ep_train_result_phase0_best_val_micro_f1(const ep_train_result* r);
uint64_t ep_train_result_phase1_messages(const ep_train_result* r);
double ep_train_result_phase0_seconds(const ep_train_result* r);
double ep_train_result_phase1_seconds(const ep_train_result* r);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ENTROPART_H */
