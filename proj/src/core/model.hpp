#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/graph.hpp"
#include "core/metrics.hpp"
#include "core/rng.hpp"
#include "core/sampler.hpp"

namespace entropart {

struct Tensor {
  std::uint32_t rows = 0, cols = 0;
  std::vector<double> data;  // row-major

  double& at(std::uint32_t r, std::uint32_t c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(std::uint32_t r, std::uint32_t c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

// Two-layer GraphSAGE parameters. Layer i maps 2*in_i -> out_i because the
// aggregated neighborhood vector is concatenated with the node's own
// previous-layer embedding.
struct ModelParams {
  std::uint32_t input_dim = 0, hidden_dim = 0, output_dim = 0;
  std::vector<Tensor> layers;

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& t : layers) n += t.data.size();
    return n;
  }
};

// Seeded Glorot-uniform init: +-sqrt(6 / (fan_in + fan_out)).
ModelParams init_params(std::uint32_t input_dim, std::uint32_t hidden_dim,
                        std::uint32_t output_dim, std::uint64_t seed);

using Gradients = std::vector<Tensor>;
Gradients zero_like(const ModelParams& params);

struct LayerTrace {
  std::vector<double> agg;     // num_dst x in
  std::vector<double> preact;  // num_dst x out
  std::vector<double> output;  // num_dst x out
};

struct ForwardTrace {
  std::vector<double> input0;  // layer-0 src features, num_src x input_dim
  std::vector<LayerTrace> layers;

  const std::vector<double>& logits() const { return layers.back().output; }
};

// Layer rule: h_N(v) = mean of sampled previous-layer embeddings (zero when
// the sample is empty); h_v = sigma(W * concat(h_N(v), h_prev_v)). ReLU on
// the hidden layer, identity (logits) on the output layer.
ForwardTrace forward(const ModelParams& params, const MiniBatchBlock& block,
                     const NodeFeatures& feats,
                     std::span<const NodeId> local_to_global);

// Mean over the batch of -log softmax[label] (single) or of summed
// per-dimension binary cross-entropy on sigmoid outputs (multi).
double cross_entropy(std::span<const double> logits, std::uint32_t num_classes,
                     const LabelSet& labels,
                     std::span<const NodeId> batch_global_ids);

double proximal_penalty(const ModelParams& params, const ModelParams& anchor);

// base + lambda * ||flatten(params) - flatten(anchor)||_2^2
double regularized_loss(double base_loss, const ModelParams& params,
                        const ModelParams& anchor, double lambda);

struct BackwardResult {
  double loss = 0.0;  // includes the proximal term when lambda > 0
  Gradients grads;
};

// Exact reverse-mode gradients of the (optionally regularized) batch loss
// with respect to every layer weight matrix. anchor may be null when
// lambda == 0.
BackwardResult backward(const ModelParams& params, const MiniBatchBlock& block,
                        const ForwardTrace& trace, const LabelSet& labels,
                        std::span<const NodeId> batch_global_ids,
                        double lambda = 0.0,
                        const ModelParams* anchor = nullptr);

struct OptimizerState {
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor> m, v;
};

OptimizerState init_optimizer(const ModelParams& params, double lr);
void adam_step(ModelParams& params, const Gradients& grads,
               OptimizerState& state);

// Full-neighborhood predictions for the given owned local nodes: argmax of
// the logits (single) or sigmoid threshold 0.5 per dimension (multi).
Predictions predict(const ModelParams& params, const LocalPartition& local,
                    const NodeFeatures& feats, const LabelSet& labels,
                    std::span<const NodeId> local_nodes);

void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

} // namespace entropart
