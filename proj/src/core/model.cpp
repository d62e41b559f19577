#include "core/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "core/io_util.hpp"

namespace entropart {

namespace {

constexpr std::uint64_t kTagInit = 0x494e4954;

double relu(double x) { return x > 0.0 ? x : 0.0; }

// Stable binary cross-entropy with logits.
double bce_with_logits(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

struct LossGrad {
  double loss = 0.0;
  std::vector<double> dlogits;  // batch x num_classes, already / batch size
};

LossGrad loss_with_grad(std::span<const double> logits,
                        std::uint32_t num_classes, const LabelSet& labels,
                        std::span<const NodeId> batch_global_ids) {
  const std::size_t batch = batch_global_ids.size();
  if (batch == 0) throw ValidationError("empty batch");
  if (logits.size() != batch * num_classes)
    throw ValidationError("logit shape mismatch");
  LossGrad lg;
  lg.dlogits.assign(logits.size(), 0.0);
  const double inv_batch = 1.0 / static_cast<double>(batch);

  if (labels.mode == LabelMode::Single) {
    std::vector<double> p(num_classes);
    for (std::size_t j = 0; j < batch; ++j) {
      const double* row = logits.data() + j * num_classes;
      const ClassId y = labels.single_labels[batch_global_ids[j]];
      if (y >= num_classes) throw ValidationError("label id out of range");
      double max_logit = row[0];
      for (std::uint32_t d = 1; d < num_classes; ++d)
        max_logit = std::max(max_logit, row[d]);
      double z = 0.0;
      for (std::uint32_t d = 0; d < num_classes; ++d) {
        p[d] = std::exp(row[d] - max_logit);
        z += p[d];
      }
      lg.loss += -(row[y] - max_logit - std::log(z)) * inv_batch;
      for (std::uint32_t d = 0; d < num_classes; ++d)
        lg.dlogits[j * num_classes + d] =
            (p[d] / z - (d == y ? 1.0 : 0.0)) * inv_batch;
    }
  } else {
    for (std::size_t j = 0; j < batch; ++j) {
      const double* row = logits.data() + j * num_classes;
      const auto truth = labels.multi_row(batch_global_ids[j]);
      for (std::uint32_t d = 0; d < num_classes; ++d) {
        const double y = truth[d];
        lg.loss += bce_with_logits(row[d], y) * inv_batch;
        const double s = 1.0 / (1.0 + std::exp(-row[d]));
        lg.dlogits[j * num_classes + d] = (s - y) * inv_batch;
      }
    }
  }
  return lg;
}

} // namespace

ModelParams init_params(std::uint32_t input_dim, std::uint32_t hidden_dim,
                        std::uint32_t output_dim, std::uint64_t seed) {
  if (input_dim == 0 || hidden_dim == 0 || output_dim == 0)
    throw ValidationError("model dimensions must be positive");
  ModelParams params;
  params.input_dim = input_dim;
  params.hidden_dim = hidden_dim;
  params.output_dim = output_dim;
  Rng rng(derive_seed(seed, kTagInit));
  const std::uint32_t dims[3] = {input_dim, hidden_dim, output_dim};
  for (int i = 0; i < 2; ++i) {
    Tensor t;
    t.rows = dims[i + 1];
    t.cols = 2 * dims[i];
    t.data.resize(static_cast<std::size_t>(t.rows) * t.cols);
    const double bound = std::sqrt(6.0 / (t.cols + t.rows));
    for (double& w : t.data) w = rng.uniform(-bound, bound);
    params.layers.push_back(std::move(t));
  }
  return params;
}

Gradients zero_like(const ModelParams& params) {
  Gradients grads;
  for (const auto& t : params.layers) {
    Tensor z;
    z.rows = t.rows;
    z.cols = t.cols;
    z.data.assign(t.data.size(), 0.0);
    grads.push_back(std::move(z));
  }
  return grads;
}

ForwardTrace forward(const ModelParams& params, const MiniBatchBlock& block,
                     const NodeFeatures& feats,
                     std::span<const NodeId> local_to_global) {
  if (block.layers.size() != params.layers.size())
    throw ValidationError("block layer count does not match model");
  if (feats.dim != params.input_dim)
    throw ValidationError("feature dim does not match model input dim");

  ForwardTrace trace;
  trace.layers.resize(params.layers.size());

  const auto& src0 = block.layers[0].src;
  trace.input0.resize(src0.size() * static_cast<std::size_t>(params.input_dim));
  for (std::size_t i = 0; i < src0.size(); ++i) {
    const auto row = feats.row(local_to_global[src0[i]]);
    for (std::uint32_t d = 0; d < params.input_dim; ++d)
      trace.input0[i * params.input_dim + d] = row[d];
  }

  for (std::size_t layer = 0; layer < params.layers.size(); ++layer) {
    const BlockLayer& bl = block.layers[layer];
    const Tensor& w = params.layers[layer];
    const std::uint32_t in_dim = w.cols / 2;
    const std::uint32_t out_dim = w.rows;
    const std::vector<double>& h_in =
        layer == 0 ? trace.input0 : trace.layers[layer - 1].output;
    if (h_in.size() != bl.src.size() * static_cast<std::size_t>(in_dim))
      throw ValidationError("activation shape mismatch in forward");

    LayerTrace& lt = trace.layers[layer];
    const std::size_t num_dst = bl.dst.size();
    lt.agg.assign(num_dst * in_dim, 0.0);
    lt.preact.assign(num_dst * out_dim, 0.0);
    lt.output.assign(num_dst * out_dim, 0.0);

    for (std::size_t j = 0; j < num_dst; ++j) {
      double* agg = lt.agg.data() + j * in_dim;
      const std::uint32_t begin = bl.edge_offsets[j];
      const std::uint32_t end = bl.edge_offsets[j + 1];
      for (std::uint32_t e = begin; e < end; ++e) {
        const double* src_row = h_in.data() +
                                static_cast<std::size_t>(bl.edge_src_index[e]) * in_dim;
        for (std::uint32_t d = 0; d < in_dim; ++d) agg[d] += src_row[d];
      }
      if (end > begin) {
        const double inv = 1.0 / static_cast<double>(end - begin);
        for (std::uint32_t d = 0; d < in_dim; ++d) agg[d] *= inv;
      }

      // concat(h_N(v), h_v): destinations are the first rows of src.
      const double* self = h_in.data() + j * in_dim;
      double* pre = lt.preact.data() + j * out_dim;
      for (std::uint32_t o = 0; o < out_dim; ++o) {
        const double* wrow = w.data.data() + static_cast<std::size_t>(o) * w.cols;
        double acc = 0.0;
        for (std::uint32_t d = 0; d < in_dim; ++d) acc += wrow[d] * agg[d];
        for (std::uint32_t d = 0; d < in_dim; ++d)
          acc += wrow[in_dim + d] * self[d];
        pre[o] = acc;
      }
      double* out = lt.output.data() + j * out_dim;
      const bool is_output_layer = layer + 1 == params.layers.size();
      for (std::uint32_t o = 0; o < out_dim; ++o)
        out[o] = is_output_layer ? pre[o] : relu(pre[o]);
    }
  }
  return trace;
}

double cross_entropy(std::span<const double> logits, std::uint32_t num_classes,
                     const LabelSet& labels,
                     std::span<const NodeId> batch_global_ids) {
  return loss_with_grad(logits, num_classes, labels, batch_global_ids).loss;
}

double proximal_penalty(const ModelParams& params, const ModelParams& anchor) {
  if (params.layers.size() != anchor.layers.size())
    throw ValidationError("parameter/anchor shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& p = params.layers[i].data;
    const auto& a = anchor.layers[i].data;
    if (p.size() != a.size())
      throw ValidationError("parameter/anchor shape mismatch");
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double diff = p[k] - a[k];
      sum += diff * diff;
    }
  }
  return sum;
}

double regularized_loss(double base_loss, const ModelParams& params,
                        const ModelParams& anchor, double lambda) {
  if (lambda == 0.0) return base_loss;
  return base_loss + lambda * proximal_penalty(params, anchor);
}

BackwardResult backward(const ModelParams& params, const MiniBatchBlock& block,
                        const ForwardTrace& trace, const LabelSet& labels,
                        std::span<const NodeId> batch_global_ids,
                        double lambda, const ModelParams* anchor) {
  BackwardResult result;
  result.grads = zero_like(params);

  LossGrad lg = loss_with_grad(trace.logits(), params.output_dim, labels,
                               batch_global_ids);
  result.loss = lg.loss;

  std::vector<double> d_out = std::move(lg.dlogits);
  for (std::size_t layer = params.layers.size(); layer-- > 0;) {
    const BlockLayer& bl = block.layers[layer];
    const Tensor& w = params.layers[layer];
    Tensor& dw = result.grads[layer];
    const std::uint32_t in_dim = w.cols / 2;
    const std::uint32_t out_dim = w.rows;
    const LayerTrace& lt = trace.layers[layer];
    const std::vector<double>& h_in =
        layer == 0 ? trace.input0 : trace.layers[layer - 1].output;
    const bool is_output_layer = layer + 1 == params.layers.size();

    std::vector<double> d_in(h_in.size(), 0.0);
    std::vector<double> d_pre(out_dim);
    std::vector<double> d_concat(2 * static_cast<std::size_t>(in_dim));
    for (std::size_t j = 0; j < bl.dst.size(); ++j) {
      const double* dout_row = d_out.data() + j * out_dim;
      const double* pre = lt.preact.data() + j * out_dim;
      for (std::uint32_t o = 0; o < out_dim; ++o)
        d_pre[o] = is_output_layer ? dout_row[o]
                                   : (pre[o] > 0.0 ? dout_row[o] : 0.0);

      const double* agg = lt.agg.data() + j * in_dim;
      const double* self = h_in.data() + j * in_dim;
      std::fill(d_concat.begin(), d_concat.end(), 0.0);
      for (std::uint32_t o = 0; o < out_dim; ++o) {
        const double g = d_pre[o];
        if (g == 0.0) continue;
        double* dwrow = dw.data.data() + static_cast<std::size_t>(o) * w.cols;
        const double* wrow = w.data.data() + static_cast<std::size_t>(o) * w.cols;
        for (std::uint32_t d = 0; d < in_dim; ++d) {
          dwrow[d] += g * agg[d];
          dwrow[in_dim + d] += g * self[d];
          d_concat[d] += g * wrow[d];
          d_concat[in_dim + d] += g * wrow[in_dim + d];
        }
      }

      // Self half flows to the destination's own input row (row j of src).
      double* dself_row = d_in.data() + j * in_dim;
      for (std::uint32_t d = 0; d < in_dim; ++d)
        dself_row[d] += d_concat[in_dim + d];

      // Aggregated half spreads evenly over the sampled sources.
      const std::uint32_t begin = bl.edge_offsets[j];
      const std::uint32_t end = bl.edge_offsets[j + 1];
      if (end > begin) {
        const double inv = 1.0 / static_cast<double>(end - begin);
        for (std::uint32_t e = begin; e < end; ++e) {
          double* dsrc_row =
              d_in.data() + static_cast<std::size_t>(bl.edge_src_index[e]) * in_dim;
          for (std::uint32_t d = 0; d < in_dim; ++d)
            dsrc_row[d] += d_concat[d] * inv;
        }
      }
    }
    d_out = std::move(d_in);
  }

  if (lambda != 0.0) {
    if (anchor == nullptr)
      throw ValidationError("regularized backward requires an anchor");
    result.loss = regularized_loss(result.loss, params, *anchor, lambda);
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
      const auto& p = params.layers[i].data;
      const auto& a = anchor->layers[i].data;
      auto& g = result.grads[i].data;
      for (std::size_t k = 0; k < p.size(); ++k)
        g[k] += 2.0 * lambda * (p[k] - a[k]);
    }
  }
  return result;
}

OptimizerState init_optimizer(const ModelParams& params, double lr) {
  OptimizerState state;
  state.lr = lr;
  state.m = zero_like(params);
  state.v = zero_like(params);
  return state;
}

void adam_step(ModelParams& params, const Gradients& grads,
               OptimizerState& state) {
  if (grads.size() != params.layers.size())
    throw ValidationError("gradient/parameter shape mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    auto& w = params.layers[i].data;
    const auto& g = grads[i].data;
    if (g.size() != w.size())
      throw ValidationError("gradient/parameter shape mismatch");
    auto& m = state.m[i].data;
    auto& v = state.v[i].data;
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      w[k] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

Predictions predict(const ModelParams& params, const LocalPartition& local,
                    const NodeFeatures& feats, const LabelSet& labels,
                    std::span<const NodeId> local_nodes) {
  Predictions pred;
  pred.mode = labels.mode;
  pred.num_classes = params.output_dim;

  const std::uint32_t full = UINT32_MAX;
  std::vector<std::uint32_t> fanouts(params.layers.size(), full);
  Rng rng(0);  // never consumed: full neighborhoods skip sampling

  constexpr std::size_t kChunk = 1024;
  for (std::size_t start = 0; start < local_nodes.size(); start += kChunk) {
    const std::size_t end = std::min(local_nodes.size(), start + kChunk);
    const std::span<const NodeId> chunk(local_nodes.data() + start, end - start);
    const MiniBatchBlock block =
        sample_block(local.local_graph, chunk, fanouts, rng);
    const ForwardTrace trace =
        forward(params, block, feats, local.local_to_global);
    const auto& logits = trace.logits();
    for (std::size_t j = 0; j < chunk.size(); ++j) {
      const double* row = logits.data() + j * params.output_dim;
      if (labels.mode == LabelMode::Single) {
        ClassId best = 0;
        for (std::uint32_t d = 1; d < params.output_dim; ++d)
          if (row[d] > row[best]) best = d;
        pred.single.push_back(best);
      } else {
        for (std::uint32_t d = 0; d < params.output_dim; ++d)
          pred.multi.push_back(row[d] > 0.0 ? 1 : 0);
      }
    }
  }
  return pred;
}

namespace {

void append_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  out.insert(out.end(), b, b + n);
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

std::uint32_t take_u32(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  if (pos + 4 > bytes.size()) throw IoError("truncated checkpoint");
  std::uint32_t x = 0;
  for (int i = 3; i >= 0; --i) x = (x << 8) | bytes[pos + static_cast<std::size_t>(i)];
  pos += 4;
  return x;
}

} // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
  std::vector<std::uint8_t> bytes;
  append_bytes(bytes, "EPCK", 4);
  append_u32(bytes, 1);  // version
  append_u32(bytes, static_cast<std::uint32_t>(params.layers.size()));
  append_u32(bytes, params.input_dim);
  append_u32(bytes, params.hidden_dim);
  append_u32(bytes, params.output_dim);
  for (const auto& t : params.layers) {
    append_u32(bytes, t.rows);
    append_u32(bytes, t.cols);
    for (double x : t.data) {
      const float f = static_cast<float>(x);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      append_u32(bytes, u);
    }
  }
  write_file_atomic(path, bytes.data(), bytes.size());
}

ModelParams load_checkpoint(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  std::size_t pos = 0;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "EPCK", 4) != 0)
    throw IoError("not a checkpoint file: " + path);
  pos = 4;
  const std::uint32_t version = take_u32(bytes, pos);
  if (version != 1) throw IoError("unsupported checkpoint version");
  const std::uint32_t num_layers = take_u32(bytes, pos);
  ModelParams params;
  params.input_dim = take_u32(bytes, pos);
  params.hidden_dim = take_u32(bytes, pos);
  params.output_dim = take_u32(bytes, pos);
  for (std::uint32_t i = 0; i < num_layers; ++i) {
    Tensor t;
    t.rows = take_u32(bytes, pos);
    t.cols = take_u32(bytes, pos);
    t.data.resize(static_cast<std::size_t>(t.rows) * t.cols);
    for (double& x : t.data) {
      const std::uint32_t u = take_u32(bytes, pos);
      float f;
      std::memcpy(&f, &u, 4);
      x = f;
    }
    params.layers.push_back(std::move(t));
  }
  return params;
}

} // namespace entropart
