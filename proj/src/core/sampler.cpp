#include "core/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace entropart {

ClassFrequencyTable class_frequencies(const LocalPartition& local,
                                      const LabelSet& labels) {
  ClassFrequencyTable table;
  table.counts.assign(labels.num_classes, 0);
  for (NodeId v : local.train_ids) {
    const NodeId global = local.local_to_global[v];
    if (labels.mode == LabelMode::Single) {
      ++table.counts[labels.single_labels[global]];
    } else {
      const auto row = labels.multi_row(global);
      for (std::uint32_t d = 0; d < labels.num_classes; ++d)
        table.counts[d] += row[d];
    }
  }
  return table;
}

SampleProbabilities cbs_probabilities(const LocalPartition& local,
                                      const LabelSet& labels,
                                      AdjNormalization normalization) {
  if (local.train_ids.empty())
    throw ValidationError("partition has no training nodes");
  const Graph& g = local.local_graph;
  const ClassFrequencyTable cf = class_frequencies(local, labels);

  SampleProbabilities result;
  result.probs.resize(local.train_ids.size());
  double total = 0.0;
  for (std::size_t i = 0; i < local.train_ids.size(); ++i) {
    const NodeId v = local.train_ids[i];
    const double deg_v = static_cast<double>(g.degree(v));
    double norm2;
    if (deg_v == 0.0) {
      norm2 = 1e-9;
    } else {
      double inv_deg_sum = 0.0;
      for (NodeId u : g.neighbors_of(v))
        inv_deg_sum += 1.0 / static_cast<double>(g.degree(u));
      norm2 = normalization == AdjNormalization::AsWritten
                  ? deg_v * inv_deg_sum
                  : inv_deg_sum / deg_v;
    }

    const NodeId global = local.local_to_global[v];
    std::uint64_t freq = 0;
    if (labels.mode == LabelMode::Single) {
      freq = cf.counts[labels.single_labels[global]];
    } else {
      const auto row = labels.multi_row(global);
      for (std::uint32_t d = 0; d < labels.num_classes; ++d)
        if (row[d] && (freq == 0 || cf.counts[d] < freq)) freq = cf.counts[d];
    }
    if (freq == 0) freq = 1;  // label-less node in multi mode

    result.probs[i] = norm2 / static_cast<double>(freq);
    total += result.probs[i];
  }
  for (double& p : result.probs) p /= total;
  return result;
}

namespace {

// Fenwick tree over weights for O(log n) sequential weighted draws.
class WeightTree {
public:
  explicit WeightTree(std::span<const double> weights)
      : size_(weights.size()), tree_(weights.size() + 1, 0.0), total_(0.0) {
    for (std::size_t i = 0; i < size_; ++i) add(i, weights[i]);
  }

  double total() const { return total_; }

  void add(std::size_t i, double delta) {
    total_ += delta;
    for (std::size_t j = i + 1; j <= size_; j += j & (~j + 1)) tree_[j] += delta;
  }

  double prefix(std::size_t i) const {  // sum of [0, i)
    double s = 0.0;
    for (std::size_t j = i; j > 0; j -= j & (~j + 1)) s += tree_[j];
    return s;
  }

  // Largest index with prefix(i) <= target, i.e. the bucket containing target.
  std::size_t find(double target) const {
    std::size_t pos = 0;
    std::size_t mask = 1;
    while ((mask << 1) <= size_) mask <<= 1;
    double acc = 0.0;
    for (; mask > 0; mask >>= 1) {
      const std::size_t next = pos + mask;
      if (next <= size_ && acc + tree_[next] <= target) {
        pos = next;
        acc += tree_[next];
      }
    }
    return pos < size_ ? pos : size_ - 1;
  }

private:
  std::size_t size_;
  std::vector<double> tree_;
  double total_;
};

} // namespace

std::vector<NodeId> sample_mini_epoch(std::span<const NodeId> train_ids,
                                      std::span<const double> probs,
                                      double fraction, Rng& rng) {
  if (fraction <= 0.0 || fraction > 1.0)
    throw ValidationError("sampler fraction must be in (0, 1]");
  if (train_ids.size() != probs.size())
    throw ValidationError("train id / probability length mismatch");
  const std::size_t want = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(train_ids.size())));

  WeightTree tree(probs);
  std::vector<NodeId> subset;
  subset.reserve(want);
  while (subset.size() < want && tree.total() > 0.0) {
    const double target = rng.uniform01() * tree.total();
    const std::size_t i = tree.find(target);
    subset.push_back(train_ids[i]);
    tree.add(i, -tree.prefix(i + 1) + tree.prefix(i));
  }
  // Degenerate leftover mass (all remaining weights ~0): fill uniformly so
  // the subset size contract holds.
  if (subset.size() < want) {
    std::vector<std::uint8_t> taken(train_ids.size(), 0);
    for (NodeId v : subset)
      for (std::size_t i = 0; i < train_ids.size(); ++i)
        if (train_ids[i] == v) taken[i] = 1;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < train_ids.size(); ++i)
      if (!taken[i]) rest.push_back(i);
    while (subset.size() < want && !rest.empty()) {
      const std::size_t k = rng.below(rest.size());
      subset.push_back(train_ids[rest[k]]);
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
    }
  }
  return subset;
}

std::vector<std::vector<NodeId>> make_batches(std::span<const NodeId> subset,
                                              std::uint32_t batch_size,
                                              Rng& rng) {
  if (batch_size == 0) throw ValidationError("batch_size must be >= 1");
  std::vector<NodeId> order(subset.begin(), subset.end());
  rng.shuffle(order);
  std::vector<std::vector<NodeId>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(),
                                     start + static_cast<std::size_t>(batch_size));
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

MiniBatchBlock sample_block(const Graph& local_graph,
                            std::span<const NodeId> batch,
                            std::span<const std::uint32_t> fanouts, Rng& rng) {
  const std::size_t num_layers = fanouts.size();
  MiniBatchBlock block;
  block.layers.resize(num_layers);

  std::vector<NodeId> dst(batch.begin(), batch.end());
  std::vector<NodeId> scratch;
  for (std::size_t layer = num_layers; layer-- > 0;) {
    BlockLayer& bl = block.layers[layer];
    bl.dst = dst;
    bl.src = dst;  // destinations first, so self features propagate
    std::unordered_map<NodeId, std::uint32_t> src_index;
    src_index.reserve(dst.size() * 2);
    for (std::uint32_t i = 0; i < bl.src.size(); ++i)
      src_index.emplace(bl.src[i], i);

    bl.edge_offsets.assign(dst.size() + 1, 0);
    const std::uint32_t fanout = fanouts[layer];
    for (std::size_t j = 0; j < dst.size(); ++j) {
      const auto neigh = local_graph.neighbors_of(dst[j]);
      const std::size_t take =
          std::min<std::size_t>(fanout, neigh.size());
      scratch.assign(neigh.begin(), neigh.end());
      // Partial Fisher-Yates: uniform without replacement. Taking the whole
      // neighborhood skips the shuffle (and the rng) entirely.
      for (std::size_t k = 0; k < take; ++k) {
        if (take < scratch.size()) {
          const std::size_t pick = k + rng.below(scratch.size() - k);
          std::swap(scratch[k], scratch[pick]);
        }
        const NodeId s = scratch[k];
        auto [it, inserted] =
            src_index.emplace(s, static_cast<std::uint32_t>(bl.src.size()));
        if (inserted) bl.src.push_back(s);
        bl.edge_src_index.push_back(it->second);
      }
      bl.edge_offsets[j + 1] = static_cast<std::uint32_t>(bl.edge_src_index.size());
    }
    dst = bl.src;  // next (lower) layer's destinations
  }
  return block;
}

} // namespace entropart
