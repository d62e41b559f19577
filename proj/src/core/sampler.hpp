#pragma once

#include <cstdint>
#include <vector>

#include "core/graph.hpp"
#include "core/rng.hpp"

namespace entropart {

enum class AdjNormalization {
  AsWritten,  // A_hat = D^{-1/2} A D^{+1/2}
  Symmetric,  // A_hat = D^{-1/2} A D^{-1/2}
};

// Per-class counts over a worker's local training nodes. Multi mode counts
// every positive label.
struct ClassFrequencyTable {
  std::vector<std::uint64_t> counts;
};

ClassFrequencyTable class_frequencies(const LocalPartition& local,
                                      const LabelSet& labels);

// CBS sampling probabilities for the local training nodes, parallel to
// local.train_ids: score(v) = ||A_hat(:,v)||^2 / CF(class[v]), normalized to
// sum 1. Isolated nodes get a 1e-9 floor in place of the column norm so they
// stay sampleable.
struct SampleProbabilities {
  std::vector<double> probs;
};

SampleProbabilities cbs_probabilities(const LocalPartition& local,
                                      const LabelSet& labels,
                                      AdjNormalization normalization);

// ceil(fraction * n) distinct nodes drawn without replacement, renormalizing
// after each pick. Returned in draw order.
std::vector<NodeId> sample_mini_epoch(std::span<const NodeId> train_ids,
                                      std::span<const double> probs,
                                      double fraction, Rng& rng);

std::vector<std::vector<NodeId>> make_batches(std::span<const NodeId> subset,
                                              std::uint32_t batch_size,
                                              Rng& rng);

// Layered mini-batch block. layers[0] is the input-most layer; the seed
// (batch) nodes are the destinations of the last layer. Within each layer
// the first dst.size() entries of src are the destinations themselves, and
// layers[i].dst is the same list as layers[i+1].src.
struct BlockLayer {
  std::vector<NodeId> dst;
  std::vector<NodeId> src;
  std::vector<std::uint32_t> edge_offsets;   // per dst, into edge_src_index
  std::vector<std::uint32_t> edge_src_index; // positions within src
};

struct MiniBatchBlock {
  std::vector<BlockLayer> layers;

  const std::vector<NodeId>& seeds() const { return layers.back().dst; }
};

// Samples min(fanout, degree) distinct in-neighbors per destination,
// uniformly without replacement, from the output layer inward.
MiniBatchBlock sample_block(const Graph& local_graph,
                            std::span<const NodeId> batch,
                            std::span<const std::uint32_t> fanouts, Rng& rng);

} // namespace entropart
