#pragma once

#include <cstdint>
#include <vector>

#include "core/edge_weights.hpp"
#include "core/graph.hpp"
#include "core/rng.hpp"

namespace entropart {

struct PartitionerConfig {
  PartId num_parts = 2;
  double imbalance_epsilon = 0.05;
  NodeId coarsen_stop = 200;
  std::uint32_t refine_passes = 10;
  std::uint64_t seed = 1;
};

// One level of the multilevel hierarchy: adjacency plus per-entry edge
// weights and per-node weights (a coarse node's weight is the number of fine
// nodes it represents).
struct WeightedGraph {
  Graph graph;
  std::vector<std::uint64_t> edge_weights;
  std::vector<std::uint32_t> node_weights;

  std::uint64_t total_node_weight() const {
    std::uint64_t total = 0;
    for (std::uint32_t w : node_weights) total += w;
    return total;
  }
};

WeightedGraph make_weighted_graph(const Graph& g, const EdgeWeights& w);

struct CoarsenResult {
  WeightedGraph coarse;
  std::vector<NodeId> fine_to_coarse;
};

// Heavy-edge matching contraction. Nodes are visited in random order and
// matched to the unmatched neighbor with the largest edge weight; merged
// pairs may not exceed max_merged_weight.
CoarsenResult coarsen(const WeightedGraph& fine, Rng& rng,
                      std::uint64_t max_merged_weight = UINT64_MAX);

// Part weight cap used everywhere: (1 + eps) * ceil(total / num_parts).
double balance_cap(std::uint64_t total_weight, PartId num_parts, double eps);

// Greedy graph-growing from random seed nodes, absorbing the boundary node
// with the maximal connecting weight while the cap allows.
PartitionAssignment initial_partition(const WeightedGraph& g,
                                      const PartitionerConfig& cfg, Rng& rng);

// Boundary FM-style passes: repeatedly applies the highest positive-gain
// balanced move; at most cfg.refine_passes passes. Never increases the cut.
void refine(const WeightedGraph& g, const PartitionerConfig& cfg,
            PartitionAssignment& assignment);

// Forces every part under the cap by moving best-gain nodes out of
// overweight parts. May increase the cut; used as the last resort after
// uncoarsening so the balance contract is unconditional.
void enforce_balance(const WeightedGraph& g, double cap,
                     PartitionAssignment& assignment);

// Full multilevel pipeline: coarsen to cfg.coarsen_stop, multi-try greedy
// initial partition, then uncoarsen with refinement per level. Deterministic
// given cfg.seed.
PartitionAssignment partition(const Graph& g, const EdgeWeights& w,
                              const PartitionerConfig& cfg);

std::uint64_t weighted_edge_cut(const WeightedGraph& g,
                                const PartitionAssignment& assignment);

// Total weight of adjacency entries crossing parts, halved for undirected
// graphs (each edge stored twice).
std::uint64_t edge_cut(const Graph& g, const EdgeWeights& w,
                       const PartitionAssignment& assignment);

} // namespace entropart
