#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "core/types.hpp"

namespace entropart {

// Immutable CSR adjacency. Neighbor lists are sorted ascending, free of
// self-loops and duplicates; if `undirected` is set every entry (u,v) has a
// mirror (v,u). num_edges counts directed adjacency entries.
struct Graph {
  NodeId num_nodes = 0;
  EdgeIndex num_edges = 0;
  std::vector<EdgeIndex> offsets;   // size num_nodes + 1
  std::vector<NodeId> neighbors;    // size num_edges
  bool undirected = true;

  std::span<const NodeId> neighbors_of(NodeId v) const {
    return {neighbors.data() + offsets[v],
            neighbors.data() + offsets[v + 1]};
  }
  NodeId degree(NodeId v) const {
    return static_cast<NodeId>(offsets[v + 1] - offsets[v]);
  }
};

// Builds a canonical Graph from directed (src,dst) pairs: strips self-loops,
// collapses duplicates, sorts each adjacency row, and mirrors every edge when
// undirected is requested.
Graph build_graph(NodeId num_nodes,
                  const std::vector<std::pair<NodeId, NodeId>>& edges,
                  bool undirected);

// Dense per-node feature rows, x_v = h_v^0. Stored as float32 to match the
// on-disk format; numeric kernels widen to double.
struct NodeFeatures {
  std::uint32_t dim = 0;
  std::vector<float> data;  // row-major, num_nodes x dim

  std::span<const float> row(NodeId v) const {
    return {data.data() + static_cast<std::size_t>(v) * dim, dim};
  }
};

enum class LabelMode { Single, Multi };

struct LabelSet {
  LabelMode mode = LabelMode::Single;
  std::uint32_t num_classes = 0;
  std::vector<ClassId> single_labels;  // size num_nodes (single mode)
  std::vector<std::uint8_t> multi_labels;  // num_nodes x num_classes (multi mode)

  NodeId num_nodes() const {
    return mode == LabelMode::Single
               ? static_cast<NodeId>(single_labels.size())
               : static_cast<NodeId>(multi_labels.size() / num_classes);
  }
  std::span<const std::uint8_t> multi_row(NodeId v) const {
    return {multi_labels.data() + static_cast<std::size_t>(v) * num_classes,
            num_classes};
  }
};

struct SplitMasks {
  std::vector<NodeId> train_ids;
  std::vector<NodeId> val_ids;
  std::vector<NodeId> test_ids;
};

struct Dataset {
  Graph graph;
  NodeFeatures features;
  LabelSet labels;
  SplitMasks splits;
};

struct PartitionAssignment {
  PartId num_parts = 0;
  std::vector<PartId> part_of;  // size num_nodes
};

// Per-worker view: owned nodes plus halo nodes within halo_depth hops, the
// induced local graph over owned+halo, and the local id translation.
struct LocalPartition {
  PartId part_id = 0;
  std::vector<NodeId> owned_ids;  // global ids, sorted
  std::vector<NodeId> halo_ids;   // global ids, sorted, disjoint from owned
  Graph local_graph;              // over local ids: owned first, then halo
  std::vector<NodeId> local_to_global;
  std::unordered_map<NodeId, NodeId> global_to_local;
  std::vector<NodeId> train_ids;  // local ids, all < owned_ids.size()
  std::vector<NodeId> val_ids;
  std::vector<NodeId> test_ids;

  NodeId num_owned() const { return static_cast<NodeId>(owned_ids.size()); }
  NodeId num_local() const { return static_cast<NodeId>(local_to_global.size()); }
  bool is_owned_local(NodeId local) const { return local < num_owned(); }
};

LocalPartition induce_local_partition(const Graph& g,
                                      const PartitionAssignment& assignment,
                                      const SplitMasks& splits, PartId part,
                                      std::uint32_t halo_depth);

// Reporting-only invariant check; returns one message per violation.
std::vector<std::string> validate_dataset(const Dataset& ds);

void validate_assignment(const Graph& g, const PartitionAssignment& assignment);

} // namespace entropart
