#pragma once

#include <cstdint>
#include <vector>

#include "core/graph.hpp"

namespace entropart {

// Positive integer weight per directed adjacency entry, parallel to
// Graph.neighbors. Symmetric after construction: weight(u->v) == weight(v->u).
struct EdgeWeights {
  std::vector<std::uint32_t> weights;
};

// Edge-weighted partitioning weights: for the entry (u->v) stored in row v,
//   similarity = x_u . x_v
//   p          = 1 - exp(-K / |N(v)|)
//   raw        = (c * similarity + p) * 100
// rounded, clamped to >= 1, then symmetrized as the rounded mean of the two
// directed values. Runs in O(|E| * D).
EdgeWeights assign_edge_weights(const Graph& g, const NodeFeatures& feats,
                                double c, std::uint32_t fanout_k);

EdgeWeights unit_weights(const Graph& g);

} // namespace entropart
