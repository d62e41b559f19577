#include "core/edge_weights.hpp"

#include <algorithm>
#include <cmath>

namespace entropart {

EdgeWeights assign_edge_weights(const Graph& g, const NodeFeatures& feats,
                                double c, std::uint32_t fanout_k) {
  if (feats.dim == 0) throw ValidationError("feature dim must be >= 1");
  if (fanout_k == 0) throw ValidationError("fanout K must be >= 1");
  if (c < 0.0) throw ValidationError("weight coefficient c must be >= 0");
  if (feats.data.size() != static_cast<std::size_t>(g.num_nodes) * feats.dim)
    throw ValidationError("feature matrix does not match graph");

  EdgeWeights ew;
  ew.weights.resize(g.num_edges);

  std::vector<std::uint32_t> directed(g.num_edges);
  for (NodeId v = 0; v < g.num_nodes; ++v) {
    const auto row_v = feats.row(v);
    const double deg_v = static_cast<double>(g.degree(v));
    const double p = 1.0 - std::exp(-static_cast<double>(fanout_k) / deg_v);
    for (EdgeIndex e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
      const NodeId u = g.neighbors[e];
      const auto row_u = feats.row(u);
      double dot = 0.0;
      for (std::uint32_t d = 0; d < feats.dim; ++d)
        dot += static_cast<double>(row_u[d]) * static_cast<double>(row_v[d]);
      const double raw = (c * dot + p) * 100.0;
      const double rounded = std::round(raw);
      directed[e] = rounded < 1.0 ? 1u
                                  : static_cast<std::uint32_t>(std::min(
                                        rounded, 4294967295.0));
    }
  }

  // Symmetrize: each undirected pair gets the rounded mean of its two
  // directed values (kept at the directed value where no reverse exists).
  for (NodeId v = 0; v < g.num_nodes; ++v) {
    for (EdgeIndex e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
      const NodeId u = g.neighbors[e];
      const auto row = g.neighbors_of(u);
      const auto it = std::lower_bound(row.begin(), row.end(), v);
      if (it != row.end() && *it == v) {
        const EdgeIndex rev = g.offsets[u] + (it - row.begin());
        const double mean =
            (static_cast<double>(directed[e]) + static_cast<double>(directed[rev])) /
            2.0;
        ew.weights[e] = std::max(1u, static_cast<std::uint32_t>(std::round(mean)));
      } else {
        ew.weights[e] = directed[e];
      }
    }
  }
  return ew;
}

EdgeWeights unit_weights(const Graph& g) {
  EdgeWeights ew;
  ew.weights.assign(g.num_edges, 1u);
  return ew;
}

} // namespace entropart
