#include "core/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

namespace entropart {

Graph build_graph(NodeId num_nodes,
                  const std::vector<std::pair<NodeId, NodeId>>& edges,
                  bool undirected) {
  std::vector<std::vector<NodeId>> adj(num_nodes);
  for (const auto& [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes)
      throw ValidationError("edge endpoint out of range: (" +
                            std::to_string(u) + "," + std::to_string(v) + ")");
    if (u == v) continue;  // self-loops stripped
    adj[u].push_back(v);
    if (undirected) adj[v].push_back(u);
  }
  Graph g;
  g.num_nodes = num_nodes;
  g.undirected = undirected;
  g.offsets.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  for (NodeId v = 0; v < num_nodes; ++v) {
    auto& row = adj[v];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    g.offsets[v + 1] = g.offsets[v] + row.size();
  }
  g.num_edges = g.offsets[num_nodes];
  g.neighbors.reserve(g.num_edges);
  for (NodeId v = 0; v < num_nodes; ++v)
    g.neighbors.insert(g.neighbors.end(), adj[v].begin(), adj[v].end());
  return g;
}

namespace {

void check_split(const Graph& g, const std::vector<NodeId>& ids,
                 const char* name, std::vector<std::string>& out) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= g.num_nodes) {
      out.push_back(std::string(name) + " id out of range: " +
                    std::to_string(ids[i]));
      break;
    }
    if (i > 0 && ids[i] <= ids[i - 1]) {
      out.push_back(std::string(name) + " ids not sorted/duplicate-free");
      break;
    }
  }
}

} // namespace

std::vector<std::string> validate_dataset(const Dataset& ds) {
  std::vector<std::string> violations;
  const Graph& g = ds.graph;

  if (g.offsets.size() != static_cast<std::size_t>(g.num_nodes) + 1) {
    violations.push_back("offsets size != num_nodes+1");
    return violations;
  }
  if (g.offsets.front() != 0) violations.push_back("offsets[0] != 0");
  if (g.offsets.back() != g.num_edges)
    violations.push_back("offsets[num_nodes] != num_edges");
  bool monotone = true;
  for (NodeId v = 0; v < g.num_nodes && monotone; ++v)
    if (g.offsets[v + 1] < g.offsets[v]) monotone = false;
  if (!monotone) violations.push_back("offsets not non-decreasing");

  bool in_range = true, self_loop = false;
  for (NodeId v = 0; v < g.num_nodes; ++v) {
    for (NodeId u : g.neighbors_of(v)) {
      if (u >= g.num_nodes) in_range = false;
      if (u == v) self_loop = true;
    }
  }
  if (!in_range) violations.push_back("neighbor id out of range");
  if (self_loop) violations.push_back("self-loop present");

  if (g.undirected && in_range) {
    bool symmetric = true;
    for (NodeId v = 0; v < g.num_nodes && symmetric; ++v) {
      for (NodeId u : g.neighbors_of(v)) {
        auto row = g.neighbors_of(u);
        if (!std::binary_search(row.begin(), row.end(), v)) {
          symmetric = false;
          break;
        }
      }
    }
    if (!symmetric)
      violations.push_back("undirected graph has asymmetric edge");
  }

  if (ds.features.data.size() !=
      static_cast<std::size_t>(g.num_nodes) * ds.features.dim)
    violations.push_back("feature matrix size mismatch");
  for (float x : ds.features.data) {
    if (!std::isfinite(x)) {
      violations.push_back("non-finite feature value");
      break;
    }
  }

  const LabelSet& labels = ds.labels;
  if (labels.mode == LabelMode::Single) {
    if (labels.single_labels.size() != g.num_nodes)
      violations.push_back("label array size mismatch");
    for (ClassId c : labels.single_labels) {
      if (c >= labels.num_classes) {
        violations.push_back("label id >= num_classes");
        break;
      }
    }
  } else {
    if (labels.multi_labels.size() !=
        static_cast<std::size_t>(g.num_nodes) * labels.num_classes)
      violations.push_back("multi-label matrix size mismatch");
    for (std::uint8_t b : labels.multi_labels) {
      if (b > 1) {
        violations.push_back("multi-label entry not in {0,1}");
        break;
      }
    }
  }

  check_split(g, ds.splits.train_ids, "train", violations);
  check_split(g, ds.splits.val_ids, "val", violations);
  check_split(g, ds.splits.test_ids, "test", violations);
  std::set<NodeId> seen(ds.splits.train_ids.begin(), ds.splits.train_ids.end());
  bool overlap = false;
  for (NodeId v : ds.splits.val_ids) overlap |= !seen.insert(v).second;
  for (NodeId v : ds.splits.test_ids) overlap |= !seen.insert(v).second;
  if (overlap) violations.push_back("splits overlap");

  return violations;
}

void validate_assignment(const Graph& g, const PartitionAssignment& assignment) {
  if (assignment.part_of.size() != g.num_nodes)
    throw ValidationError("assignment does not cover all nodes");
  if (assignment.num_parts == 0)
    throw ValidationError("assignment has zero parts");
  for (PartId p : assignment.part_of)
    if (p >= assignment.num_parts)
      throw ValidationError("assignment part id out of range");
}

LocalPartition induce_local_partition(const Graph& g,
                                      const PartitionAssignment& assignment,
                                      const SplitMasks& splits, PartId part,
                                      std::uint32_t halo_depth) {
  validate_assignment(g, assignment);
  if (part >= assignment.num_parts)
    throw ValidationError("part id " + std::to_string(part) +
                          " >= num_parts " +
                          std::to_string(assignment.num_parts));

  LocalPartition lp;
  lp.part_id = part;
  for (NodeId v = 0; v < g.num_nodes; ++v)
    if (assignment.part_of[v] == part) lp.owned_ids.push_back(v);

  // BFS out to halo_depth hops from the owned set.
  std::vector<std::uint8_t> visited(g.num_nodes, 0);
  std::vector<NodeId> frontier = lp.owned_ids;
  for (NodeId v : frontier) visited[v] = 1;
  for (std::uint32_t depth = 0; depth < halo_depth && !frontier.empty();
       ++depth) {
    std::vector<NodeId> next;
    for (NodeId v : frontier) {
      for (NodeId u : g.neighbors_of(v)) {
        if (!visited[u]) {
          visited[u] = 1;
          next.push_back(u);
          lp.halo_ids.push_back(u);
        }
      }
    }
    frontier = std::move(next);
  }
  std::sort(lp.halo_ids.begin(), lp.halo_ids.end());

  lp.local_to_global = lp.owned_ids;
  lp.local_to_global.insert(lp.local_to_global.end(), lp.halo_ids.begin(),
                            lp.halo_ids.end());
  lp.global_to_local.reserve(lp.local_to_global.size());
  for (NodeId local = 0; local < lp.local_to_global.size(); ++local)
    lp.global_to_local.emplace(lp.local_to_global[local], local);

  // Induced subgraph: every edge with both endpoints local.
  std::vector<std::pair<NodeId, NodeId>> local_edges;
  for (NodeId local = 0; local < lp.local_to_global.size(); ++local) {
    const NodeId global = lp.local_to_global[local];
    for (NodeId u : g.neighbors_of(global)) {
      auto it = lp.global_to_local.find(u);
      if (it != lp.global_to_local.end())
        local_edges.emplace_back(local, it->second);
    }
  }
  // Directed entries are already mirrored in g, so rebuild as directed.
  lp.local_graph = build_graph(static_cast<NodeId>(lp.local_to_global.size()),
                               local_edges, /*undirected=*/false);
  lp.local_graph.undirected = g.undirected;

  auto project = [&](const std::vector<NodeId>& global_ids,
                     std::vector<NodeId>& out) {
    for (NodeId v : global_ids) {
      auto it = lp.global_to_local.find(v);
      if (it != lp.global_to_local.end() && lp.is_owned_local(it->second))
        out.push_back(it->second);
    }
    std::sort(out.begin(), out.end());
  };
  project(splits.train_ids, lp.train_ids);
  project(splits.val_ids, lp.val_ids);
  project(splits.test_ids, lp.test_ids);
  return lp;
}

} // namespace entropart
