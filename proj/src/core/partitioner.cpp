#include "core/partitioner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace entropart {

WeightedGraph make_weighted_graph(const Graph& g, const EdgeWeights& w) {
  if (w.weights.size() != g.num_edges)
    throw ValidationError("edge weight array does not match graph");
  WeightedGraph wg;
  wg.graph = g;
  wg.edge_weights.assign(w.weights.begin(), w.weights.end());
  wg.node_weights.assign(g.num_nodes, 1u);
  return wg;
}

CoarsenResult coarsen(const WeightedGraph& fine, Rng& rng,
                      std::uint64_t max_merged_weight) {
  const Graph& g = fine.graph;
  const NodeId n = g.num_nodes;

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  constexpr NodeId kUnmatched = static_cast<NodeId>(-1);
  std::vector<NodeId> match(n, kUnmatched);
  for (NodeId v : order) {
    if (match[v] != kUnmatched) continue;
    NodeId best = kUnmatched;
    std::uint64_t best_weight = 0;
    for (EdgeIndex e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
      const NodeId u = g.neighbors[e];
      if (match[u] != kUnmatched || u == v) continue;
      const std::uint64_t merged =
          static_cast<std::uint64_t>(fine.node_weights[v]) + fine.node_weights[u];
      if (merged > max_merged_weight) continue;
      const std::uint64_t w = fine.edge_weights[e];
      if (w > best_weight || (w == best_weight && best != kUnmatched && u < best)) {
        best_weight = w;
        best = u;
      }
    }
    match[v] = (best == kUnmatched) ? v : best;
    if (best != kUnmatched) match[best] = v;
  }

  CoarsenResult result;
  result.fine_to_coarse.assign(n, kUnmatched);
  NodeId next_id = 0;
  for (NodeId v = 0; v < n; ++v) {
    if (result.fine_to_coarse[v] != kUnmatched) continue;
    result.fine_to_coarse[v] = next_id;
    result.fine_to_coarse[match[v]] = next_id;
    ++next_id;
  }

  WeightedGraph& coarse = result.coarse;
  coarse.node_weights.assign(next_id, 0u);
  for (NodeId v = 0; v < n; ++v)
    coarse.node_weights[result.fine_to_coarse[v]] += fine.node_weights[v];

  // Accumulate parallel edges between coarse nodes.
  std::vector<std::vector<std::pair<NodeId, std::uint64_t>>> adj(next_id);
  for (NodeId v = 0; v < n; ++v) {
    const NodeId cv = result.fine_to_coarse[v];
    for (EdgeIndex e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
      const NodeId cu = result.fine_to_coarse[g.neighbors[e]];
      if (cu == cv) continue;
      adj[cv].emplace_back(cu, fine.edge_weights[e]);
    }
  }
  Graph& cg = coarse.graph;
  cg.num_nodes = next_id;
  cg.undirected = g.undirected;
  cg.offsets.assign(static_cast<std::size_t>(next_id) + 1, 0);
  for (NodeId v = 0; v < next_id; ++v) {
    auto& row = adj[v];
    std::sort(row.begin(), row.end());
    std::size_t unique_count = 0;
    for (std::size_t i = 0; i < row.size();) {
      std::size_t j = i;
      std::uint64_t sum = 0;
      while (j < row.size() && row[j].first == row[i].first) sum += row[j++].second;
      row[unique_count++] = {row[i].first, sum};
      i = j;
    }
    row.resize(unique_count);
    cg.offsets[v + 1] = cg.offsets[v] + unique_count;
  }
  cg.num_edges = cg.offsets[next_id];
  cg.neighbors.reserve(cg.num_edges);
  coarse.edge_weights.reserve(cg.num_edges);
  for (NodeId v = 0; v < next_id; ++v) {
    for (const auto& [u, w] : adj[v]) {
      cg.neighbors.push_back(u);
      coarse.edge_weights.push_back(w);
    }
  }
  return result;
}

double balance_cap(std::uint64_t total_weight, PartId num_parts, double eps) {
  const double per_part =
      std::ceil(static_cast<double>(total_weight) / num_parts);
  return (1.0 + eps) * per_part;
}

namespace {

struct PartState {
  std::vector<std::uint64_t> weight;                 // per part
  std::vector<std::vector<std::uint64_t>> conn;      // node x part connection
};

PartState build_state(const WeightedGraph& g,
                      const PartitionAssignment& assignment) {
  PartState state;
  state.weight.assign(assignment.num_parts, 0);
  state.conn.assign(g.graph.num_nodes,
                    std::vector<std::uint64_t>(assignment.num_parts, 0));
  for (NodeId v = 0; v < g.graph.num_nodes; ++v) {
    state.weight[assignment.part_of[v]] += g.node_weights[v];
    for (EdgeIndex e = g.graph.offsets[v]; e < g.graph.offsets[v + 1]; ++e) {
      const NodeId u = g.graph.neighbors[e];
      state.conn[v][assignment.part_of[u]] += g.edge_weights[e];
    }
  }
  return state;
}

void apply_move(const WeightedGraph& g, PartitionAssignment& assignment,
                PartState& state, NodeId v, PartId to) {
  const PartId from = assignment.part_of[v];
  assignment.part_of[v] = to;
  state.weight[from] -= g.node_weights[v];
  state.weight[to] += g.node_weights[v];
  for (EdgeIndex e = g.graph.offsets[v]; e < g.graph.offsets[v + 1]; ++e) {
    const NodeId u = g.graph.neighbors[e];
    state.conn[u][from] -= g.edge_weights[e];
    state.conn[u][to] += g.edge_weights[e];
  }
}

// Best strictly-positive-gain balanced move for v, if any.
struct Move {
  long long gain = -1;
  NodeId node = 0;
  PartId to = 0;
};

bool best_move(const PartitionAssignment& assignment, const PartState& state,
               const WeightedGraph& g, double cap, NodeId v, Move& out) {
  const PartId from = assignment.part_of[v];
  const std::uint64_t here = state.conn[v][from];
  bool found = false;
  for (PartId p = 0; p < assignment.num_parts; ++p) {
    if (p == from) continue;
    if (state.conn[v][p] == 0 && here == 0) continue;
    const double new_weight =
        static_cast<double>(state.weight[p]) + g.node_weights[v];
    if (new_weight > cap) continue;
    const long long gain = static_cast<long long>(state.conn[v][p]) -
                           static_cast<long long>(here);
    if (gain > 0 && (!found || gain > out.gain ||
                     (gain == out.gain && p < out.to))) {
      out = {gain, v, p};
      found = true;
    }
  }
  return found;
}

} // namespace

PartitionAssignment initial_partition(const WeightedGraph& g,
                                      const PartitionerConfig& cfg, Rng& rng) {
  const Graph& graph = g.graph;
  const NodeId n = graph.num_nodes;
  const PartId num_parts = cfg.num_parts;
  if (num_parts == 0) throw ValidationError("num_parts must be >= 1");
  if (num_parts > n)
    throw ValidationError("num_parts exceeds node count");

  const std::uint64_t total = g.total_node_weight();
  const double cap = balance_cap(total, num_parts, cfg.imbalance_epsilon);
  for (NodeId v = 0; v < n; ++v)
    if (static_cast<double>(g.node_weights[v]) > cap)
      throw ValidationError("infeasible balance: node heavier than part cap");

  PartitionAssignment assignment;
  assignment.num_parts = num_parts;
  assignment.part_of.assign(n, 0);

  constexpr PartId kUnassigned = static_cast<PartId>(-1);
  std::vector<PartId> part(n, kUnassigned);
  std::vector<std::uint64_t> part_weight(num_parts, 0);
  std::vector<std::vector<std::uint64_t>> conn(
      num_parts, std::vector<std::uint64_t>(n, 0));
  using Candidate = std::pair<std::uint64_t, NodeId>;
  std::vector<std::priority_queue<Candidate>> frontier(num_parts);

  // Distinct random seeds.
  std::vector<NodeId> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  rng.shuffle(pool);
  NodeId assigned = 0;
  for (PartId p = 0; p < num_parts; ++p) {
    const NodeId seed = pool[p];
    part[seed] = p;
    part_weight[p] += g.node_weights[seed];
    ++assigned;
    for (EdgeIndex e = graph.offsets[seed]; e < graph.offsets[seed + 1]; ++e) {
      const NodeId u = graph.neighbors[e];
      conn[p][u] += g.edge_weights[e];
      if (part[u] == kUnassigned) frontier[p].emplace(conn[p][u], u);
    }
  }

  // Round-robin growth, one absorption per part per round.
  bool grew = true;
  while (assigned < n && grew) {
    grew = false;
    for (PartId p = 0; p < num_parts; ++p) {
      auto& heap = frontier[p];
      NodeId pick = kUnassigned;
      while (!heap.empty()) {
        const auto [w, v] = heap.top();
        if (part[v] != kUnassigned || w != conn[p][v]) {
          heap.pop();
          if (part[v] == kUnassigned && conn[p][v] > 0)
            heap.emplace(conn[p][v], v);
          continue;
        }
        if (static_cast<double>(part_weight[p]) + g.node_weights[v] > cap) {
          heap.pop();  // cap blocks this node for p; retry not useful
          continue;
        }
        pick = v;
        heap.pop();
        break;
      }
      if (pick == kUnassigned) continue;
      part[pick] = p;
      part_weight[p] += g.node_weights[pick];
      ++assigned;
      grew = true;
      for (EdgeIndex e = graph.offsets[pick]; e < graph.offsets[pick + 1]; ++e) {
        const NodeId u = graph.neighbors[e];
        conn[p][u] += g.edge_weights[e];
        if (part[u] == kUnassigned) frontier[p].emplace(conn[p][u], u);
      }
    }
  }

  // Leftovers (disconnected from every region): lightest part with room,
  // else lightest overall; finer levels repair any cap overshoot.
  for (NodeId v = 0; v < n; ++v) {
    if (part[v] != kUnassigned) continue;
    PartId best = 0;
    bool best_fits = false;
    for (PartId p = 0; p < num_parts; ++p) {
      const bool fits =
          static_cast<double>(part_weight[p]) + g.node_weights[v] <= cap;
      if (p == 0) {
        best = p;
        best_fits = fits;
        continue;
      }
      if (fits != best_fits ? fits : part_weight[p] < part_weight[best]) {
        best = p;
        best_fits = fits;
      }
    }
    part[v] = best;
    part_weight[best] += g.node_weights[v];
  }

  assignment.part_of.assign(part.begin(), part.end());
  return assignment;
}

void refine(const WeightedGraph& g, const PartitionerConfig& cfg,
            PartitionAssignment& assignment) {
  const Graph& graph = g.graph;
  const NodeId n = graph.num_nodes;
  if (assignment.num_parts <= 1 || n == 0) return;

  const double cap =
      balance_cap(g.total_node_weight(), assignment.num_parts,
                  cfg.imbalance_epsilon);
  PartState state = build_state(g, assignment);

  // (gain, -node) heap: highest gain first, smallest node id on ties.
  using Entry = std::pair<long long, NodeId>;
  auto node_less = [](const Entry& a, const Entry& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second > b.second;
  };

  for (std::uint32_t pass = 0; pass < cfg.refine_passes; ++pass) {
    std::priority_queue<Entry, std::vector<Entry>, decltype(node_less)> heap(
        node_less);
    for (NodeId v = 0; v < n; ++v) {
      Move m;
      if (best_move(assignment, state, g, cap, v, m)) heap.emplace(m.gain, v);
    }
    std::uint64_t moves = 0;
    while (!heap.empty()) {
      const auto [gain, v] = heap.top();
      heap.pop();
      Move m;
      if (!best_move(assignment, state, g, cap, v, m)) continue;
      if (m.gain != gain) {
        heap.emplace(m.gain, v);  // stale entry, requeue at true gain
        continue;
      }
      apply_move(g, assignment, state, v, m.to);
      ++moves;
      for (EdgeIndex e = graph.offsets[v]; e < graph.offsets[v + 1]; ++e) {
        const NodeId u = graph.neighbors[e];
        Move mu;
        if (best_move(assignment, state, g, cap, u, mu))
          heap.emplace(mu.gain, u);
      }
    }
    if (moves == 0) break;
  }
}

void enforce_balance(const WeightedGraph& g, double cap,
                     PartitionAssignment& assignment) {
  const NodeId n = g.graph.num_nodes;
  if (assignment.num_parts <= 1) return;
  PartState state = build_state(g, assignment);

  for (;;) {
    PartId over = assignment.num_parts;
    for (PartId p = 0; p < assignment.num_parts; ++p) {
      if (static_cast<double>(state.weight[p]) > cap &&
          (over == assignment.num_parts || state.weight[p] > state.weight[over]))
        over = p;
    }
    if (over == assignment.num_parts) return;

    // Best-gain move out of the heaviest offending part into any part with
    // room (ties: lighter receiver, then smaller node id).
    bool found = false;
    long long best_gain = 0;
    NodeId best_node = 0;
    PartId best_to = 0;
    for (NodeId v = 0; v < n; ++v) {
      if (assignment.part_of[v] != over) continue;
      for (PartId p = 0; p < assignment.num_parts; ++p) {
        if (p == over) continue;
        if (static_cast<double>(state.weight[p]) + g.node_weights[v] > cap)
          continue;
        const long long gain = static_cast<long long>(state.conn[v][p]) -
                               static_cast<long long>(state.conn[v][over]);
        if (!found || gain > best_gain ||
            (gain == best_gain &&
             (state.weight[p] < state.weight[best_to] ||
              (state.weight[p] == state.weight[best_to] && v < best_node)))) {
          found = true;
          best_gain = gain;
          best_node = v;
          best_to = p;
        }
      }
    }
    if (!found) return;  // nothing movable at this granularity
    apply_move(g, assignment, state, best_node, best_to);
  }
}

PartitionAssignment partition(const Graph& g, const EdgeWeights& w,
                              const PartitionerConfig& cfg) {
  if (cfg.num_parts == 0) throw ValidationError("num_parts must be >= 1");
  if (cfg.imbalance_epsilon < 0.0)
    throw ValidationError("imbalance_epsilon must be >= 0");
  if (g.num_nodes == 0) throw ValidationError("cannot partition empty graph");
  if (cfg.num_parts > g.num_nodes)
    throw ValidationError("num_parts exceeds node count");

  PartitionAssignment assignment;
  assignment.num_parts = cfg.num_parts;
  if (cfg.num_parts == 1) {
    assignment.part_of.assign(g.num_nodes, 0);
    return assignment;
  }

  Rng rng(derive_seed(cfg.seed, 0x50415254));

  std::vector<WeightedGraph> levels;
  std::vector<std::vector<NodeId>> projections;
  levels.push_back(make_weighted_graph(g, w));

  const std::uint64_t merge_limit = std::max<std::uint64_t>(
      1, g.num_nodes / (2ull * std::max<PartId>(cfg.num_parts, 2)));
  while (levels.back().graph.num_nodes > cfg.coarsen_stop) {
    CoarsenResult c = coarsen(levels.back(), rng, merge_limit);
    if (c.coarse.graph.num_nodes < cfg.num_parts) break;
    if (c.coarse.graph.num_nodes >=
        levels.back().graph.num_nodes - levels.back().graph.num_nodes / 50)
      break;  // diminishing returns; stop coarsening
    projections.push_back(std::move(c.fine_to_coarse));
    levels.push_back(std::move(c.coarse));
  }

  // Multi-try greedy initial partition on the coarsest level; keeps the
  // lowest-cut result. Deterministic: all tries draw from the same stream.
  const WeightedGraph& coarsest = levels.back();
  PartitionAssignment best;
  std::uint64_t best_cut = 0;
  constexpr int kInitialTries = 8;
  for (int attempt = 0; attempt < kInitialTries; ++attempt) {
    PartitionAssignment trial = initial_partition(coarsest, cfg, rng);
    refine(coarsest, cfg, trial);
    const std::uint64_t cut = weighted_edge_cut(coarsest, trial);
    if (attempt == 0 || cut < best_cut) {
      best_cut = cut;
      best = std::move(trial);
    }
  }

  // Uncoarsen: project through each level and refine.
  for (std::size_t level = levels.size(); level-- > 1;) {
    const std::vector<NodeId>& fine_to_coarse = projections[level - 1];
    const NodeId fine_nodes = levels[level - 1].graph.num_nodes;
    PartitionAssignment fine;
    fine.num_parts = cfg.num_parts;
    fine.part_of.resize(fine_nodes);
    for (NodeId v = 0; v < fine_nodes; ++v)
      fine.part_of[v] = best.part_of[fine_to_coarse[v]];
    best = std::move(fine);
    refine(levels[level - 1], cfg, best);
  }

  const double cap = balance_cap(g.num_nodes, cfg.num_parts,
                                 cfg.imbalance_epsilon);
  enforce_balance(levels.front(), cap, best);
  refine(levels.front(), cfg, best);
  return best;
}

std::uint64_t weighted_edge_cut(const WeightedGraph& g,
                                const PartitionAssignment& assignment) {
  std::uint64_t cut = 0;
  for (NodeId v = 0; v < g.graph.num_nodes; ++v) {
    for (EdgeIndex e = g.graph.offsets[v]; e < g.graph.offsets[v + 1]; ++e) {
      const NodeId u = g.graph.neighbors[e];
      if (assignment.part_of[v] != assignment.part_of[u])
        cut += g.edge_weights[e];
    }
  }
  return g.graph.undirected ? cut / 2 : cut;
}

std::uint64_t edge_cut(const Graph& g, const EdgeWeights& w,
                       const PartitionAssignment& assignment) {
  if (w.weights.size() != g.num_edges)
    throw ValidationError("edge weight array does not match graph");
  validate_assignment(g, assignment);
  std::uint64_t cut = 0;
  for (NodeId v = 0; v < g.num_nodes; ++v) {
    for (EdgeIndex e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
      const NodeId u = g.neighbors[e];
      if (assignment.part_of[v] != assignment.part_of[u]) cut += w.weights[e];
    }
  }
  return g.undirected ? cut / 2 : cut;
}

} // namespace entropart
