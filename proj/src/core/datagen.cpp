#include "core/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "core/rng.hpp"

namespace entropart {

namespace {

constexpr std::uint64_t kTagLabels = 0x4c41424c;
constexpr std::uint64_t kTagEdges = 0x45444745;
constexpr std::uint64_t kTagFeatures = 0x46454154;
constexpr std::uint64_t kTagSplits = 0x53504c54;

// Binomial(count_pairs, p) via a normal approximation; exact at p=0 and p=1.
std::uint64_t approx_binomial(std::uint64_t n, double p, Rng& rng) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  const double mean = static_cast<double>(n) * p;
  const double sd = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
  const double draw = std::round(mean + sd * rng.normal());
  if (draw <= 0.0) return 0;
  if (draw >= static_cast<double>(n)) return n;
  return static_cast<std::uint64_t>(draw);
}

} // namespace

void validate_gen_spec(const GenSpec& spec) {
  if (spec.num_nodes == 0) throw ValidationError("num_nodes must be positive");
  if (spec.num_classes == 0)
    throw ValidationError("num_classes must be positive");
  if (spec.num_nodes < spec.num_classes)
    throw ValidationError("num_nodes must be >= num_classes");
  if (spec.class_proportions.size() != spec.num_classes)
    throw ValidationError("class_proportions length != num_classes");
  double sum = 0.0;
  for (double p : spec.class_proportions) {
    if (p < 0.0) throw ValidationError("class proportion < 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("class_proportions must sum to 1");
  if (spec.homophily < 0.0 || spec.homophily > 1.0)
    throw ValidationError("homophily must be in [0,1]");
  if (spec.avg_degree < 0.0 ||
      spec.avg_degree >= static_cast<double>(spec.num_nodes))
    throw ValidationError("infeasible avg_degree (must be in [0, num_nodes))");
  if (spec.feature_dim == 0)
    throw ValidationError("feature_dim must be positive");
  if (spec.feature_noise < 0.0)
    throw ValidationError("feature_noise must be >= 0");
}

Dataset generate(const GenSpec& spec) {
  validate_gen_spec(spec);
  const NodeId n = spec.num_nodes;
  const std::uint32_t L = spec.num_classes;

  // Labels: iid categorical by CDF inversion.
  std::vector<ClassId> labels(n);
  std::vector<std::vector<NodeId>> members(L);
  {
    Rng rng(derive_seed(spec.seed, kTagLabels));
    std::vector<double> cdf(L);
    double acc = 0.0;
    for (std::uint32_t l = 0; l < L; ++l) {
      acc += spec.class_proportions[l];
      cdf[l] = acc;
    }
    cdf[L - 1] = 1.0;
    for (NodeId v = 0; v < n; ++v) {
      const double u = rng.uniform01();
      ClassId l = static_cast<ClassId>(
          std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      if (l >= L) l = L - 1;
      labels[v] = l;
      members[l].push_back(v);
    }
  }

  // Block-model rates calibrated so E[intra fraction] = homophily and
  // E[degree] = avg_degree (rates clamp to [0,1] when infeasible).
  std::vector<std::pair<NodeId, NodeId>> edges;
  {
    Rng rng(derive_seed(spec.seed, kTagEdges));
    const double target_edges =
        static_cast<double>(n) * spec.avg_degree / 2.0;
    double intra_pairs = 0.0, inter_pairs = 0.0;
    for (std::uint32_t l = 0; l < L; ++l) {
      const double sz = static_cast<double>(members[l].size());
      intra_pairs += sz * (sz - 1.0) / 2.0;
      for (std::uint32_t m = l + 1; m < L; ++m)
        inter_pairs += sz * static_cast<double>(members[m].size());
    }
    const double p_intra =
        intra_pairs > 0.0
            ? std::clamp(spec.homophily * target_edges / intra_pairs, 0.0, 1.0)
            : 0.0;
    const double p_inter =
        inter_pairs > 0.0
            ? std::clamp((1.0 - spec.homophily) * target_edges / inter_pairs,
                         0.0, 1.0)
            : 0.0;

    std::unordered_set<std::uint64_t> used;
    auto add_edge = [&](NodeId a, NodeId b) {
      if (a > b) std::swap(a, b);
      const std::uint64_t key =
          static_cast<std::uint64_t>(a) * n + b;
      if (!used.insert(key).second) return false;
      edges.emplace_back(a, b);
      return true;
    };

    for (std::uint32_t l = 0; l < L; ++l) {
      for (std::uint32_t m = l; m < L; ++m) {
        const auto& ca = members[l];
        const auto& cb = members[m];
        const bool intra = (l == m);
        const double p = intra ? p_intra : p_inter;
        const std::uint64_t total_pairs =
            intra ? static_cast<std::uint64_t>(ca.size()) *
                        (ca.size() - (ca.empty() ? 0 : 1)) / 2
                  : static_cast<std::uint64_t>(ca.size()) * cb.size();
        if (total_pairs == 0 || p <= 0.0) continue;
        if (p >= 0.5) {
          // Dense block: Bernoulli per pair.
          for (std::size_t i = 0; i < ca.size(); ++i) {
            const std::size_t j0 = intra ? i + 1 : 0;
            for (std::size_t j = j0; j < cb.size(); ++j)
              if (rng.uniform01() < p) add_edge(ca[i], cb[j]);
          }
        } else {
          std::uint64_t want = approx_binomial(total_pairs, p, rng);
          while (want > 0) {
            NodeId a, b;
            if (intra) {
              const std::size_t i = rng.below(ca.size());
              const std::size_t j = rng.below(ca.size());
              if (i == j) continue;
              a = ca[i];
              b = ca[j];
            } else {
              a = ca[rng.below(ca.size())];
              b = cb[rng.below(cb.size())];
            }
            if (add_edge(a, b)) --want;
          }
        }
      }
    }
  }

  Dataset ds;
  ds.graph = build_graph(n, edges, /*undirected=*/true);
  ds.labels.mode = LabelMode::Single;
  ds.labels.num_classes = L;
  ds.labels.single_labels = labels;

  // Class-mean unit vectors: orthogonal basis vectors when they fit,
  // otherwise random unit vectors kept pairwise distinct.
  {
    Rng rng(derive_seed(spec.seed, kTagFeatures));
    std::vector<std::vector<double>> means(L,
                                           std::vector<double>(spec.feature_dim, 0.0));
    if (spec.feature_dim >= L) {
      for (std::uint32_t l = 0; l < L; ++l) means[l][l] = 1.0;
    } else {
      for (std::uint32_t l = 0; l < L; ++l) {
        for (;;) {
          double norm2 = 0.0;
          for (auto& x : means[l]) {
            x = rng.normal();
            norm2 += x * x;
          }
          if (norm2 < 1e-12) continue;
          const double inv = 1.0 / std::sqrt(norm2);
          for (auto& x : means[l]) x *= inv;
          bool distinct = true;
          for (std::uint32_t m = 0; m < l && distinct; ++m) {
            double dist2 = 0.0;
            for (std::uint32_t d = 0; d < spec.feature_dim; ++d) {
              const double diff = means[l][d] - means[m][d];
              dist2 += diff * diff;
            }
            distinct = dist2 > 1e-6;
          }
          if (distinct) break;
        }
      }
    }
    ds.features.dim = spec.feature_dim;
    ds.features.data.resize(static_cast<std::size_t>(n) * spec.feature_dim);
    for (NodeId v = 0; v < n; ++v) {
      const auto& mean = means[labels[v]];
      float* out = ds.features.data.data() +
                   static_cast<std::size_t>(v) * spec.feature_dim;
      for (std::uint32_t d = 0; d < spec.feature_dim; ++d) {
        const double noise =
            spec.feature_noise > 0.0 ? spec.feature_noise * rng.normal() : 0.0;
        out[d] = static_cast<float>(mean[d] + noise);
      }
    }
  }

  // Stratified 60/20/20 split per class.
  {
    Rng rng(derive_seed(spec.seed, kTagSplits));
    for (std::uint32_t l = 0; l < L; ++l) {
      std::vector<NodeId> ids = members[l];
      rng.shuffle(ids);
      const std::size_t sz = ids.size();
      std::size_t n_train = static_cast<std::size_t>(std::round(0.6 * sz));
      std::size_t n_val = static_cast<std::size_t>(std::round(0.2 * sz));
      if (n_train + n_val > sz) n_val = sz - n_train;
      for (std::size_t i = 0; i < sz; ++i) {
        if (i < n_train)
          ds.splits.train_ids.push_back(ids[i]);
        else if (i < n_train + n_val)
          ds.splits.val_ids.push_back(ids[i]);
        else
          ds.splits.test_ids.push_back(ids[i]);
      }
    }
    std::sort(ds.splits.train_ids.begin(), ds.splits.train_ids.end());
    std::sort(ds.splits.val_ids.begin(), ds.splits.val_ids.end());
    std::sort(ds.splits.test_ids.begin(), ds.splits.test_ids.end());
  }

  return ds;
}

} // namespace entropart
