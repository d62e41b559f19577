#include "core/metrics.hpp"

#include <cmath>

namespace entropart {

namespace {

double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

double binary_entropy(double p) { return plogp(p) + plogp(1.0 - p); }

} // namespace

double entropy(const LabelDistribution& dist) {
  double h = 0.0;
  if (dist.mode == LabelMode::Single) {
    for (double p : dist.probs) h += plogp(p);
  } else {
    for (double rate : dist.probs) h += binary_entropy(rate);
  }
  return h;
}

LabelDistribution label_distribution(const LabelSet& labels,
                                     std::span<const NodeId> nodes) {
  if (nodes.empty())
    throw ValidationError("label_distribution over empty node list");
  LabelDistribution dist;
  dist.mode = labels.mode;
  dist.probs.assign(labels.num_classes, 0.0);
  const double inv = 1.0 / static_cast<double>(nodes.size());
  if (labels.mode == LabelMode::Single) {
    for (NodeId v : nodes) dist.probs[labels.single_labels[v]] += inv;
  } else {
    for (NodeId v : nodes) {
      const auto row = labels.multi_row(v);
      for (std::uint32_t d = 0; d < labels.num_classes; ++d)
        dist.probs[d] += row[d] * inv;
    }
  }
  return dist;
}

EntropyReport total_entropy(const LabelSet& labels,
                            const PartitionAssignment& assignment) {
  EntropyReport report;
  const PartId num_parts = assignment.num_parts;
  std::vector<std::vector<NodeId>> part_nodes(num_parts);
  for (NodeId v = 0; v < assignment.part_of.size(); ++v)
    part_nodes[assignment.part_of[v]].push_back(v);

  report.per_part_entropy.resize(num_parts, 0.0);
  report.per_part_sizes.resize(num_parts, 0);
  const double total_nodes = static_cast<double>(assignment.part_of.size());
  for (PartId p = 0; p < num_parts; ++p) {
    report.per_part_sizes[p] = part_nodes[p].size();
    if (part_nodes[p].empty()) continue;
    report.per_part_entropy[p] =
        entropy(label_distribution(labels, part_nodes[p]));
    report.total_entropy += (static_cast<double>(part_nodes[p].size()) /
                             total_nodes) *
                            report.per_part_entropy[p];
  }
  return report;
}

F1Counts f1_counts(const Predictions& pred, const LabelSet& truth,
                   std::span<const NodeId> nodes) {
  if (nodes.empty()) throw ValidationError("F1 over empty input");
  F1Counts counts;
  const std::uint32_t L = truth.num_classes;
  counts.tp.assign(L, 0.0);
  counts.fp.assign(L, 0.0);
  counts.fn.assign(L, 0.0);
  if (truth.mode == LabelMode::Single) {
    if (pred.single.size() != nodes.size())
      throw ValidationError("prediction/node length mismatch");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const ClassId t = truth.single_labels[nodes[i]];
      const ClassId p = pred.single[i];
      if (p == t) {
        counts.tp[t] += 1.0;
      } else {
        counts.fp[p] += 1.0;
        counts.fn[t] += 1.0;
      }
    }
  } else {
    if (pred.multi.size() != nodes.size() * static_cast<std::size_t>(L))
      throw ValidationError("prediction/node length mismatch");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto row = truth.multi_row(nodes[i]);
      for (std::uint32_t d = 0; d < L; ++d) {
        const bool p = pred.multi[i * L + d] != 0;
        const bool t = row[d] != 0;
        if (p && t)
          counts.tp[d] += 1.0;
        else if (p && !t)
          counts.fp[d] += 1.0;
        else if (!p && t)
          counts.fn[d] += 1.0;
      }
    }
  }
  return counts;
}

double micro_f1_from_counts(const F1Counts& counts) {
  double tp = 0.0, fp = 0.0, fn = 0.0;
  for (std::size_t l = 0; l < counts.tp.size(); ++l) {
    tp += counts.tp[l];
    fp += counts.fp[l];
    fn += counts.fn[l];
  }
  const double denom = 2.0 * tp + fp + fn;
  return denom > 0.0 ? 2.0 * tp / denom : 0.0;
}

double weighted_f1_from_counts(const F1Counts& counts) {
  double total_support = 0.0;
  for (std::size_t l = 0; l < counts.tp.size(); ++l)
    total_support += counts.tp[l] + counts.fn[l];
  if (total_support <= 0.0) return 0.0;
  double score = 0.0;
  for (std::size_t l = 0; l < counts.tp.size(); ++l) {
    const double support = counts.tp[l] + counts.fn[l];
    if (support <= 0.0) continue;
    const double denom = 2.0 * counts.tp[l] + counts.fp[l] + counts.fn[l];
    const double f1 = denom > 0.0 ? 2.0 * counts.tp[l] / denom : 0.0;
    score += (support / total_support) * f1;
  }
  return score;
}

double micro_f1(const Predictions& pred, const LabelSet& truth,
                std::span<const NodeId> nodes) {
  return micro_f1_from_counts(f1_counts(pred, truth, nodes));
}

double weighted_f1(const Predictions& pred, const LabelSet& truth,
                   std::span<const NodeId> nodes) {
  return weighted_f1_from_counts(f1_counts(pred, truth, nodes));
}

} // namespace entropart
