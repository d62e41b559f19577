#pragma once

#include <vector>

#include "core/graph.hpp"

namespace entropart {

// Empirical label distribution over a node set. Single mode: class
// frequencies summing to 1. Multi mode: per-dimension positive rates.
struct LabelDistribution {
  LabelMode mode = LabelMode::Single;
  std::vector<double> probs;
};

struct EntropyReport {
  std::vector<double> per_part_entropy;  // bits
  std::vector<std::uint64_t> per_part_sizes;
  double total_entropy = 0.0;  // size-weighted average, bits
};

// Entropy in bits: -sum p*log2(p) with 0*log0 = 0 in single mode; the sum of
// per-dimension binary entropies in multi mode.
double entropy(const LabelDistribution& dist);

LabelDistribution label_distribution(const LabelSet& labels,
                                     std::span<const NodeId> nodes);

EntropyReport total_entropy(const LabelSet& labels,
                            const PartitionAssignment& assignment);

// Predictions: class ids in single mode; 0/1 matrix rows (num_classes wide)
// in multi mode.
struct Predictions {
  LabelMode mode = LabelMode::Single;
  std::uint32_t num_classes = 0;
  std::vector<ClassId> single;
  std::vector<std::uint8_t> multi;  // row-major n x num_classes
};

struct F1Counts {
  std::vector<double> tp, fp, fn;  // per class / per dimension
};

F1Counts f1_counts(const Predictions& pred, const LabelSet& truth,
                   std::span<const NodeId> nodes);
double micro_f1_from_counts(const F1Counts& counts);
double weighted_f1_from_counts(const F1Counts& counts);

double micro_f1(const Predictions& pred, const LabelSet& truth,
                std::span<const NodeId> nodes);
double weighted_f1(const Predictions& pred, const LabelSet& truth,
                   std::span<const NodeId> nodes);

} // namespace entropart
