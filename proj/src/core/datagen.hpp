#pragma once

#include <cstdint>
#include <vector>

#include "core/graph.hpp"

namespace entropart {

// Planted-community generator: stochastic block model with class-correlated
// features and configurable class imbalance. The desk-scale stand-in for the
// public benchmark graphs.
struct GenSpec {
  NodeId num_nodes = 1000;
  std::uint32_t num_classes = 4;
  std::vector<double> class_proportions = {0.7, 0.2, 0.07, 0.03};
  double homophily = 0.9;          // expected fraction of intra-class edges
  double avg_degree = 20.0;
  std::uint32_t feature_dim = 64;
  double feature_noise = 0.3;      // Gaussian noise scale around class means
  std::uint64_t seed = 1;
};

void validate_gen_spec(const GenSpec& spec);

// Deterministic given spec.seed. Labels are drawn from class_proportions,
// edges from a two-rate block model calibrated so the expected intra-class
// edge fraction equals homophily at the requested average degree, features
// are class-mean unit vectors (orthogonal when feature_dim >= num_classes)
// plus Gaussian noise, and splits are a stratified 60/20/20.
Dataset generate(const GenSpec& spec);

} // namespace entropart
