#pragma once

#include <string>

#include "core/graph.hpp"

namespace entropart {

// On-disk dataset directory layout:
//   meta.json     num_nodes, num_edges, feature_dim, num_classes,
//                 label_mode ("single"|"multi"), undirected
//   edges.bin     little-endian u64 (src,dst) pairs, one per directed edge
//                 before symmetrization; num_edges in meta counts these pairs
//   features.bin  little-endian float32, row-major num_nodes x feature_dim
//   labels.bin    u32 per node (single) or u8 num_nodes x num_classes (multi)
//   splits.json   {"train": [...], "val": [...], "test": [...]}
Dataset load_dataset(const std::string& dir);

void save_dataset(const Dataset& ds, const std::string& dir);

void save_assignment(const PartitionAssignment& assignment,
                     const std::string& path);
PartitionAssignment load_assignment(const std::string& path,
                                    NodeId expected_nodes);

} // namespace entropart
