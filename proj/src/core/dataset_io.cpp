#include "core/dataset_io.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "core/io_util.hpp"

namespace entropart {

namespace {

using nlohmann::json;

std::uint64_t read_u64_le(const std::uint8_t* p) {
  std::uint64_t x = 0;
  for (int i = 7; i >= 0; --i) x = (x << 8) | p[i];
  return x;
}

std::uint32_t read_u32_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_u64_le(std::vector<std::uint8_t>& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

void append_u32_le(std::vector<std::uint8_t>& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

json load_json_file(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  json j = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) throw IoError("malformed JSON: " + path);
  return j;
}

std::vector<NodeId> parse_split(const json& j, const char* key, NodeId n) {
  if (!j.contains(key) || !j[key].is_array())
    throw ValidationError(std::string("splits.json missing array: ") + key);
  std::vector<NodeId> ids;
  ids.reserve(j[key].size());
  for (const auto& v : j[key]) {
    const std::uint64_t id = v.get<std::uint64_t>();
    if (id >= n)
      throw ValidationError(std::string(key) + " split id out of range: " +
                            std::to_string(id));
    ids.push_back(static_cast<NodeId>(id));
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw ValidationError(std::string("duplicate id in ") + key + " split");
  return ids;
}

} // namespace

Dataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw IoError("dataset directory does not exist: " + dir);

  const json meta = load_json_file(dir + "/meta.json");
  for (const char* key : {"num_nodes", "num_edges", "feature_dim",
                          "num_classes", "label_mode", "undirected"})
    if (!meta.contains(key))
      throw ValidationError(std::string("meta.json missing key: ") + key);

  const NodeId num_nodes = meta["num_nodes"].get<NodeId>();
  const std::uint64_t num_pairs = meta["num_edges"].get<std::uint64_t>();
  const std::uint32_t dim = meta["feature_dim"].get<std::uint32_t>();
  const std::uint32_t num_classes = meta["num_classes"].get<std::uint32_t>();
  const std::string mode_str = meta["label_mode"].get<std::string>();
  const bool undirected = meta["undirected"].get<bool>();
  if (mode_str != "single" && mode_str != "multi")
    throw ValidationError("meta.json label_mode must be single|multi");
  if (num_classes == 0) throw ValidationError("num_classes must be positive");

  Dataset ds;

  {
    const auto bytes = read_file_bytes(dir + "/edges.bin");
    if (bytes.size() != num_pairs * 16)
      throw ValidationError("edges.bin payload size mismatch: expected " +
                            std::to_string(num_pairs * 16) + " bytes, got " +
                            std::to_string(bytes.size()));
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(num_pairs);
    for (std::uint64_t i = 0; i < num_pairs; ++i) {
      const std::uint64_t u = read_u64_le(bytes.data() + i * 16);
      const std::uint64_t v = read_u64_le(bytes.data() + i * 16 + 8);
      if (u >= num_nodes || v >= num_nodes)
        throw ValidationError("edge endpoint out of range in edges.bin");
      edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
    ds.graph = build_graph(num_nodes, edges, undirected);
  }

  {
    const auto bytes = read_file_bytes(dir + "/features.bin");
    const std::size_t expected =
        static_cast<std::size_t>(num_nodes) * dim * sizeof(float);
    if (bytes.size() != expected)
      throw ValidationError("features.bin payload size mismatch: expected " +
                            std::to_string(expected) + " bytes, got " +
                            std::to_string(bytes.size()));
    ds.features.dim = dim;
    ds.features.data.resize(static_cast<std::size_t>(num_nodes) * dim);
    static_assert(sizeof(float) == 4);
    std::memcpy(ds.features.data.data(), bytes.data(), bytes.size());
  }

  {
    const auto bytes = read_file_bytes(dir + "/labels.bin");
    ds.labels.num_classes = num_classes;
    if (mode_str == "single") {
      ds.labels.mode = LabelMode::Single;
      if (bytes.size() != static_cast<std::size_t>(num_nodes) * 4)
        throw ValidationError("labels.bin payload size mismatch");
      ds.labels.single_labels.resize(num_nodes);
      for (NodeId v = 0; v < num_nodes; ++v) {
        const std::uint32_t label = read_u32_le(bytes.data() + v * 4u);
        if (label >= num_classes)
          throw ValidationError("label id " + std::to_string(label) +
                                " >= num_classes " +
                                std::to_string(num_classes));
        ds.labels.single_labels[v] = label;
      }
    } else {
      ds.labels.mode = LabelMode::Multi;
      if (bytes.size() != static_cast<std::size_t>(num_nodes) * num_classes)
        throw ValidationError("labels.bin payload size mismatch");
      ds.labels.multi_labels.assign(bytes.begin(), bytes.end());
      for (std::uint8_t b : ds.labels.multi_labels)
        if (b > 1)
          throw ValidationError("multi-label entry not in {0,1}");
    }
  }

  {
    const json splits = load_json_file(dir + "/splits.json");
    ds.splits.train_ids = parse_split(splits, "train", num_nodes);
    ds.splits.val_ids = parse_split(splits, "val", num_nodes);
    ds.splits.test_ids = parse_split(splits, "test", num_nodes);
    std::set<NodeId> seen(ds.splits.train_ids.begin(),
                          ds.splits.train_ids.end());
    for (NodeId v : ds.splits.val_ids)
      if (!seen.insert(v).second) throw ValidationError("splits overlap");
    for (NodeId v : ds.splits.test_ids)
      if (!seen.insert(v).second) throw ValidationError("splits overlap");
  }

  return ds;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directory(dir, ec);  // parent must already exist
  if (!fs::is_directory(dir))
    throw IoError("cannot create dataset directory: " + dir);

  const Graph& g = ds.graph;
  json meta;
  meta["num_nodes"] = g.num_nodes;
  meta["num_edges"] = g.num_edges;
  meta["feature_dim"] = ds.features.dim;
  meta["num_classes"] = ds.labels.num_classes;
  meta["label_mode"] = ds.labels.mode == LabelMode::Single ? "single" : "multi";
  meta["undirected"] = g.undirected;
  write_file_atomic(dir + "/meta.json", meta.dump(2) + "\n");

  {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(g.num_edges * 16);
    for (NodeId v = 0; v < g.num_nodes; ++v) {
      for (NodeId u : g.neighbors_of(v)) {
        append_u64_le(bytes, v);
        append_u64_le(bytes, u);
      }
    }
    write_file_atomic(dir + "/edges.bin", bytes.data(), bytes.size());
  }

  write_file_atomic(dir + "/features.bin", ds.features.data.data(),
                    ds.features.data.size() * sizeof(float));

  {
    std::vector<std::uint8_t> bytes;
    if (ds.labels.mode == LabelMode::Single) {
      bytes.reserve(ds.labels.single_labels.size() * 4);
      for (ClassId c : ds.labels.single_labels) append_u32_le(bytes, c);
    } else {
      bytes = ds.labels.multi_labels;
    }
    write_file_atomic(dir + "/labels.bin", bytes.data(), bytes.size());
  }

  {
    json splits;
    splits["train"] = ds.splits.train_ids;
    splits["val"] = ds.splits.val_ids;
    splits["test"] = ds.splits.test_ids;
    write_file_atomic(dir + "/splits.json", splits.dump() + "\n");
  }
}

void save_assignment(const PartitionAssignment& assignment,
                     const std::string& path) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(assignment.part_of.size() * 4);
  for (PartId p : assignment.part_of) append_u32_le(bytes, p);
  write_file_atomic(path, bytes.data(), bytes.size());
}

PartitionAssignment load_assignment(const std::string& path,
                                    NodeId expected_nodes) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() != static_cast<std::size_t>(expected_nodes) * 4)
    throw ValidationError("assignment payload size mismatch: " + path);
  PartitionAssignment assignment;
  assignment.part_of.resize(expected_nodes);
  PartId max_part = 0;
  for (NodeId v = 0; v < expected_nodes; ++v) {
    assignment.part_of[v] = read_u32_le(bytes.data() + v * 4u);
    max_part = std::max(max_part, assignment.part_of[v]);
  }
  assignment.num_parts = expected_nodes == 0 ? 0 : max_part + 1;
  std::vector<std::uint8_t> seen(assignment.num_parts, 0);
  for (PartId p : assignment.part_of) seen[p] = 1;
  for (PartId p = 0; p < assignment.num_parts; ++p)
    if (!seen[p])
      throw ValidationError("assignment has empty part " + std::to_string(p));
  return assignment;
}

} // namespace entropart
