#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "modelvc/tensor.hpp"

namespace modelvc {

// ---- Parameter references ----
//
// stored  : key names a raw blob in the object store
// delta   : key names a delta record; resolving it reconstructs the tensor
// inline_ : payload carried inside the manifest (interchange bundles only;
//           normalized to stored on import)

struct ParamRef {
  enum class kind_t : uint8_t { stored, delta, inline_ };

  kind_t kind = kind_t::stored;
  dtype dt = dtype::f32;
  std::vector<uint64_t> shape;
  std::string key;       // stored / delta
  std::string payload;   // inline_

  uint64_t byte_size() const;
  friend bool operator==(const ParamRef&, const ParamRef&) = default;
};

using AttrValue = std::variant<bool, int64_t, double, std::string>;

struct LayerNode {
  std::string layer_id;
  std::string op_type;
  std::map<std::string, AttrValue> attributes;   // sorted, deterministic
  std::map<std::string, ParamRef> params;        // sorted, deterministic

  friend bool operator==(const LayerNode&, const LayerNode&) = default;
};

// ---- Model graph ----
//
// A DAG of layers; edges are (src layer_id, dst layer_id) dataflow arcs.

struct ModelGraph {
  std::string model_name;
  std::string model_type;
  std::vector<LayerNode> layers;
  std::vector<std::pair<std::string, std::string>> edges;

  const LayerNode* find_layer(std::string_view id) const;
  LayerNode* find_layer(std::string_view id);
  bool has_edge(const std::string& src, const std::string& dst) const;

  // unique ids, endpoints exist, acyclic; throws integrity / cyclic_model
  void validate() const;

  // Kahn's algorithm with lexicographic layer_id tie-break: deterministic,
  // edge-respecting.  Returns indices into layers.
  std::vector<size_t> topo_order() const;

  uint64_t total_param_bytes() const;
};

// ---- Manifest text ----
//
// Canonical JSON: object keys sorted, layers listed in topological order,
// edges sorted by endpoint topological positions.  serialize(deserialize(x))
// is byte-identical for canonical x.

inline constexpr int kManifestVersion = 1;

std::string serialize_model(const ModelGraph& m);
ModelGraph deserialize_model(std::string_view text);

}  // namespace modelvc
