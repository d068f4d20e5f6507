#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace modelvc {

// ---- Lineage graph ----
//
// Tracks two relations over registered models:
//   * provenance edges ("derived from"): a DAG, any fan-in/fan-out
//   * versioning edges ("newer version of"): a forest layered on top —
//     every node has at most one version parent, and both endpoints must
//     share a model_type
//
// Command hooks live here too: an optional creation hook per node (how to
// rebuild the model from its provenance parents) plus named test hooks per
// node and per model_type.

struct HookSpec {
  std::vector<std::string> argv;           // template; see hooks.hpp placeholders
  int64_t timeout_ms = 3'600'000;          // 1h default

  bool operator==(const HookSpec&) const = default;
};

struct LineageNode {
  std::string name;
  std::string model_type;
  std::string manifest_key;                // content key of the manifest blob

  std::optional<HookSpec> creation_hook;
  std::map<std::string, HookSpec> test_hooks;   // test name -> command

  // Adjacency (mirrored; names sorted for determinism).
  std::vector<std::string> prov_parents;
  std::vector<std::string> prov_children;
  std::optional<std::string> ver_parent;
  std::vector<std::string> ver_children;

  int64_t created_at_ms = 0;               // wall clock, informational only
  uint64_t created_seq = 0;                // monotonic insertion counter
};

class LineageGraph {
 public:
  // Accessors -------------------------------------------------------------
  bool has_node(const std::string& name) const;
  const LineageNode& node(const std::string& name) const;   // NotFoundError
  LineageNode& node_mut(const std::string& name);
  std::vector<std::string> node_names() const;              // sorted
  size_t size() const { return nodes_.size(); }
  uint64_t next_seq() const { return next_seq_; }

  // Mutation ----------------------------------------------------------------
  // add_node: name must be new and non-empty. add_*_edge reject unknown
  // endpoints, duplicates, self-loops, and anything that would close a cycle
  // in the respective relation; version edges additionally require matching
  // model_type and a child with no existing version parent.
  LineageNode& add_node(const std::string& name, const std::string& model_type,
                        const std::string& manifest_key);
  void add_prov_edge(const std::string& parent, const std::string& child);
  void add_ver_edge(const std::string& old_model, const std::string& new_model);
  void remove_prov_edge(const std::string& parent, const std::string& child);
  void remove_ver_edge(const std::string& old_model, const std::string& new_model);

  // Removes x plus every provenance descendant that becomes unreachable from
  // the remaining original roots (parentless nodes other than x) once x is
  // gone. Returns the removed names, sorted.
  std::vector<std::string> remove_node(const std::string& name);

  // Per-model_type test hooks.
  const std::map<std::string, HookSpec>& type_tests(const std::string& model_type) const;
  void register_type_test(const std::string& model_type, const std::string& test_name,
                          HookSpec spec);
  bool deregister_type_test(const std::string& model_type, const std::string& test_name);
  std::vector<std::string> model_types() const;   // sorted, only types with tests

  // Queries -----------------------------------------------------------------
  // Version chain through name, oldest first.
  std::vector<std::string> version_chain(const std::string& name) const;
  // Child on the versioning relation with the largest created_seq, if any.
  std::optional<std::string> get_next_version(const std::string& name) const;
  std::optional<std::string> get_prev_version(const std::string& name) const;
  // Nearest common ancestor on the provenance relation: minimizes
  // dist(a, x) + dist(b, x), ties by name. nullopt if none exists.
  std::optional<std::string> closest_common_ancestor(const std::string& a,
                                                     const std::string& b) const;
  std::vector<std::string> roots() const;   // provenance-parentless, sorted

  // First free version name of the form `base@vN` (N >= 2).
  std::string next_version_name(const std::string& base) const;

  // Serialization -----------------------------------------------------------
  std::string serialize() const;                       // canonical JSON
  static LineageGraph deserialize(const std::string& text);

  // Internal consistency: mirrored adjacency, sortedness, endpoint existence,
  // type equality on version edges, acyclicity. IntegrityError on failure.
  void audit() const;

 private:
  std::map<std::string, LineageNode> nodes_;
  std::map<std::string, std::map<std::string, HookSpec>> type_tests_;
  uint64_t next_seq_ = 1;

  void insert_sorted(std::vector<std::string>& v, const std::string& s);
  static bool erase_value(std::vector<std::string>& v, const std::string& s);
  bool prov_reaches(const std::string& from, const std::string& to) const;
  bool ver_reaches(const std::string& from, const std::string& to) const;
};

}  // namespace modelvc
