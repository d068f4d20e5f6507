#pragma once

#include <string>
#include <utility>
#include <vector>

#include "modelvc/model.hpp"

namespace modelvc {

// ---- Diff modes ----
//
// structural: layers compared by op_type, attributes, and param shapes/dtypes
// contextual: structural identity plus the params' content keys

enum class DiffMode { structural, contextual };

const char* diff_mode_name(DiffMode m);

std::string layer_signature(const LayerNode& l, DiffMode mode);

using EdgeIds = std::pair<std::string, std::string>;

// ---- Diff result ----
//
// Partition guarantees: every layer of m1 appears in exactly one of
// {matches_n left side, del_n}; every layer of m2 in exactly one of
// {matches_n right side, add_n}; likewise for edges.

struct DiffResult {
  DiffMode mode = DiffMode::structural;
  std::vector<std::pair<std::string, std::string>> matches_n;   // (m1 id, m2 id)
  std::vector<std::string> del_n;                               // m1-only layers
  std::vector<std::string> add_n;                               // m2-only layers
  std::vector<std::pair<EdgeIds, EdgeIds>> matches_e;
  std::vector<EdgeIds> del_e;
  std::vector<EdgeIds> add_e;
  size_t edge_count_1 = 0;
  size_t edge_count_2 = 0;
  bool node_multisets_equal = false;

  // (|add_e| + |del_e|) / (|E1| + |E2|); for two edgeless graphs 0 when the
  // layer-signature multisets agree, else 1
  double divergence() const;
};

// Node matching is the maximum order-consistent matching over the two
// topologically ordered layer-signature sequences (ties prefer pairs found
// by the greedy edge-driven pass); edge matches are induced from it. The
// pair is oriented canonically before matching, so module_diff(a, b) is the
// exact mirror of module_diff(b, a) and divergence() is symmetric.
DiffResult module_diff(const ModelGraph& m1, const ModelGraph& m2, DiffMode mode);

struct DivergenceScore {
  double structural = 0;
  double contextual = 0;
};

DivergenceScore divergence(const ModelGraph& m1, const ModelGraph& m2);

// Rebuilds m2 from m1 and a diff: matched m1 layers renamed to their m2
// partner ids, added layers and edges taken from m2.  The result's self-diff
// against m2 under the same mode is empty.
ModelGraph apply_diff(const ModelGraph& m1, const ModelGraph& m2, const DiffResult& d);

std::string diff_report(const DiffResult& d);   // human-readable summary

// ---- Cached signature form ----
//
// Pairwise scoring against many existing models reuses per-model signature
// sequences instead of re-deriving them per comparison.

struct ModelSignature {
  std::vector<std::string> seq;                    // topo-ordered layer digests
  std::vector<std::pair<size_t, size_t>> edges;    // topo-position endpoint pairs
};

ModelSignature model_signature(const ModelGraph& m, DiffMode mode);
double divergence_from_signatures(const ModelSignature& a, const ModelSignature& b);

}  // namespace modelvc
