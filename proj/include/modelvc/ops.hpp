#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "modelvc/diff.hpp"
#include "modelvc/hooks.hpp"
#include "modelvc/repo.hpp"

namespace modelvc {

// ---- Lineage traversals ----
//
// Children are visited in name order; every reachable node is offered to the
// filter exactly once.
//   take   yield the node and continue through it        (default)
//   skip   do not yield, but continue through it
//   prune  yield, but do not continue through it
//   drop   neither yield nor continue through it

enum class Traversal { bfs, dfs, version_chain, all_parents_first };
enum class EdgeSet { provenance, versioning, both };
enum class Visit { take, skip, prune, drop };
using VisitFn = std::function<Visit(const LineageNode&)>;

const char* traversal_name(Traversal t);
const char* edge_set_name(EdgeSet e);

// bfs/dfs walk child edges from `start` (inclusive). version_chain walks the
// whole chain containing `start`, oldest first (EdgeSet ignored).
// all_parents_first emits the subgraph reachable from `start` in an order
// where every in-subgraph parent precedes its children; a pruned/dropped
// node's exclusive descendants are never reached.
std::vector<std::string> traverse(const LineageGraph& g, const std::string& start, Traversal t,
                                  EdgeSet edges, const VisitFn& filter = {});

// ---- Model export ----
//
// Materializes every param (delta refs reconstructed) into `dir` as a
// bundle: objects/ blobs plus manifest.json with stored refs. Returns the
// manifest path.
std::filesystem::path export_model(Repository& repo, const ModelGraph& m,
                                   const std::filesystem::path& dir);

// ---- Tests ----
//
// Selected hooks = model's own test hooks plus its model_type's, own hooks
// shadowing type hooks of the same name; `name_pattern` (ECMAScript regex,
// empty = all) filters by test name. Run sequentially in name order.

struct TestReport {
  std::string test_name;
  RunResult run;
};

std::vector<TestReport> run_tests(Repository& repo, const std::string& model,
                                  const std::string& name_pattern = "");

// Single named test against an arbitrary model name (bisect probes).
RunResult run_named_test(Repository& repo, const std::string& model,
                         const std::string& test_name);

// ---- Built-in analysis functions ----
//
//   l2_norm      sqrt(sum of squares) over all float params
//   sparsity     zero elements / total elements over all float params
//   delta_norm   l2 norm of (model - first provenance parent) over mapped
//                float params
double run_function(Repository& repo, const std::string& model, const std::string& fn);
std::vector<std::string> analysis_function_names();

// ---- Compression driver ----
//
// Encodes `model` against `against` (default: its first provenance parent).
// When use_tests is set and the model has test hooks, each candidate is
// exported and its hooks' metrics guard acceptance (drop > t_thr rejects).
CompressionOutcome compress_model(Repository& repo, const std::string& model,
                                  const std::string& against, const CodecConfig& cfg,
                                  bool use_tests);

// ---- Version bisection ----
//
// Searches the version chain from `good` (known passing) to `bad` (known
// failing) for the first failing version of the named test. Results are
// memoized; at most ceil(log2(steps between good and bad)) + 1 hook runs.

struct BisectResult {
  std::string first_bad;
  std::vector<std::string> probed;   // in probe order
  size_t invocations = 0;
};

BisectResult bisect(Repository& repo, const std::string& good, const std::string& bad,
                    const std::string& test_name);

// ---- Update cascade ----
//
// `model` must already have a newer version (the user-supplied update).
// Every provenance descendant with a creation hook gets a placeholder next
// version wired to its parents' next-or-current versions; descendants
// without a creation hook cut the cascade along that path. Creation hooks
// then run parents-first; a failure halts only the subtree hanging off the
// failed node. Existing models are never overwritten.

struct CascadeStep {
  std::string source;        // outdated model
  std::string created;       // its new version
  bool hook_run = false;
  bool passed = false;
  std::optional<double> metric;
  std::string note;
};

struct CascadeReport {
  std::string updated_root;   // the pre-existing new version of `model`
  std::vector<CascadeStep> steps;
  bool all_passed() const;
};

CascadeReport update_cascade(Repository& repo, const std::string& model);

// ---- Three-way merge ----
//
// Diffs the closest common provenance ancestor against both sides.
//   conflict           the sides changed overlapping layers (or the merged
//                      candidate is not a valid DAG)
//   possible_conflict  disjoint changes, but a directed path connects one
//                      side's changes to the other's in the candidate
//   no_conflict        disjoint and independent
// The candidate is built for both non-conflict outcomes.

enum class MergeStatus { no_conflict = 0, possible_conflict = 1, conflict = 2 };

struct MergeReport {
  MergeStatus status = MergeStatus::conflict;
  std::string ancestor;
  std::string detail;
  std::vector<std::string> changed_a;   // ancestor-relative changed layer ids
  std::vector<std::string> changed_b;
  std::optional<ModelGraph> merged;
};

MergeReport merge_models(Repository& repo, const std::string& a, const std::string& b);

}  // namespace modelvc
