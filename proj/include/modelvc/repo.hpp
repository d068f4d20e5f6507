#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "modelvc/deltacodec.hpp"
#include "modelvc/lineage.hpp"
#include "modelvc/model.hpp"
#include "modelvc/store.hpp"

namespace modelvc {

// ---- On-disk repository ----
//
// Layout under <workdir>/.modelvc/:
//   graph          lineage graph JSON (written last; authoritative metadata)
//   objects/       raw tensor blobs, content-addressed
//   deltas/        delta records, addressed by the key they reconstruct
//   manifests/     serialized model graphs, addressed by text digest
//   hooks/         scratch space for hook outputs and model exports
//   lock           advisory exclusive lock (flock)
//
// Durability convention: data files land before the graph references them
// (atomic temp+rename per file), and the graph is rewritten before data
// files are unlinked. A crash at any point leaves the previous metadata
// state loadable and every reference resolvable; stray unreferenced files
// are reported by fsck as warnings and collected by gc.

class Repository {
 public:
  Repository(const Repository&) = delete;
  Repository& operator=(const Repository&) = delete;
  Repository(Repository&&) = delete;
  ~Repository();

  // Creates <workdir>/.modelvc and returns the opened repository.
  static std::unique_ptr<Repository> init(const std::filesystem::path& workdir);

  // Locates a repository: explicit override, else $MODELVC_DIR, else the
  // nearest ancestor of `start` containing .modelvc/. NoRepositoryError if
  // none; LockError if another process holds the lock.
  static std::unique_ptr<Repository> open(const std::filesystem::path& start,
                                          const std::filesystem::path& override_dir = {});

  const std::filesystem::path& workdir() const { return workdir_; }
  std::filesystem::path root() const { return workdir_ / ".modelvc"; }
  std::filesystem::path hooks_scratch_dir();   // fresh unique subdir of hooks/

  LineageGraph& graph() { return graph_; }
  const LineageGraph& graph() const { return graph_; }
  ObjectStore& objects() { return objects_; }
  DeltaStore& deltas() { return deltas_; }
  ShardedFileStore& manifests() { return manifests_; }
  ParamResolver resolver() { return ParamResolver{objects_, deltas_}; }

  // Manifest round trip. Keys are digests of the canonical manifest text.
  std::string put_manifest(const ModelGraph& m);
  ModelGraph get_manifest(const std::string& key) const;
  std::filesystem::path manifest_path(const std::string& key) const;

  // Model access by lineage node name.
  ModelGraph get_model(const std::string& name) const;
  std::filesystem::path model_manifest_path(const std::string& name) const;

  // Registers a model whose params are already present in the stores
  // (see import_model_bundle). Writes the manifest; the caller still owns
  // adding edges/hooks and calling save().
  LineageNode& add_model(const std::string& name, const std::string& model_type,
                         const ModelGraph& m);
  // Points an existing node at a new manifest.
  void set_model(const std::string& name, const ModelGraph& m);

  // Persists the lineage graph (atomic). StaleMetadataError if the on-disk
  // graph changed behind this handle.
  void save();

  // ---- maintenance ----
  struct FsckReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool clean() const { return errors.empty(); }
  };
  FsckReport fsck() const;

  struct GcStats {
    size_t objects_removed = 0;
    size_t deltas_removed = 0;
    size_t manifests_removed = 0;
    uint64_t bytes_freed = 0;
  };
  GcStats gc();

 private:
  Repository(std::filesystem::path workdir, bool create);

  std::filesystem::path workdir_;
  LineageGraph graph_;
  ObjectStore objects_;
  DeltaStore deltas_;
  ShardedFileStore manifests_;
  int lock_fd_ = -1;
  std::string loaded_graph_digest_;
  uint64_t scratch_counter_ = 0;

  void acquire_lock();
  void load_graph();
  // Keys reachable from the lineage graph: [0] objects, [1] deltas,
  // [2] manifests. Delta parent chains are walked through both stores.
  std::array<std::set<std::string>, 3> reachable_keys() const;
};

}  // namespace modelvc
