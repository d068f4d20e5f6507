#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modelvc/lineage.hpp"
#include "modelvc/model.hpp"
#include "modelvc/store.hpp"

namespace modelvc {

// ---- External command hooks ----
//
// Creation and test hooks are ordinary executables. Their argv templates may
// use placeholders:
//   {parents}   expands, as a whole token, to one argument per provenance
//               parent: the parent's manifest file path (name order)
//   {model}     manifest file path of the model under test
//   {output}    empty directory the hook must fill with a model bundle
//   {objects}   repository object-store directory (raw tensor blobs)
//   {workdir}   repository working directory
// All but {parents} are plain substring substitutions.
//
// Exit status 0 means the hook passed. If the final non-empty stdout line
// parses fully as a real number it is reported as the hook's metric.

struct PlaceholderValues {
  std::vector<std::string> parents;
  std::optional<std::string> model;
  std::optional<std::string> output;
  std::optional<std::string> objects;
  std::optional<std::string> workdir;
};

std::vector<std::string> substitute_placeholders(const std::vector<std::string>& argv_template,
                                                 const PlaceholderValues& vals);

struct RunResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string out;                  // captured stdout
  std::string err;                  // captured stderr
  int64_t duration_ms = 0;
  std::optional<double> metric;     // trailing stdout number, if any

  bool passed() const { return exit_code == 0 && !timed_out; }
};

// Runs argv[0] with the given arguments in `cwd`, capturing both streams.
// On timeout the process group is killed and timed_out is set. Raises
// HookFailedError only when the process cannot be spawned at all.
RunResult run_command(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                      int64_t timeout_ms);

std::optional<double> parse_trailing_metric(const std::string& stdout_text);

// ---- Model bundles ----
//
// A creation hook communicates its result as a bundle directory:
//   manifest.json          serialized model graph
//   objects/xx/yyyy...     optional blobs backing "stored" param refs
// Params may be inline (base64 in the manifest) or stored; inline params are
// normalized into the object store on import. Stored refs must resolve via
// the bundle's objects/ directory or the repository store; each imported
// blob is re-hashed against its key.
ModelGraph import_model_bundle(const std::filesystem::path& bundle_dir, ObjectStore& objects);

// Same contract for a manifest living anywhere; an objects/ directory next
// to the file serves as the bundle store.
ModelGraph import_model_manifest(const std::filesystem::path& manifest_file,
                                 ObjectStore& objects);

// ---- Merged creation (grouped training) ----
//
// Several sibling models produced by one training run share a single
// creation hook invocation. The hook fills {output} with one bundle per
// member under subdirectories "0".."n-1", matching `members` order, plus an
// optional shared_params.json at top level:
//   { "layer_id/param_name": ["0", "1", ...], ... }
// listing, for each shared parameter, the member subdirs that must hold
// byte-identical content. A mismatch raises SharingViolationError.

struct MergedCreationResult {
  RunResult run;
  std::vector<ModelGraph> models;   // one per member, only when run.passed()
};

MergedCreationResult run_merged_creation(const HookSpec& hook,
                                         const std::vector<std::string>& members,
                                         const PlaceholderValues& base_vals,
                                         const std::filesystem::path& output_dir,
                                         const std::filesystem::path& cwd,
                                         ObjectStore& objects);

}  // namespace modelvc
