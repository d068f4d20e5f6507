#pragma once

#include <stdexcept>
#include <string>

namespace modelvc {

// ---- Error taxonomy ----
//
// One exception type with a machine-readable kind; the CLI maps kinds to
// exit codes and stderr lines, library callers can switch on kind().

enum class errc {
  parse,              // malformed manifest / blob / metadata text
  format_version,     // persisted data written by an unsupported version
  cyclic_model,       // model graph has a cycle
  integrity,          // duplicate layer ids, dangling edge endpoints, bad hook output
  shape_mismatch,     // tensor payload size disagrees with dims/dtype
  missing_object,     // key not present in object or delta store
  corrupt_object,     // stored bytes do not re-hash to their key
  store_write,        // blob could not be persisted
  name,               // duplicate or unknown node name
  type_mismatch,      // version edge between different model types
  cycle,              // lineage edge would create a cycle
  selector,           // hook selector matches nothing
  codec,              // undecodable delta payload / bad codec config
  chain_depth,        // delta chain longer than the configured maximum
  hook_failed,        // hook exited nonzero
  hook_timeout,       // hook exceeded its time budget
  sharing_violation,  // group members disagree on a shared parameter
  pattern,            // invalid test-name regex
  not_found,          // bisect found no failing version; lookup misses
  ancestry,           // merge ancestor is not a common ancestor
  lock,               // repository lock held elsewhere
  stale_metadata,     // on-disk metadata changed under us
  no_repository,      // no repository found from the working directory
  usage,              // bad command-line arguments
  crash_injected,     // durability-test failpoint fired
};

const char* errc_name(errc k);

class error : public std::runtime_error {
 public:
  error(errc kind, const std::string& msg)
      : std::runtime_error(std::string(errc_name(kind)) + ": " + msg), kind_(kind) {}
  errc kind() const noexcept { return kind_; }

 private:
  errc kind_;
};

[[noreturn]] inline void raise(errc kind, const std::string& msg) { throw error(kind, msg); }

}  // namespace modelvc
