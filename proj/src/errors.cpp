#include "modelvc/errors.hpp"

namespace modelvc {

const char* errc_name(errc k) {
  switch (k) {
    case errc::parse: return "ParseError";
    case errc::format_version: return "FormatVersionError";
    case errc::cyclic_model: return "CyclicModelError";
    case errc::integrity: return "IntegrityError";
    case errc::shape_mismatch: return "ShapeError";
    case errc::missing_object: return "MissingObjectError";
    case errc::corrupt_object: return "CorruptObjectError";
    case errc::store_write: return "StoreWriteError";
    case errc::name: return "NameError";
    case errc::type_mismatch: return "TypeMismatchError";
    case errc::cycle: return "CycleError";
    case errc::selector: return "SelectorError";
    case errc::codec: return "CodecError";
    case errc::chain_depth: return "ChainDepthError";
    case errc::hook_failed: return "HookFailedError";
    case errc::hook_timeout: return "HookTimeoutError";
    case errc::sharing_violation: return "SharingViolationError";
    case errc::pattern: return "PatternError";
    case errc::not_found: return "NotFoundError";
    case errc::ancestry: return "AncestryError";
    case errc::lock: return "LockError";
    case errc::stale_metadata: return "StaleMetadataError";
    case errc::no_repository: return "NoRepositoryError";
    case errc::usage: return "UsageError";
    case errc::crash_injected: return "CrashInjected";
  }
  return "Error";
}

}  // namespace modelvc
