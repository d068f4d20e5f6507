#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "modelvc/model.hpp"
#include "modelvc/store.hpp"
#include "modelvc/tensor.hpp"

namespace modelvc {

// ---- Codec configuration ----

struct CodecConfig {
  double epsilon = 1e-4;
  std::string backend = "dict";   // "rle" | "dict"
  int max_chain_depth = 64;
  double t_thr = 0.01;            // tolerated metric drop when tests are registered
};

// ---- Pure quantization ops ----
//
// q = floor((p1 - p2) / (2*ln(1+eps)) + 0.5), elementwise, double arithmetic.
// dequantize returns p1 - q*step in p1's float dtype.

Tensor quantize_delta(const Tensor& p1, const Tensor& p2, double epsilon);   // i64 tensor
Tensor dequantize_delta(const Tensor& q, const Tensor& p1, double epsilon);

// ---- Lossless backends ----
//
// Both are deterministic and round-trip bit-exactly.  "rle" is (u32 LE run
// length, byte) pairs; "dict" is zlib deflate at a fixed level with a u64 LE
// raw-size prefix.

std::string lossless_compress(const std::string& backend, std::string_view raw);
std::string lossless_decompress(const std::string& backend, std::string_view compressed);

// ---- Delta records ----
//
// A record reconstructs one tensor from a parent tensor.  Records are
// addressed by the content key of the tensor they reconstruct, so the same
// 64-hex key space covers blobs and records and decode is self-validating.
// parent_key may name a blob or another record (chains).
//
/// The quantized payload carries an outlier list: elements whose float
// reconstruction would exceed the ln(1+eps) bound (lattice-rounding edge
// cases, integer-range overflow, non-finite deltas) are stored raw and
// patched after dequantization, so the bound holds for every element.

struct DeltaRecord {
  std::string parent_key;
  double epsilon = 1e-4;
  std::string backend = "dict";
  dtype dt = dtype::f32;
  std::vector<uint64_t> shape;
  std::string payload;   // lossless-compressed quantized ints + outliers
};

inline constexpr uint16_t kDeltaRecordVersion = 1;

std::string encode_delta_record(const DeltaRecord& r);
DeltaRecord decode_delta_record(std::string_view bytes);

struct EncodedParamDelta {
  DeltaRecord record;
  Tensor approx;      // the tensor the record reconstructs
  std::string key;    // content_key(approx)
};

EncodedParamDelta encode_param_delta(const Tensor& parent, const std::string& parent_key,
                                     const Tensor& child, double epsilon,
                                     const std::string& backend);
Tensor decode_param_delta(const DeltaRecord& r, const Tensor& parent);

// ---- Delta store ----

class DeltaStore {
 public:
  explicit DeltaStore(fs::path root) : files_(std::move(root)) {}

  void put(const std::string& key, const DeltaRecord& r);
  DeltaRecord get(const std::string& key) const;
  bool contains(const std::string& key) const { return files_.contains(key); }
  bool remove(const std::string& key) { return files_.remove(key); }
  std::vector<std::string> list_keys() const { return files_.list_keys(); }
  uint64_t record_bytes(const std::string& key) const;

  ShardedFileStore& files() { return files_; }
  const ShardedFileStore& files() const { return files_; }

 private:
  ShardedFileStore files_;
};

// ---- Chain resolution ----
//
// Resolves a key against the object store first, then the delta store,
// recursing through parent keys.  Reconstruction is verified: the decoded
// tensor must re-hash to the record key.

class ParamResolver {
 public:
  ParamResolver(const ObjectStore& objects, const DeltaStore& deltas, int max_chain_depth = 64)
      : objects_(objects), deltas_(deltas), max_depth_(max_chain_depth) {}

  Tensor resolve_key(const std::string& key) const;
  Tensor resolve(const ParamRef& ref) const;
  int chain_depth(const std::string& key) const;   // 0 for a raw blob

 private:
  Tensor resolve_at_depth(const std::string& key, int depth) const;

  const ObjectStore& objects_;
  const DeltaStore& deltas_;
  int max_depth_;
};

// ---- Parameter mapping ----
//
// Longest common subsequence over the two models' parameter sequences in
// topological layer order (params in name order within a layer), matching
// only identical (shape, dtype).

struct ParamEntry {
  std::string layer_id;
  std::string param_name;
  const ParamRef* ref;
  std::string path() const { return layer_id + "/" + param_name; }
};

std::vector<ParamEntry> param_sequence(const ModelGraph& m);
std::vector<std::pair<size_t, size_t>> lcs_param_mapping(const std::vector<ParamEntry>& a,
                                                         const std::vector<ParamEntry>& b);

// ---- Compression decision procedure ----
//
// Maps params, quantizes float mapped pairs, compresses, and accepts only if
// storage_saving = raw/compressed >= 1 and (when a metrics callback is
// supplied and yields values) no metric drops by more than t_thr.  Accepted
// records are persisted in the delta store; on rejection newly staged
// records are removed again.  Roots (models without a parent) are never
// passed here.

struct CompressionOutcome {
  bool accepted = false;
  std::string reason;            // "storage_saving" | "metric_drop" | "no_mapping" | ""
  double storage_saving = 0.0;
  uint64_t raw_bytes = 0;
  uint64_t compressed_bytes = 0;
  std::vector<std::pair<std::string, std::string>> records;   // (param path, record key)
  ModelGraph m2_out;
};

using MetricsFn = std::function<std::vector<double>(const ModelGraph&)>;

CompressionOutcome delta_compression(const ModelGraph& m1, const ModelGraph& m2,
                                     const CodecConfig& cfg, const ObjectStore& objects,
                                     DeltaStore& deltas, const MetricsFn& metrics = {});

}  // namespace modelvc
