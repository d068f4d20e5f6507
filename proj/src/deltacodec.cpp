#include "modelvc/deltacodec.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "modelvc/errors.hpp"
#include "modelvc/hash.hpp"
#include "modelvc/kernels.hpp"

namespace modelvc {

namespace {

std::vector<float> to_f32_buffer(const Tensor& t) {
  uint64_t n = t.element_count();
  std::vector<float> out(n);
  if (t.dt == dtype::f32) {
    std::memcpy(out.data(), t.data.data(), n * 4);
  } else {
    for (uint64_t i = 0; i < n; ++i) out[i] = t.f32_at(i);
  }
  return out;
}

void require_float_pair(const Tensor& p1, const Tensor& p2) {
  if (p1.dt != p2.dt || p1.shape != p2.shape) {
    raise(errc::shape_mismatch, "delta endpoints must share shape and dtype");
  }
  if (!dtype_is_float(p1.dt)) raise(errc::codec, "delta quantization requires a float dtype");
}

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    raise(errc::codec, "epsilon must be a positive finite number");
  }
}

uint8_t backend_code(const std::string& backend) {
  if (backend == "rle") return 1;
  if (backend == "dict") return 2;
  raise(errc::codec, "unknown lossless backend: " + backend);
}

std::string backend_name(uint8_t code) {
  if (code == 1) return "rle";
  if (code == 2) return "dict";
  raise(errc::codec, "unknown lossless backend code");
}

std::string hex_to_digest(const std::string& hex) {
  std::string out(32, '\0');
  auto nib = [](char c) -> int { return c <= '9' ? c - '0' : c - 'a' + 10; };
  for (size_t i = 0; i < 32; ++i) {
    out[i] = char((nib(hex[2 * i]) << 4) | nib(hex[2 * i + 1]));
  }
  return out;
}

std::string digest_to_hex(const char* p) {
  static const char* hexd = "0123456789abcdef";
  std::string out(64, '0');
  for (size_t i = 0; i < 32; ++i) {
    out[2 * i] = hexd[uint8_t(p[i]) >> 4];
    out[2 * i + 1] = hexd[uint8_t(p[i]) & 0xf];
  }
  return out;
}

uint8_t pick_int_width(const std::vector<int64_t>& q) {
  int64_t lo = 0, hi = 0;
  for (int64_t v : q) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo >= INT8_MIN && hi <= INT8_MAX) return 1;
  if (lo >= INT16_MIN && hi <= INT16_MAX) return 2;
  if (lo >= INT32_MIN && hi <= INT32_MAX) return 4;
  return 8;
}

void pack_ints(std::string& out, const std::vector<int64_t>& q, uint8_t width) {
  for (int64_t v : q) {
    uint64_t u = static_cast<uint64_t>(v);
    for (unsigned b = 0; b < width; ++b) out += char((u >> (8 * b)) & 0xff);
  }
}

std::vector<int64_t> unpack_ints(std::string_view in, uint64_t count, uint8_t width) {
  if (in.size() < count * width) raise(errc::codec, "quantized payload truncated");
  std::vector<int64_t> q(count);
  for (uint64_t i = 0; i < count; ++i) {
    uint64_t u = 0;
    const char* p = in.data() + i * width;
    for (unsigned b = 0; b < width; ++b) u |= uint64_t(uint8_t(p[b])) << (8 * b);
    // sign-extend from width bytes
    if (width < 8) {
      uint64_t sign_bit = 1ull << (8 * width - 1);
      if (u & sign_bit) u |= ~((sign_bit << 1) - 1);
    }
    q[i] = static_cast<int64_t>(u);
  }
  return q;
}

}  // namespace

// ---- Pure ops ----

Tensor quantize_delta(const Tensor& p1, const Tensor& p2, double epsilon) {
  require_float_pair(p1, p2);
  require_epsilon(epsilon);
  double step = kernels::quant_step(epsilon);
  auto a = to_f32_buffer(p1), b = to_f32_buffer(p2);
  Tensor q = Tensor::zeros(dtype::i64, p1.shape);
  kernels::quantize(a.data(), b.data(), a.size(), step,
                    reinterpret_cast<int64_t*>(q.data.data()));
  return q;
}

Tensor dequantize_delta(const Tensor& q, const Tensor& p1, double epsilon) {
  require_epsilon(epsilon);
  if (q.dt != dtype::i64 || q.shape != p1.shape) {
    raise(errc::shape_mismatch, "quantized tensor must be i64 with the parent's shape");
  }
  if (!dtype_is_float(p1.dt)) raise(errc::codec, "dequantize requires a float parent");
  double step = kernels::quant_step(epsilon);
  auto a = to_f32_buffer(p1);
  std::vector<float> recon(a.size());
  kernels::dequantize(a.data(), reinterpret_cast<const int64_t*>(q.data.data()), a.size(), step,
                      recon.data());
  Tensor out = Tensor::zeros(p1.dt, p1.shape);
  for (uint64_t i = 0; i < recon.size(); ++i) out.set_f32(i, recon[i]);
  return out;
}

// ---- Lossless backends ----

std::string lossless_compress(const std::string& backend, std::string_view raw) {
  uint8_t code = backend_code(backend);
  if (code == 1) {
    std::string out;
    size_t i = 0;
    while (i < raw.size()) {
      char v = raw[i];
      size_t run = 1;
      while (i + run < raw.size() && raw[i + run] == v && run < 0xffffffffull) ++run;
      put_u32le(out, static_cast<uint32_t>(run));
      out += v;
      i += run;
    }
    return out;
  }
  uLongf dest_len = compressBound(static_cast<uLong>(raw.size()));
  std::string out;
  put_u64le(out, raw.size());
  size_t head = out.size();
  out.resize(head + dest_len);
  int rc = compress2(reinterpret_cast<Bytef*>(out.data() + head), &dest_len,
                     reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()), 6);
  if (rc != Z_OK) raise(errc::codec, "deflate failed");
  out.resize(head + dest_len);
  return out;
}

std::string lossless_decompress(const std::string& backend, std::string_view compressed) {
  uint8_t code = backend_code(backend);
  if (code == 1) {
    std::string out;
    size_t i = 0;
    while (i < compressed.size()) {
      if (i + 5 > compressed.size()) raise(errc::codec, "rle payload truncated");
      uint32_t run = get_u32le(compressed.data() + i);
      char v = compressed[i + 4];
      if (run == 0) raise(errc::codec, "rle zero-length run");
      out.append(run, v);
      i += 5;
    }
    return out;
  }
  if (compressed.size() < 8) raise(errc::codec, "deflate payload truncated");
  uint64_t raw_len = get_u64le(compressed.data());
  // Deflate cannot expand beyond ~1032:1, so a size prefix past that bound
  // is corrupt; refuse before trusting it for allocation.
  if (raw_len > (compressed.size() - 8) * 1032 + 64) {
    raise(errc::codec, "deflate size prefix implausible");
  }
  std::string out(raw_len, '\0');
  uLongf dest_len = static_cast<uLongf>(raw_len);
  int rc = uncompress(reinterpret_cast<Bytef*>(out.data()), &dest_len,
                      reinterpret_cast<const Bytef*>(compressed.data() + 8),
                      static_cast<uLong>(compressed.size() - 8));
  if (rc != Z_OK || dest_len != raw_len) raise(errc::codec, "inflate failed");
  return out;
}

// ---- Record framing ----

std::string encode_delta_record(const DeltaRecord& r) {
  if (!is_content_key(r.parent_key)) raise(errc::codec, "record parent key malformed");
  std::string out;
  out += "MGDR";
  put_u16le(out, kDeltaRecordVersion);
  out += char(backend_code(r.backend));
  out += char(static_cast<uint8_t>(r.dt));
  out += char(static_cast<uint8_t>(r.shape.size()));
  uint64_t eps_bits;
  std::memcpy(&eps_bits, &r.epsilon, 8);
  put_u64le(out, eps_bits);
  out += hex_to_digest(r.parent_key);
  for (uint64_t d : r.shape) put_u64le(out, d);
  put_u64le(out, r.payload.size());
  out += r.payload;
  return out;
}

DeltaRecord decode_delta_record(std::string_view bytes) {
  if (bytes.size() < 9) raise(errc::parse, "delta record shorter than header");
  if (bytes.substr(0, 4) != "MGDR") raise(errc::parse, "bad delta record magic");
  uint16_t ver = get_u16le(bytes.data() + 4);
  if (ver != kDeltaRecordVersion) {
    raise(errc::format_version, "delta record version " + std::to_string(ver));
  }
  DeltaRecord r;
  r.backend = backend_name(uint8_t(bytes[6]));
  auto dt = dtype_from_code(uint8_t(bytes[7]));
  if (!dt) raise(errc::parse, "unknown dtype in delta record");
  r.dt = *dt;
  uint8_t rank = uint8_t(bytes[8]);
  size_t need = 9 + 8 + 32 + size_t(rank) * 8 + 8;
  if (bytes.size() < need) raise(errc::parse, "delta record truncated");
  uint64_t eps_bits = get_u64le(bytes.data() + 9);
  std::memcpy(&r.epsilon, &eps_bits, 8);
  r.parent_key = digest_to_hex(bytes.data() + 17);
  size_t off = 49;
  r.shape.resize(rank);
  for (size_t i = 0; i < rank; ++i, off += 8) r.shape[i] = get_u64le(bytes.data() + off);
  uint64_t plen = get_u64le(bytes.data() + off);
  off += 8;
  if (bytes.size() != off + plen) raise(errc::parse, "delta record payload length mismatch");
  r.payload.assign(bytes.begin() + off, bytes.end());
  return r;
}

// ---- Param delta encode/decode ----

EncodedParamDelta encode_param_delta(const Tensor& parent, const std::string& parent_key,
                                     const Tensor& child, double epsilon,
                                     const std::string& backend) {
  require_float_pair(parent, child);
  require_epsilon(epsilon);
  double step = kernels::quant_step(epsilon);
  double bound = step / 2.0;
  size_t esize = dtype_size(child.dt);

  auto a = to_f32_buffer(parent);
  auto b = to_f32_buffer(child);
  size_t n = a.size();

  std::vector<int64_t> q(n);
  kernels::quantize(a.data(), b.data(), n, step, q.data());
  std::vector<float> recon(n);
  kernels::dequantize(a.data(), q.data(), n, step, recon.data());

  // the reconstruction the decoder will produce, in the child's dtype
  Tensor approx = Tensor::zeros(child.dt, child.shape);
  for (size_t i = 0; i < n; ++i) approx.set_f32(i, recon[i]);
  auto approx_f32 = to_f32_buffer(approx);

  std::vector<uint64_t> outliers =
      kernels::bound_violations(b.data(), approx_f32.data(), n, bound);
  for (uint64_t i : outliers) q[i] = 0;

  // outliers are patched with the child's exact bytes
  for (uint64_t i : outliers) {
    std::memcpy(approx.data.data() + i * esize, child.data.data() + i * esize, esize);
  }

  uint8_t width = pick_int_width(q);
  std::string logical;
  logical += char(width);
  put_u64le(logical, n);
  put_u64le(logical, outliers.size());
  pack_ints(logical, q, width);
  for (uint64_t i : outliers) put_u64le(logical, i);
  for (uint64_t i : outliers) logical.append(child.data, i * esize, esize);

  EncodedParamDelta out;
  out.record.parent_key = parent_key;
  out.record.epsilon = epsilon;
  out.record.backend = backend;
  out.record.dt = child.dt;
  out.record.shape = child.shape;
  out.record.payload = lossless_compress(backend, logical);
  out.approx = std::move(approx);
  out.key = content_key(out.approx);
  return out;
}

Tensor decode_param_delta(const DeltaRecord& r, const Tensor& parent) {
  require_epsilon(r.epsilon);
  if (parent.dt != r.dt || parent.shape != r.shape) {
    raise(errc::codec, "delta record does not match its parent tensor");
  }
  std::string logical = lossless_decompress(r.backend, r.payload);
  if (logical.size() < 17) raise(errc::codec, "quantized payload shorter than header");
  uint8_t width = uint8_t(logical[0]);
  if (width != 1 && width != 2 && width != 4 && width != 8) {
    raise(errc::codec, "bad quantized int width");
  }
  uint64_t count = get_u64le(logical.data() + 1);
  uint64_t n_out = get_u64le(logical.data() + 9);
  size_t esize = dtype_size(r.dt);

  Tensor probe{r.dt, r.shape, {}};
  uint64_t expect = probe.element_count();
  if (count != expect) raise(errc::codec, "quantized element count mismatch");
  size_t ints_off = 17;
  size_t idx_off = ints_off + count * width;
  size_t val_off = idx_off + n_out * 8;
  if (logical.size() != val_off + n_out * esize) raise(errc::codec, "quantized payload size mismatch");

  auto q = unpack_ints(std::string_view(logical).substr(ints_off), count, width);
  double step = kernels::quant_step(r.epsilon);
  auto a = to_f32_buffer(parent);
  std::vector<float> recon(count);
  kernels::dequantize(a.data(), q.data(), count, step, recon.data());

  Tensor out = Tensor::zeros(r.dt, r.shape);
  for (uint64_t i = 0; i < count; ++i) out.set_f32(i, recon[i]);
  for (uint64_t k = 0; k < n_out; ++k) {
    uint64_t i = get_u64le(logical.data() + idx_off + k * 8);
    if (i >= count) raise(errc::codec, "outlier index out of range");
    std::memcpy(out.data.data() + i * esize, logical.data() + val_off + k * esize, esize);
  }
  return out;
}

// ---- Delta store ----

void DeltaStore::put(const std::string& key, const DeltaRecord& r) {
  if (!is_content_key(key)) raise(errc::parse, "malformed delta key");
  files_.put_bytes(key, encode_delta_record(r));
}

DeltaRecord DeltaStore::get(const std::string& key) const {
  return decode_delta_record(files_.get_bytes(key));
}

uint64_t DeltaStore::record_bytes(const std::string& key) const {
  std::error_code ec;
  auto n = fs::file_size(files_.path_for(key), ec);
  if (ec) raise(errc::missing_object, key);
  return n;
}

// ---- Chain resolution ----

Tensor ParamResolver::resolve_key(const std::string& key) const { return resolve_at_depth(key, 0); }

Tensor ParamResolver::resolve_at_depth(const std::string& key, int depth) const {
  if (objects_.contains(key)) return objects_.get(key);
  if (!deltas_.contains(key)) raise(errc::missing_object, key);
  if (depth + 1 > max_depth_) {
    raise(errc::chain_depth, "delta chain exceeds depth " + std::to_string(max_depth_));
  }
  DeltaRecord r = deltas_.get(key);
  Tensor parent = resolve_at_depth(r.parent_key, depth + 1);
  Tensor t = decode_param_delta(r, parent);
  if (content_key(t) != key) {
    raise(errc::corrupt_object, "delta reconstruction does not re-hash to " + key);
  }
  return t;
}

Tensor ParamResolver::resolve(const ParamRef& ref) const {
  switch (ref.kind) {
    case ParamRef::kind_t::inline_: {
      Tensor t{ref.dt, ref.shape, ref.payload};
      t.validate();
      return t;
    }
    case ParamRef::kind_t::stored:
    case ParamRef::kind_t::delta: {
      Tensor t = resolve_key(ref.key);
      if (t.dt != ref.dt || t.shape != ref.shape) {
        raise(errc::integrity, "resolved tensor disagrees with param ref " + ref.key);
      }
      return t;
    }
  }
  raise(errc::integrity, "bad param ref kind");
}

int ParamResolver::chain_depth(const std::string& key) const {
  int depth = 0;
  std::string cur = key;
  while (!objects_.contains(cur)) {
    if (!deltas_.contains(cur)) raise(errc::missing_object, cur);
    if (++depth > max_depth_) {
      raise(errc::chain_depth, "delta chain exceeds depth " + std::to_string(max_depth_));
    }
    cur = deltas_.get(cur).parent_key;
  }
  return depth;
}

// ---- Parameter mapping ----

std::vector<ParamEntry> param_sequence(const ModelGraph& m) {
  std::vector<ParamEntry> seq;
  for (size_t idx : m.topo_order()) {
    const LayerNode& l = m.layers[idx];
    for (const auto& [name, ref] : l.params) {
      seq.push_back(ParamEntry{l.layer_id, name, &ref});
    }
  }
  return seq;
}

std::vector<std::pair<size_t, size_t>> lcs_param_mapping(const std::vector<ParamEntry>& a,
                                                         const std::vector<ParamEntry>& b) {
  size_t n = a.size(), m = b.size();
  auto eq = [&](size_t i, size_t j) {
    return a[i].ref->dt == b[j].ref->dt && a[i].ref->shape == b[j].ref->shape;
  };
  std::vector<std::vector<uint32_t>> dp(n + 1, std::vector<uint32_t>(m + 1, 0));
  for (size_t i = n; i-- > 0;) {
    for (size_t j = m; j-- > 0;) {
      dp[i][j] = eq(i, j) ? dp[i + 1][j + 1] + 1
                          : std::max(dp[i + 1][j], dp[i][j + 1]);
    }
  }
  std::vector<std::pair<size_t, size_t>> pairs;
  size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (eq(i, j) && dp[i][j] == dp[i + 1][j + 1] + 1) {
      pairs.emplace_back(i, j);
      ++i, ++j;
    } else if (dp[i + 1][j] >= dp[i][j + 1]) {
      ++i;
    } else {
      ++j;
    }
  }
  return pairs;
}

// ---- Compression decision procedure ----

CompressionOutcome delta_compression(const ModelGraph& m1, const ModelGraph& m2,
                                     const CodecConfig& cfg, const ObjectStore& objects,
                                     DeltaStore& deltas, const MetricsFn& metrics) {
  backend_code(cfg.backend);
  require_epsilon(cfg.epsilon);
  ParamResolver resolver(objects, deltas, cfg.max_chain_depth);

  auto seq1 = param_sequence(m1);
  auto seq2 = param_sequence(m2);
  auto mapping = lcs_param_mapping(seq1, seq2);

  CompressionOutcome out;
  out.m2_out = m2;

  struct Staged {
    std::string path;
    std::string key;
    DeltaRecord record;
    ParamRef* target;
  };
  std::vector<Staged> staged;

  for (auto [i, j] : mapping) {
    const ParamEntry& pe1 = seq1[i];
    const ParamEntry& pe2 = seq2[j];
    if (!dtype_is_float(pe1.ref->dt)) continue;
    if (pe1.ref->kind == ParamRef::kind_t::inline_) {
      raise(errc::codec, "parent param " + pe1.path() + " is not persisted");
    }
    if (resolver.chain_depth(pe1.ref->key) + 1 > cfg.max_chain_depth) {
      raise(errc::chain_depth, "compressing " + pe2.path() + " would exceed max chain depth");
    }
    Tensor parent = resolver.resolve(*pe1.ref);
    Tensor child = resolver.resolve(*pe2.ref);
    EncodedParamDelta enc =
        encode_param_delta(parent, pe1.ref->key, child, cfg.epsilon, cfg.backend);
    out.raw_bytes += child.byte_size();
    out.compressed_bytes += encode_delta_record(enc.record).size();

    LayerNode* layer = out.m2_out.find_layer(pe2.layer_id);
    ParamRef& target = layer->params.at(pe2.param_name);
    staged.push_back(Staged{pe2.path(), enc.key, std::move(enc.record), &target});
  }

  if (staged.empty()) {
    out.reason = "no_mapping";
    return out;
  }
  out.storage_saving = double(out.raw_bytes) / double(out.compressed_bytes);
  if (out.storage_saving < 1.0) {
    out.reason = "storage_saving";
    out.m2_out = m2;
    return out;
  }

  // stage records so metric hooks can resolve the candidate's params
  std::vector<std::string> newly_added;
  for (const auto& s : staged) {
    if (!deltas.contains(s.key)) {
      deltas.put(s.key, s.record);
      newly_added.push_back(s.key);
    }
    s.target->kind = ParamRef::kind_t::delta;
    s.target->key = s.key;
    s.target->payload.clear();
    out.records.emplace_back(s.path, s.key);
  }

  if (metrics) {
    std::vector<double> before = metrics(m2);
    if (!before.empty()) {
      std::vector<double> after = metrics(out.m2_out);
      size_t k = std::min(before.size(), after.size());
      for (size_t idx = 0; idx < k; ++idx) {
        if (before[idx] - after[idx] > cfg.t_thr) {
          for (const auto& key : newly_added) deltas.remove(key);
          out.reason = "metric_drop";
          out.records.clear();
          out.m2_out = m2;
          return out;
        }
      }
    }
  }

  out.accepted = true;
  return out;
}

}  // namespace modelvc
