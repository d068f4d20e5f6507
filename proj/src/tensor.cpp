#include "modelvc/tensor.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "modelvc/errors.hpp"
#include "modelvc/hash.hpp"

namespace modelvc {

size_t dtype_size(dtype dt) {
  switch (dt) {
    case dtype::f32: return 4;
    case dtype::f16: return 2;
    case dtype::i64: return 8;
    case dtype::i32: return 4;
    case dtype::i8: return 1;
    case dtype::u8: return 1;
  }
  raise(errc::parse, "unknown dtype code");
}

const char* dtype_name(dtype dt) {
  switch (dt) {
    case dtype::f32: return "f32";
    case dtype::f16: return "f16";
    case dtype::i64: return "i64";
    case dtype::i32: return "i32";
    case dtype::i8: return "i8";
    case dtype::u8: return "u8";
  }
  return "?";
}

std::optional<dtype> dtype_from_name(std::string_view name) {
  if (name == "f32") return dtype::f32;
  if (name == "f16") return dtype::f16;
  if (name == "i64") return dtype::i64;
  if (name == "i32") return dtype::i32;
  if (name == "i8") return dtype::i8;
  if (name == "u8") return dtype::u8;
  return std::nullopt;
}

std::optional<dtype> dtype_from_code(uint8_t code) {
  if (code > 5) return std::nullopt;
  return static_cast<dtype>(code);
}

bool dtype_is_float(dtype dt) { return dt == dtype::f32 || dt == dtype::f16; }

uint64_t Tensor::element_count() const {
  uint64_t n = 1;
  for (uint64_t d : shape) {
    if (d != 0 && n > std::numeric_limits<uint64_t>::max() / d) {
      raise(errc::shape_mismatch, "dim product overflows");
    }
    n *= d;
  }
  return n;
}

void Tensor::validate() const {
  if (shape.size() > 255) raise(errc::shape_mismatch, "rank exceeds 255");
  uint64_t want = element_count() * dtype_size(dt);
  if (want != data.size()) {
    raise(errc::shape_mismatch, "payload is " + std::to_string(data.size()) +
                                    " bytes, dims require " + std::to_string(want));
  }
}

float Tensor::f32_at(uint64_t i) const {
  switch (dt) {
    case dtype::f32: {
      float v;
      std::memcpy(&v, data.data() + i * 4, 4);
      return v;
    }
    case dtype::f16:
      return half_to_float(get_u16le(data.data() + i * 2));
    case dtype::i64: {
      int64_t v;
      std::memcpy(&v, data.data() + i * 8, 8);
      return static_cast<float>(v);
    }
    case dtype::i32: {
      int32_t v;
      std::memcpy(&v, data.data() + i * 4, 4);
      return static_cast<float>(v);
    }
    case dtype::i8:
      return static_cast<float>(static_cast<int8_t>(data[i]));
    case dtype::u8:
      return static_cast<float>(static_cast<uint8_t>(data[i]));
  }
  return 0.0f;
}

void Tensor::set_f32(uint64_t i, float v) {
  switch (dt) {
    case dtype::f32:
      std::memcpy(data.data() + i * 4, &v, 4);
      return;
    case dtype::f16: {
      uint16_t h = float_to_half(v);
      data[i * 2] = char(h & 0xff);
      data[i * 2 + 1] = char(h >> 8);
      return;
    }
    default:
      raise(errc::codec, "set_f32 on integer tensor");
  }
}

Tensor Tensor::zeros(dtype dt, std::vector<uint64_t> shape) {
  Tensor t;
  t.dt = dt;
  t.shape = std::move(shape);
  t.data.assign(t.element_count() * dtype_size(dt), '\0');
  return t;
}

Tensor Tensor::from_f32(std::vector<uint64_t> shape, const std::vector<float>& values) {
  Tensor t = zeros(dtype::f32, std::move(shape));
  if (t.element_count() != values.size()) raise(errc::shape_mismatch, "value count != dims");
  std::memcpy(t.data.data(), values.data(), values.size() * 4);
  return t;
}

bool operator==(const Tensor& a, const Tensor& b) {
  return a.dt == b.dt && a.shape == b.shape && a.data == b.data;
}

std::string content_key(const Tensor& t) {
  t.validate();
  sha256_stream h;
  uint8_t head[2] = {static_cast<uint8_t>(t.dt), static_cast<uint8_t>(t.shape.size())};
  h.update(head, 2);
  for (uint64_t d : t.shape) {
    std::string enc;
    put_u64le(enc, d);
    h.update(enc);
  }
  h.update(t.data);
  return h.hex_digest();
}

std::string encode_tensor_blob(const Tensor& t) {
  t.validate();
  std::string out;
  out.reserve(8 + t.shape.size() * 8 + t.data.size());
  out += "MGTN";
  put_u16le(out, kTensorBlobVersion);
  out += char(static_cast<uint8_t>(t.dt));
  out += char(static_cast<uint8_t>(t.shape.size()));
  for (uint64_t d : t.shape) put_u64le(out, d);
  out += t.data;
  return out;
}

Tensor decode_tensor_blob(std::string_view blob) {
  if (blob.size() < 8) raise(errc::parse, "blob shorter than header");
  if (blob.substr(0, 4) != "MGTN") raise(errc::parse, "bad blob magic");
  uint16_t ver = get_u16le(blob.data() + 4);
  if (ver != kTensorBlobVersion) {
    raise(errc::format_version, "blob format version " + std::to_string(ver));
  }
  auto dt = dtype_from_code(static_cast<uint8_t>(blob[6]));
  if (!dt) raise(errc::parse, "unknown dtype code in blob");
  uint8_t rank = static_cast<uint8_t>(blob[7]);
  size_t need = 8 + size_t(rank) * 8;
  if (blob.size() < need) raise(errc::parse, "blob truncated in dims");
  Tensor t;
  t.dt = *dt;
  t.shape.resize(rank);
  for (size_t i = 0; i < rank; ++i) t.shape[i] = get_u64le(blob.data() + 8 + i * 8);
  t.data.assign(blob.begin() + need, blob.end());
  t.validate();
  return t;
}

// ---- f16 conversion (IEEE binary16, round-to-nearest-even) ----

float half_to_float(uint16_t h) {
  uint32_t sign = uint32_t(h >> 15) << 31;
  uint32_t exp = (h >> 10) & 0x1f;
  uint32_t mant = h & 0x3ff;
  uint32_t bits;
  if (exp == 0) {
    if (mant == 0) {
      bits = sign;
    } else {
      // subnormal: renormalize
      int shift = 0;
      while ((mant & 0x400) == 0) {
        mant <<= 1;
        ++shift;
      }
      mant &= 0x3ff;
      bits = sign | ((127 - 15 - shift + 1) << 23) | (mant << 13);
    }
  } else if (exp == 0x1f) {
    bits = sign | 0x7f800000 | (mant << 13);
  } else {
    bits = sign | ((exp - 15 + 127) << 23) | (mant << 13);
  }
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

uint16_t float_to_half(float f) {
  uint32_t bits;
  std::memcpy(&bits, &f, 4);
  uint16_t sign = uint16_t(bits >> 31) << 15;
  int32_t exp = int32_t((bits >> 23) & 0xff) - 127 + 15;
  uint32_t mant = bits & 0x7fffff;
  if (((bits >> 23) & 0xff) == 0xff) {
    return sign | 0x7c00 | (mant ? 0x200 : 0);  // inf/nan
  }
  if (exp >= 0x1f) return sign | 0x7c00;  // overflow -> inf
  if (exp <= 0) {
    if (exp < -10) return sign;  // underflow -> signed zero
    // subnormal: shift mantissa (with implicit bit) right
    mant |= 0x800000;
    uint32_t shift = uint32_t(14 - exp);
    uint32_t half = mant >> shift;
    uint32_t rem = mant & ((1u << shift) - 1);
    uint32_t mid = 1u << (shift - 1);
    if (rem > mid || (rem == mid && (half & 1))) ++half;
    return sign | uint16_t(half);
  }
  uint16_t out = sign | uint16_t(exp << 10) | uint16_t(mant >> 13);
  uint32_t rem = mant & 0x1fff;
  if (rem > 0x1000 || (rem == 0x1000 && (out & 1))) ++out;  // may carry into exponent: fine
  return out;
}

void put_u16le(std::string& out, uint16_t v) {
  out += char(v & 0xff);
  out += char(v >> 8);
}
void put_u32le(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out += char((v >> (8 * i)) & 0xff);
}
void put_u64le(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out += char((v >> (8 * i)) & 0xff);
}
uint16_t get_u16le(const char* p) {
  return uint16_t(uint8_t(p[0])) | uint16_t(uint8_t(p[1])) << 8;
}
uint32_t get_u32le(const char* p) {
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | uint8_t(p[i]);
  return v;
}
uint64_t get_u64le(const char* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | uint8_t(p[i]);
  return v;
}

}  // namespace modelvc
