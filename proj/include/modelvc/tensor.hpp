#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace modelvc {

// ---- Dtypes ----
//
// The numeric code is part of the on-disk format and of the content-key
// encoding; it must never change for an existing dtype.

enum class dtype : uint8_t {
  f32 = 0,
  f16 = 1,
  i64 = 2,
  i32 = 3,
  i8 = 4,
  u8 = 5,
};

size_t dtype_size(dtype dt);
const char* dtype_name(dtype dt);
std::optional<dtype> dtype_from_name(std::string_view name);
std::optional<dtype> dtype_from_code(uint8_t code);
bool dtype_is_float(dtype dt);

// ---- Tensor ----
//
// Payload is raw little-endian row-major bytes; math on f16 goes through
// f32 conversion.

struct Tensor {
  dtype dt = dtype::f32;
  std::vector<uint64_t> shape;
  std::string data;

  uint64_t element_count() const;
  uint64_t byte_size() const { return data.size(); }

  // size/shape coherence; throws shape_mismatch
  void validate() const;

  float f32_at(uint64_t i) const;
  void set_f32(uint64_t i, float v);

  static Tensor zeros(dtype dt, std::vector<uint64_t> shape);
  static Tensor from_f32(std::vector<uint64_t> shape, const std::vector<float>& values);
};

bool operator==(const Tensor& a, const Tensor& b);

// Content key: SHA-256 over [dtype code byte][rank byte][dims as u64 LE][payload].
// Deliberately excludes the blob container framing, so the key is a property
// of the tensor value alone.
std::string content_key(const Tensor& t);

// ---- Blob container ----
//
// magic "MGTN" | format version u16 LE | dtype code u8 | rank u8 |
// rank x u64 LE dims | payload.

inline constexpr uint16_t kTensorBlobVersion = 1;

std::string encode_tensor_blob(const Tensor& t);
Tensor decode_tensor_blob(std::string_view blob);

// ---- f16 <-> f32 ----

float half_to_float(uint16_t h);
uint16_t float_to_half(float f);

// little-endian scalar helpers shared by the binary formats
void put_u16le(std::string& out, uint16_t v);
void put_u32le(std::string& out, uint32_t v);
void put_u64le(std::string& out, uint64_t v);
uint16_t get_u16le(const char* p);
uint32_t get_u32le(const char* p);
uint64_t get_u64le(const char* p);

}  // namespace modelvc
