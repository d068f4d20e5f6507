#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace modelvc {

// ---- Content keys ----
//
// A content key is the lowercase-hex SHA-256 of a canonical encoding; the
// same 64-hex key space addresses raw blobs and delta records.

bool is_content_key(std::string_view s);

class sha256_stream {
 public:
  sha256_stream();
  ~sha256_stream();
  sha256_stream(const sha256_stream&) = delete;
  sha256_stream& operator=(const sha256_stream&) = delete;

  void update(const void* data, size_t len);
  void update(std::string_view bytes) { update(bytes.data(), bytes.size()); }
  std::string hex_digest();   // finalizes; the stream must not be reused

 private:
  struct impl;
  std::unique_ptr<impl> impl_;
};

std::string sha256_hex(std::string_view bytes);

}  // namespace modelvc
