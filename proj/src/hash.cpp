#include "modelvc/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace modelvc {

bool is_content_key(std::string_view s) {
  if (s.size() != 64) return false;
  for (char c : s) {
    bool hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    if (!hex) return false;
  }
  return true;
}

struct sha256_stream::impl {
  EVP_MD_CTX* ctx = nullptr;
};

sha256_stream::sha256_stream() : impl_(std::make_unique<impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  if (!impl_->ctx || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 init failed");
  }
}

sha256_stream::~sha256_stream() {
  if (impl_ && impl_->ctx) EVP_MD_CTX_free(impl_->ctx);
}

void sha256_stream::update(const void* data, size_t len) {
  if (EVP_DigestUpdate(impl_->ctx, data, len) != 1) {
    throw std::runtime_error("sha256 update failed");
  }
}

std::string sha256_stream::hex_digest() {
  std::array<unsigned char, 32> digest{};
  unsigned int n = 0;
  if (EVP_DigestFinal_ex(impl_->ctx, digest.data(), &n) != 1 || n != 32) {
    throw std::runtime_error("sha256 final failed");
  }
  static const char* hexd = "0123456789abcdef";
  std::string out(64, '0');
  for (size_t i = 0; i < 32; ++i) {
    out[2 * i] = hexd[digest[i] >> 4];
    out[2 * i + 1] = hexd[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  sha256_stream s;
  s.update(bytes);
  return s.hex_digest();
}

}  // namespace modelvc
