#include "modelvc/io.hpp"

#include <atomic>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <system_error>

#include "modelvc/errors.hpp"

namespace modelvc::io {

namespace {

std::atomic<int64_t> g_fail_after{-1};     // -1 = disarmed
std::atomic<int64_t> g_checkpoints{0};

}  // namespace

void arm_write_failpoint(int64_t n) { g_fail_after.store(n); }
void disarm_write_failpoint() { g_fail_after.store(-1); }
int64_t write_checkpoints_passed() { return g_checkpoints.load(); }

void check_write_failpoint() {
  g_checkpoints.fetch_add(1);
  int64_t v = g_fail_after.load();
  if (v < 0) return;
  if (g_fail_after.fetch_sub(1) <= 0) {
    raise(errc::crash_injected, "simulated crash at write boundary");
  }
}

void atomic_write_file(const fs::path& target, std::string_view bytes) {
  check_write_failpoint();
  fs::path dir = target.parent_path();
  if (!dir.empty()) ensure_dir(dir);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(errc::store_write, "cannot open " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      raise(errc::store_write, "short write to " + tmp.string());
    }
  }
  check_write_failpoint();
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    raise(errc::store_write, "rename to " + target.string() + " failed: " + ec.message());
  }
}

std::string read_file(const fs::path& p) {
  auto r = read_file_if_exists(p);
  if (!r) raise(errc::missing_object, "no such file: " + p.string());
  return std::move(*r);
}

std::optional<std::string> read_file_if_exists(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::string bytes;
  in.seekg(0, std::ios::end);
  auto n = in.tellg();
  if (n < 0) return std::nullopt;
  bytes.resize(static_cast<size_t>(n));
  in.seekg(0);
  in.read(bytes.data(), n);
  if (!in) raise(errc::store_write, "read failed: " + p.string());
  return bytes;
}

bool remove_file_if_exists(const fs::path& p) {
  check_write_failpoint();
  std::error_code ec;
  bool removed = fs::remove(p, ec);
  if (ec) raise(errc::store_write, "remove failed: " + p.string());
  return removed;
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec && !fs::is_directory(p)) {
    raise(errc::store_write, "cannot create directory " + p.string());
  }
}

// ---- base64 (RFC 4648, with padding) ----

namespace {
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int8_t b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return static_cast<int8_t>(c - 'A');
  if (c >= 'a' && c <= 'z') return static_cast<int8_t>(c - 'a' + 26);
  if (c >= '0' && c <= '9') return static_cast<int8_t>(c - '0' + 52);
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}
}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 3 <= bytes.size()) {
    uint32_t v = (uint8_t(bytes[i]) << 16) | (uint8_t(bytes[i + 1]) << 8) | uint8_t(bytes[i + 2]);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
    i += 3;
  }
  size_t rem = bytes.size() - i;
  if (rem == 1) {
    uint32_t v = uint8_t(bytes[i]) << 16;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += "==";
  } else if (rem == 2) {
    uint32_t v = (uint8_t(bytes[i]) << 16) | (uint8_t(bytes[i + 1]) << 8);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) raise(errc::parse, "base64 length not a multiple of 4");
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (size_t i = 0; i < text.size(); i += 4) {
    int pad = 0;
    uint32_t v = 0;
    for (size_t k = 0; k < 4; ++k) {
      char c = text[i + k];
      if (c == '=') {
        if (i + 4 != text.size() || k < 2) raise(errc::parse, "misplaced base64 padding");
        ++pad;
        v <<= 6;
        continue;
      }
      if (pad > 0) raise(errc::parse, "data after base64 padding");
      int8_t d = b64_value(c);
      if (d < 0) raise(errc::parse, "invalid base64 character");
      v = (v << 6) | uint32_t(d);
    }
    out += char((v >> 16) & 0xff);
    if (pad < 2) out += char((v >> 8) & 0xff);
    if (pad < 1) out += char(v & 0xff);
  }
  return out;
}

}  // namespace modelvc::io
