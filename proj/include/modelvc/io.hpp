#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace modelvc::io {

namespace fs = std::filesystem;

// ---- Durable writes ----
//
// All repository mutations go through atomic_write_file: bytes are staged in
// a temp file in the target directory, then renamed over the target.  A crash
// at any point leaves either the old file or the new file, never a torn one.

void atomic_write_file(const fs::path& target, std::string_view bytes);

std::string read_file(const fs::path& p);                        // missing_object on absence
std::optional<std::string> read_file_if_exists(const fs::path& p);
bool remove_file_if_exists(const fs::path& p);
void ensure_dir(const fs::path& p);

// ---- Crash-injection failpoint ----
//
// Durability tests arm a countdown; the write layer checks it at every
// syscall boundary (before staging, between staging and rename, before
// unlink) and throws errc::crash_injected when it reaches zero.  Disarmed
// in normal operation.

void arm_write_failpoint(int64_t checkpoints_until_crash);
void disarm_write_failpoint();
int64_t write_checkpoints_passed();   // total boundaries crossed since process start
void check_write_failpoint();

// ---- Small codecs used by manifests ----

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);   // errc::parse on bad input

}  // namespace modelvc::io
