#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "modelvc/tensor.hpp"

namespace modelvc {

namespace fs = std::filesystem;

// ---- Sharded content-addressed file layout ----
//
// A key "abcd..." lives at <root>/ab/cd...; writes are staged then renamed,
// so a reader never sees a torn file.

class ShardedFileStore {
 public:
  explicit ShardedFileStore(fs::path root) : root_(std::move(root)) {}

  const fs::path& root() const { return root_; }
  fs::path path_for(const std::string& key) const;
  bool contains(const std::string& key) const;

  // Idempotent: an existing key is left untouched.
  void put_bytes(const std::string& key, std::string_view bytes);
  std::string get_bytes(const std::string& key) const;
  std::optional<std::string> get_bytes_if_exists(const std::string& key) const;
  bool remove(const std::string& key);
  std::vector<std::string> list_keys() const;   // sorted

 private:
  fs::path root_;
};

// ---- Object store ----
//
// Tensor blobs addressed by their content key.  get() re-hashes and refuses
// to return bytes that no longer match the key.

class ObjectStore {
 public:
  explicit ObjectStore(fs::path root) : files_(std::move(root)) {}

  std::string put(const Tensor& t);
  Tensor get(const std::string& key) const;
  bool contains(const std::string& key) const { return files_.contains(key); }
  bool remove(const std::string& key) { return files_.remove(key); }
  std::vector<std::string> list_keys() const { return files_.list_keys(); }
  uint64_t total_bytes() const;

  ShardedFileStore& files() { return files_; }
  const ShardedFileStore& files() const { return files_; }

 private:
  ShardedFileStore files_;
};

}  // namespace modelvc
