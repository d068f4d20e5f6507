#include "modelvc/store.hpp"

#include <algorithm>

#include "modelvc/errors.hpp"
#include "modelvc/hash.hpp"
#include "modelvc/io.hpp"

namespace modelvc {

fs::path ShardedFileStore::path_for(const std::string& key) const {
  if (!is_content_key(key)) raise(errc::parse, "malformed content key: " + key);
  return root_ / key.substr(0, 2) / key.substr(2);
}

bool ShardedFileStore::contains(const std::string& key) const {
  std::error_code ec;
  return fs::is_regular_file(path_for(key), ec);
}

void ShardedFileStore::put_bytes(const std::string& key, std::string_view bytes) {
  fs::path p = path_for(key);
  if (fs::exists(p)) return;
  io::atomic_write_file(p, bytes);
}

std::string ShardedFileStore::get_bytes(const std::string& key) const {
  auto r = get_bytes_if_exists(key);
  if (!r) raise(errc::missing_object, key);
  return std::move(*r);
}

std::optional<std::string> ShardedFileStore::get_bytes_if_exists(const std::string& key) const {
  return io::read_file_if_exists(path_for(key));
}

bool ShardedFileStore::remove(const std::string& key) {
  return io::remove_file_if_exists(path_for(key));
}

std::vector<std::string> ShardedFileStore::list_keys() const {
  std::vector<std::string> keys;
  std::error_code ec;
  if (!fs::is_directory(root_, ec)) return keys;
  for (const auto& shard : fs::directory_iterator(root_)) {
    if (!shard.is_directory()) continue;
    std::string prefix = shard.path().filename().string();
    if (prefix.size() != 2) continue;
    for (const auto& f : fs::directory_iterator(shard.path())) {
      if (!f.is_regular_file()) continue;
      std::string rest = f.path().filename().string();
      std::string key = prefix + rest;
      if (is_content_key(key)) keys.push_back(key);
    }
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::string ObjectStore::put(const Tensor& t) {
  std::string key = content_key(t);
  files_.put_bytes(key, encode_tensor_blob(t));
  return key;
}

Tensor ObjectStore::get(const std::string& key) const {
  std::string bytes = files_.get_bytes(key);
  Tensor t;
  try {
    t = decode_tensor_blob(bytes);
  } catch (const error&) {
    raise(errc::corrupt_object, "blob for " + key + " is not decodable");
  }
  if (content_key(t) != key) {
    raise(errc::corrupt_object, "blob does not re-hash to " + key);
  }
  return t;
}

uint64_t ObjectStore::total_bytes() const {
  uint64_t n = 0;
  for (const auto& key : files_.list_keys()) {
    std::error_code ec;
    n += fs::file_size(files_.path_for(key), ec);
  }
  return n;
}

}  // namespace modelvc
