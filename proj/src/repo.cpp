#include "modelvc/repo.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>

#include "modelvc/errors.hpp"
#include "modelvc/hash.hpp"
#include "modelvc/io.hpp"

namespace modelvc {

namespace fs = std::filesystem;

Repository::Repository(fs::path workdir, bool create)
    : workdir_(std::move(workdir)),
      objects_(workdir_ / ".modelvc" / "objects"),
      deltas_(workdir_ / ".modelvc" / "deltas"),
      manifests_(workdir_ / ".modelvc" / "manifests") {
  fs::path r = root();
  if (create) {
    if (fs::exists(r / "graph")) raise(errc::integrity, "already a repository: " + r.string());
    io::ensure_dir(r);
    io::ensure_dir(r / "objects");
    io::ensure_dir(r / "deltas");
    io::ensure_dir(r / "manifests");
    io::ensure_dir(r / "hooks");
  } else if (!fs::exists(r / "graph")) {
    raise(errc::no_repository, "not a repository (no .modelvc/graph): " + workdir_.string());
  }
  acquire_lock();
  if (create) {
    io::atomic_write_file(r / "graph", graph_.serialize());
  }
  load_graph();
}

Repository::~Repository() {
  if (lock_fd_ >= 0) {
    flock(lock_fd_, LOCK_UN);
    close(lock_fd_);
  }
}

std::unique_ptr<Repository> Repository::init(const fs::path& workdir) {
  io::ensure_dir(workdir);
  return std::unique_ptr<Repository>(new Repository(fs::absolute(workdir), true));
}

std::unique_ptr<Repository> Repository::open(const fs::path& start, const fs::path& override_dir) {
  fs::path dir;
  if (!override_dir.empty()) {
    dir = fs::absolute(override_dir);
  } else if (const char* env = std::getenv("MODELVC_DIR"); env && *env) {
    dir = fs::absolute(env);
  } else {
    fs::path cur = fs::absolute(start.empty() ? fs::current_path() : start);
    for (;;) {
      if (fs::exists(cur / ".modelvc" / "graph")) {
        dir = cur;
        break;
      }
      fs::path parent = cur.parent_path();
      if (parent == cur) {
        raise(errc::no_repository,
              "not a repository (searched upward from " + fs::absolute(start).string() + ")");
      }
      cur = parent;
    }
  }
  return std::unique_ptr<Repository>(new Repository(dir, false));
}

void Repository::acquire_lock() {
  fs::path lock_path = root() / "lock";
  lock_fd_ = ::open(lock_path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (lock_fd_ < 0) {
    raise(errc::lock, "cannot open lock file: " + std::string(std::strerror(errno)));
  }
  if (flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    close(lock_fd_);
    lock_fd_ = -1;
    raise(errc::lock, "repository is locked by another process: " + lock_path.string());
  }
}

void Repository::load_graph() {
  std::string text = io::read_file(root() / "graph");
  graph_ = LineageGraph::deserialize(text);
  loaded_graph_digest_ = sha256_hex(text);
}

fs::path Repository::hooks_scratch_dir() {
  for (;;) {
    fs::path p = root() / "hooks" /
                 ("run-" + std::to_string(::getpid()) + "-" + std::to_string(scratch_counter_++));
    if (!fs::exists(p)) {
      io::ensure_dir(p);
      return p;
    }
  }
}

std::string Repository::put_manifest(const ModelGraph& m) {
  std::string text = serialize_model(m);
  std::string key = sha256_hex(text);
  manifests_.put_bytes(key, text);
  return key;
}

ModelGraph Repository::get_manifest(const std::string& key) const {
  return deserialize_model(manifests_.get_bytes(key));
}

fs::path Repository::manifest_path(const std::string& key) const {
  return manifests_.path_for(key);
}

ModelGraph Repository::get_model(const std::string& name) const {
  return get_manifest(graph_.node(name).manifest_key);
}

fs::path Repository::model_manifest_path(const std::string& name) const {
  return manifest_path(graph_.node(name).manifest_key);
}

LineageNode& Repository::add_model(const std::string& name, const std::string& model_type,
                                   const ModelGraph& m) {
  std::string key = put_manifest(m);
  return graph_.add_node(name, model_type, key);
}

void Repository::set_model(const std::string& name, const ModelGraph& m) {
  graph_.node_mut(name).manifest_key = put_manifest(m);
}

void Repository::save() {
  fs::path graph_path = root() / "graph";
  if (auto cur = io::read_file_if_exists(graph_path)) {
    std::string digest = sha256_hex(*cur);
    if (digest != loaded_graph_digest_) {
      raise(errc::stale_metadata, "graph changed on disk behind this repository handle");
    }
  }
  std::string text = graph_.serialize();
  io::atomic_write_file(graph_path, text);
  loaded_graph_digest_ = sha256_hex(text);
}

// ---- reachability ------------------------------------------------------------

std::array<std::set<std::string>, 3> Repository::reachable_keys() const {
  std::array<std::set<std::string>, 3> out;   // objects, deltas, manifests
  auto& [live_objects, live_deltas, live_manifests] = out;

  // A referenced key names a blob or a delta record; records chain upward.
  auto mark_key = [&](std::string key) {
    for (int depth = 0; depth < 1024; ++depth) {
      if (objects_.contains(key)) {
        live_objects.insert(key);
        return;
      }
      if (!deltas_.contains(key) || !live_deltas.insert(key).second) return;
      key = deltas_.get(key).parent_key;
    }
  };

  for (const auto& name : graph_.node_names()) {
    const std::string& mkey = graph_.node(name).manifest_key;
    if (!live_manifests.insert(mkey).second) continue;
    auto text = manifests_.get_bytes_if_exists(mkey);
    if (!text) continue;   // fsck reports this; reachability just skips
    ModelGraph m;
    try {
      m = deserialize_model(*text);
    } catch (const error&) {
      continue;
    }
    for (const auto& l : m.layers) {
      for (const auto& [pname, p] : l.params) {
        if (p.kind != ParamRef::kind_t::inline_) mark_key(p.key);
      }
    }
  }
  return out;
}

// ---- fsck ---------------------------------------------------------------------

Repository::FsckReport Repository::fsck() const {
  FsckReport rep;
  auto err = [&](std::string m) { rep.errors.push_back(std::move(m)); };
  auto warn = [&](std::string m) { rep.warnings.push_back(std::move(m)); };

  try {
    graph_.audit();
  } catch (const error& e) {
    err(std::string("lineage graph: ") + e.what());
  }

  // Every object decodes and re-hashes to its key.
  for (const auto& key : objects_.list_keys()) {
    try {
      objects_.get(key);
    } catch (const error& e) {
      err("object " + key + ": " + e.what());
    }
  }

  // Every delta record decodes and its parent chain bottoms out in a blob.
  ParamResolver res{objects_, deltas_};
  for (const auto& key : deltas_.list_keys()) {
    try {
      deltas_.get(key);
      res.resolve_key(key);
    } catch (const error& e) {
      err("delta record " + key + ": " + e.what());
    }
  }

  // Every model's manifest parses and every param ref resolves.
  for (const auto& name : graph_.node_names()) {
    const auto& node = graph_.node(name);
    auto text = manifests_.get_bytes_if_exists(node.manifest_key);
    if (!text) {
      err("model " + name + ": missing manifest " + node.manifest_key);
      continue;
    }
    if (sha256_hex(*text) != node.manifest_key) {
      err("model " + name + ": manifest does not match its digest");
      continue;
    }
    ModelGraph m;
    try {
      m = deserialize_model(*text);
    } catch (const error& e) {
      err("model " + name + ": " + e.what());
      continue;
    }
    for (const auto& l : m.layers) {
      for (const auto& [pname, p] : l.params) {
        if (p.kind == ParamRef::kind_t::inline_) continue;
        try {
          res.resolve(p);
        } catch (const error& e) {
          err("model " + name + " param " + l.layer_id + "/" + pname + ": " + e.what());
        }
      }
    }
  }

  auto [live_objects, live_deltas, live_manifests] = reachable_keys();
  for (const auto& key : objects_.list_keys()) {
    if (!live_objects.count(key)) warn("unreferenced object " + key);
  }
  for (const auto& key : deltas_.list_keys()) {
    if (!live_deltas.count(key)) warn("unreferenced delta record " + key);
  }
  for (const auto& key : manifests_.list_keys()) {
    if (!live_manifests.count(key)) warn("unreferenced manifest " + key);
  }
  return rep;
}

// ---- gc -----------------------------------------------------------------------

Repository::GcStats Repository::gc() {
  auto [live_objects, live_deltas, live_manifests] = reachable_keys();
  GcStats st;
  auto file_bytes = [](const fs::path& p) -> uint64_t {
    std::error_code ec;
    auto n = fs::file_size(p, ec);
    return ec ? 0 : uint64_t(n);
  };
  for (const auto& key : objects_.list_keys()) {
    if (live_objects.count(key)) continue;
    st.bytes_freed += file_bytes(objects_.files().path_for(key));
    objects_.remove(key);
    ++st.objects_removed;
  }
  for (const auto& key : deltas_.list_keys()) {
    if (live_deltas.count(key)) continue;
    st.bytes_freed += file_bytes(deltas_.files().path_for(key));
    deltas_.remove(key);
    ++st.deltas_removed;
  }
  for (const auto& key : manifests_.list_keys()) {
    if (live_manifests.count(key)) continue;
    st.bytes_freed += file_bytes(manifests_.path_for(key));
    manifests_.remove(key);
    ++st.manifests_removed;
  }
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root() / "hooks", ec)) {
    fs::remove_all(entry.path(), ec);
  }
  return st;
}

}  // namespace modelvc
