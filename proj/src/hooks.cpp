#include "modelvc/hooks.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "modelvc/errors.hpp"
#include "modelvc/io.hpp"
#include "modelvc/tensor.hpp"
#include "json.hpp"

namespace modelvc {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// ---- placeholders -----------------------------------------------------------

static void replace_all(std::string& s, std::string_view what, std::string_view with) {
  size_t pos = 0;
  while ((pos = s.find(what, pos)) != std::string::npos) {
    s.replace(pos, what.size(), with);
    pos += with.size();
  }
}

std::vector<std::string> substitute_placeholders(const std::vector<std::string>& argv_template,
                                                 const PlaceholderValues& vals) {
  std::vector<std::string> out;
  for (const std::string& tok : argv_template) {
    if (tok == "{parents}") {
      out.insert(out.end(), vals.parents.begin(), vals.parents.end());
      continue;
    }
    if (tok.find("{parents}") != std::string::npos) {
      raise(errc::usage, "{parents} must be a whole argument, not part of one");
    }
    std::string s = tok;
    auto subst = [&](std::string_view ph, const std::optional<std::string>& v) {
      if (s.find(ph) == std::string::npos) return;
      if (!v) raise(errc::usage, std::string(ph) + " is not available for this hook");
      replace_all(s, ph, *v);
    };
    subst("{model}", vals.model);
    subst("{output}", vals.output);
    subst("{objects}", vals.objects);
    subst("{workdir}", vals.workdir);
    out.push_back(std::move(s));
  }
  if (out.empty()) raise(errc::usage, "hook command is empty");
  return out;
}

// ---- process execution ------------------------------------------------------

namespace {

int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Drain whatever is ready on fd into sink; returns false once fd hits EOF.
bool drain(int fd, std::string& sink) {
  char buf[4096];
  for (;;) {
    ssize_t n = ::read(fd, buf, sizeof buf);
    if (n > 0) {
      sink.append(buf, size_t(n));
      continue;
    }
    if (n == 0) return false;
    if (errno == EAGAIN || errno == EWOULDBLOCK) return true;
    if (errno == EINTR) continue;
    return false;
  }
}

}  // namespace

RunResult run_command(const std::vector<std::string>& argv, const fs::path& cwd,
                      int64_t timeout_ms) {
  if (argv.empty()) raise(errc::usage, "hook command is empty");
  int out_pipe[2], err_pipe[2];
  if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
    raise(errc::hook_failed, std::string("pipe: ") + std::strerror(errno));
  }

  std::vector<std::string> args = argv;   // stable storage for exec
  std::vector<char*> cargv;
  for (auto& a : args) cargv.push_back(a.data());
  cargv.push_back(nullptr);

  pid_t pid = fork();
  if (pid < 0) {
    raise(errc::hook_failed, std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    // Child: own process group so a timeout can kill helpers it spawned too.
    setpgid(0, 0);
    if (!cwd.empty()) {
      if (chdir(cwd.c_str()) != 0) _exit(127);
    }
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    close(err_pipe[1]);
    execvp(cargv[0], cargv.data());
    ::fprintf(stderr, "exec %s: %s\n", cargv[0], std::strerror(errno));
    _exit(127);
  }

  close(out_pipe[1]);
  close(err_pipe[1]);
  fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
  fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

  RunResult r;
  int64_t started = now_ms();
  int64_t deadline = timeout_ms > 0 ? started + timeout_ms : -1;
  bool out_open = true, err_open = true;
  while (out_open || err_open) {
    struct pollfd fds[2];
    nfds_t nfds = 0;
    if (out_open) fds[nfds++] = {out_pipe[0], POLLIN, 0};
    if (err_open) fds[nfds++] = {err_pipe[0], POLLIN, 0};
    int wait_ms = 200;
    if (deadline >= 0) {
      int64_t left = deadline - now_ms();
      if (left <= 0) {
        r.timed_out = true;
        kill(-pid, SIGKILL);
        break;
      }
      wait_ms = int(std::min<int64_t>(left, 200));
    }
    int rc = poll(fds, nfds, wait_ms);
    if (rc < 0 && errno != EINTR) break;
    for (nfds_t i = 0; i < nfds; ++i) {
      if (!(fds[i].revents & (POLLIN | POLLHUP))) continue;
      if (fds[i].fd == out_pipe[0]) {
        out_open = drain(out_pipe[0], r.out);
      } else {
        err_open = drain(err_pipe[0], r.err);
      }
    }
  }
  // Pipes may still hold data written before a kill.
  drain(out_pipe[0], r.out);
  drain(err_pipe[0], r.err);
  close(out_pipe[0]);
  close(err_pipe[0]);

  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  r.duration_ms = now_ms() - started;
  if (r.timed_out) {
    r.exit_code = -1;
  } else if (WIFEXITED(status)) {
    r.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    r.exit_code = 128 + WTERMSIG(status);
  }
  if (r.passed()) r.metric = parse_trailing_metric(r.out);
  return r;
}

std::optional<double> parse_trailing_metric(const std::string& stdout_text) {
  size_t end = stdout_text.size();
  while (end > 0 && (stdout_text[end - 1] == '\n' || stdout_text[end - 1] == '\r')) --end;
  if (end == 0) return std::nullopt;
  size_t begin = stdout_text.rfind('\n', end - 1);
  begin = begin == std::string::npos ? 0 : begin + 1;
  std::string line = stdout_text.substr(begin, end - begin);
  while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.erase(0, 1);
  while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) {
    line.pop_back();
  }
  if (line.empty()) return std::nullopt;
  errno = 0;
  char* tail = nullptr;
  double v = std::strtod(line.c_str(), &tail);
  if (tail != line.c_str() + line.size() || errno == ERANGE) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

// ---- bundle import ----------------------------------------------------------

ModelGraph import_model_bundle(const fs::path& bundle_dir, ObjectStore& objects) {
  return import_model_manifest(bundle_dir / "manifest.json", objects);
}

ModelGraph import_model_manifest(const fs::path& manifest_path, ObjectStore& objects) {
  ModelGraph m = deserialize_model(io::read_file(manifest_path));
  ShardedFileStore bundle_objects(manifest_path.parent_path() / "objects");
  for (auto& layer : m.layers) {
    for (auto& [pname, p] : layer.params) {
      if (p.kind == ParamRef::kind_t::inline_) {
        Tensor t{p.dt, p.shape, std::move(p.payload)};
        p.kind = ParamRef::kind_t::stored;
        p.key = objects.put(t);
        p.payload.clear();
        continue;
      }
      if (p.kind != ParamRef::kind_t::stored) {
        raise(errc::parse, "bundle manifests may only use inline or stored params (" +
                               layer.layer_id + "/" + pname + ")");
      }
      if (objects.contains(p.key)) continue;
      auto raw = bundle_objects.get_bytes_if_exists(p.key);
      if (!raw) {
        raise(errc::missing_object,
              "bundle param blob not found: " + p.key + " (" + layer.layer_id + "/" + pname + ")");
      }
      Tensor t = decode_tensor_blob(*raw);
      if (content_key(t) != p.key) {
        raise(errc::corrupt_object, "bundle blob does not match its key: " + p.key);
      }
      if (t.dt != p.dt || t.shape != p.shape) {
        raise(errc::shape_mismatch, "bundle blob shape/dtype disagrees with manifest: " + p.key);
      }
      objects.put(t);
    }
  }
  return m;
}

// ---- merged creation --------------------------------------------------------

namespace {

// shared_params.json: { "layer/param": ["0","2"], ... }. Empty member list
// means "all members".
void verify_shared_params(const fs::path& output_dir, const std::vector<ModelGraph>& models) {
  auto text = io::read_file_if_exists(output_dir / "shared_params.json");
  if (!text) return;
  json root = json::parse(*text, nullptr, false);
  if (root.is_discarded() || !root.is_object()) {
    raise(errc::parse, "shared_params.json is not a JSON object");
  }
  auto key_of = [&](const ModelGraph& m, const std::string& layer_id,
                    const std::string& pname) -> std::string {
    const LayerNode* l = m.find_layer(layer_id);
    if (!l) raise(errc::sharing_violation, "shared param layer missing: " + layer_id);
    auto it = l->params.find(pname);
    if (it == l->params.end()) {
      raise(errc::sharing_violation, "shared param missing: " + layer_id + "/" + pname);
    }
    if (it->second.kind == ParamRef::kind_t::inline_) {
      Tensor t{it->second.dt, it->second.shape, it->second.payload};
      return content_key(t);
    }
    return it->second.key;
  };
  for (const auto& [spec, members_j] : root.items()) {
    auto slash = spec.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == spec.size()) {
      raise(errc::parse, "shared param id must be layer_id/param_name: " + spec);
    }
    std::string layer_id = spec.substr(0, slash);
    std::string pname = spec.substr(slash + 1);
    std::vector<size_t> idx;
    if (!members_j.is_array()) raise(errc::parse, "shared param members must be an array");
    for (const auto& mj : members_j) {
      size_t i = std::stoul(mj.get<std::string>());
      if (i >= models.size()) raise(errc::parse, "shared param member out of range: " + spec);
      idx.push_back(i);
    }
    if (idx.empty()) {
      for (size_t i = 0; i < models.size(); ++i) idx.push_back(i);
    }
    if (idx.size() < 2) continue;
    std::string expect = key_of(models[idx[0]], layer_id, pname);
    for (size_t k = 1; k < idx.size(); ++k) {
      std::string got = key_of(models[idx[k]], layer_id, pname);
      if (got != expect) {
        raise(errc::sharing_violation, "shared param " + spec + " differs between members " +
                                           std::to_string(idx[0]) + " and " +
                                           std::to_string(idx[k]));
      }
    }
  }
}

}  // namespace

MergedCreationResult run_merged_creation(const HookSpec& hook,
                                         const std::vector<std::string>& members,
                                         const PlaceholderValues& base_vals,
                                         const fs::path& output_dir,
                                         const fs::path& cwd, ObjectStore& objects) {
  if (members.empty()) raise(errc::usage, "merged creation needs at least one member");
  io::ensure_dir(output_dir);
  PlaceholderValues vals = base_vals;
  vals.output = output_dir.string();
  MergedCreationResult res;
  res.run = run_command(substitute_placeholders(hook.argv, vals), cwd, hook.timeout_ms);
  if (!res.run.passed()) return res;
  for (size_t i = 0; i < members.size(); ++i) {
    fs::path sub = output_dir / std::to_string(i);
    if (!fs::is_directory(sub)) {
      raise(errc::hook_failed, "merged creation hook did not produce bundle " +
                                   std::to_string(i) + " for " + members[i]);
    }
    res.models.push_back(import_model_bundle(sub, objects));
  }
  verify_shared_params(output_dir, res.models);
  return res;
}

}  // namespace modelvc
