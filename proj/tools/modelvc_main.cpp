// modelvc: version control for DAG-structured model checkpoints.
//
// Exit codes:
//   0  success (merge: no conflict; compress: accepted; test/update: all passed)
//   1  negative outcome (merge: possible conflict; compress: rejected;
//      test/update: something failed)
//   2  merge conflict
//   3  no repository found
//   4  repository lock is held
//   5  operation error
//   6  usage error

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "modelvc/autoconstruct.hpp"
#include "modelvc/diff.hpp"
#include "modelvc/errors.hpp"
#include "modelvc/hooks.hpp"
#include "modelvc/ops.hpp"
#include "modelvc/repo.hpp"
#include "CLI11.hpp"

namespace fs = std::filesystem;
using namespace modelvc;

namespace {

struct Globals {
  std::string dir;
  bool porcelain = false;
};

std::unique_ptr<Repository> open_repo(const Globals& g) {
  return Repository::open(fs::current_path(), g.dir);
}

int64_t wall_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string join(const std::vector<std::string>& v, const char* sep = ", ") {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

ModelGraph import_from_path(Repository& repo, const std::string& path) {
  fs::path p = fs::absolute(path);
  if (fs::is_directory(p)) return import_model_bundle(p, repo.objects());
  return import_model_manifest(p, repo.objects());
}

HookSpec hook_from_cli(const std::vector<std::string>& cmd, int64_t timeout_ms) {
  if (cmd.empty()) raise(errc::usage, "hook command is empty (pass it after --)");
  HookSpec spec;
  spec.argv = cmd;
  if (timeout_ms <= 0) raise(errc::usage, "--timeout-ms must be positive");
  spec.timeout_ms = timeout_ms;
  return spec;
}

Traversal traversal_from(const std::string& s) {
  if (s == "bfs") return Traversal::bfs;
  if (s == "dfs") return Traversal::dfs;
  if (s == "chain") return Traversal::version_chain;
  if (s == "parents-first") return Traversal::all_parents_first;
  raise(errc::usage, "unknown traversal: " + s + " (bfs, dfs, chain, parents-first)");
}

EdgeSet edges_from(const std::string& s) {
  if (s == "prov") return EdgeSet::provenance;
  if (s == "ver") return EdgeSet::versioning;
  if (s == "both") return EdgeSet::both;
  raise(errc::usage, "unknown edge set: " + s + " (prov, ver, both)");
}

void print_test_reports(const std::vector<TestReport>& reports, bool porcelain) {
  for (const auto& r : reports) {
    std::string metric;
    if (r.run.metric) metric = (porcelain ? " " : " metric=") + num(*r.run.metric);
    if (porcelain) {
      std::printf("%s %s%s\n", r.run.passed() ? "pass" : "fail", r.test_name.c_str(),
                  metric.c_str());
    } else {
      std::printf("%-4s %s (%lld ms)%s\n", r.run.passed() ? "ok" : "FAIL", r.test_name.c_str(),
                  static_cast<long long>(r.run.duration_ms), metric.c_str());
    }
    if (!r.run.passed() && !porcelain && !r.run.err.empty()) {
      std::fprintf(stderr, "  stderr: %s\n", r.run.err.c_str());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"version control for DAG-structured model checkpoints"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("-C,--dir", g.dir, "repository directory (overrides discovery)");
  app.add_flag("--porcelain", g.porcelain, "stable machine-readable output");

  int exit_code = 0;

  // ---- init ----
  std::string init_path = ".";
  auto* c_init = app.add_subcommand("init", "create an empty repository");
  c_init->add_option("path", init_path, "directory to initialize");
  c_init->callback([&] {
    auto repo = Repository::init(init_path);
    std::printf("initialized empty repository at %s\n", repo->root().c_str());
  });

  // ---- add-node ----
  std::string an_name, an_manifest, an_type, an_version_of;
  std::vector<std::string> an_parents;
  auto* c_add = app.add_subcommand("add-node", "register a model from a manifest or bundle");
  c_add->add_option("name", an_name, "model name")->required();
  c_add->add_option("--manifest", an_manifest, "manifest file or bundle directory")->required();
  c_add->add_option("--type", an_type, "model type (default: manifest's)");
  c_add->add_option("--parent", an_parents, "provenance parent (repeatable)");
  c_add->add_option("--version-of", an_version_of, "older version this one supersedes");
  c_add->callback([&] {
    auto repo = open_repo(g);
    ModelGraph m = import_from_path(*repo, an_manifest);
    std::string type = an_type.empty() ? m.model_type : an_type;
    LineageNode& node = repo->add_model(an_name, type, m);
    node.created_at_ms = wall_ms();
    for (const auto& p : an_parents) repo->graph().add_prov_edge(p, an_name);
    if (!an_version_of.empty()) repo->graph().add_ver_edge(an_version_of, an_name);
    repo->save();
    if (g.porcelain) {
      std::printf("added %s %s\n", an_name.c_str(), node.manifest_key.c_str());
    } else {
      std::printf("added %s (type %s, %zu layers, manifest %.12s)\n", an_name.c_str(),
                  type.c_str(), repo->get_model(an_name).layers.size(),
                  node.manifest_key.c_str());
    }
  });

  // ---- auto-add ----
  std::string aa_name, aa_manifest, aa_type;
  double aa_tau = kDefaultPlacementTau;
  auto* c_auto = app.add_subcommand("auto-add", "register a model, inferring its parent");
  c_auto->add_option("name", aa_name, "model name (default: manifest's model name)");
  c_auto->add_option("--manifest", aa_manifest, "manifest file or bundle directory")->required();
  c_auto->add_option("--type", aa_type, "model type (default: manifest's)");
  c_auto->add_option("--tau", aa_tau, "divergence threshold for placing as root");
  c_auto->callback([&] {
    auto repo = open_repo(g);
    ModelGraph m = import_from_path(*repo, aa_manifest);
    std::string name = aa_name.empty() ? m.model_name : aa_name;
    if (name.empty()) raise(errc::usage, "no model name given and the manifest has none");
    PlacementDecision d = place_model(*repo, m, aa_tau);
    std::string type = aa_type.empty() ? m.model_type : aa_type;
    LineageNode& node = repo->add_model(name, type, m);
    node.created_at_ms = wall_ms();
    if (d.parent) repo->graph().add_prov_edge(*d.parent, name);
    repo->save();
    if (g.porcelain) {
      std::printf("%s\n", d.parent ? ("parent " + *d.parent).c_str() : "root");
      for (const auto& s : d.scores) {
        std::printf("score %s %s %s\n", s.name.c_str(), num(s.contextual).c_str(),
                    num(s.structural).c_str());
      }
    } else if (d.parent) {
      std::printf("added %s as child of %s (contextual %s, structural %s)\n", name.c_str(),
                  d.parent->c_str(), num(d.scores.front().contextual).c_str(),
                  num(d.scores.front().structural).c_str());
    } else {
      std::printf("added %s as a new root (%zu models scored)\n", name.c_str(), d.scores.size());
    }
  });

  // ---- add-edge / add-version-edge / remove-edge ----
  std::string e_parent, e_child;
  auto* c_edge = app.add_subcommand("add-edge", "add a provenance edge parent -> child");
  c_edge->add_option("parent", e_parent)->required();
  c_edge->add_option("child", e_child)->required();
  c_edge->callback([&] {
    auto repo = open_repo(g);
    repo->graph().add_prov_edge(e_parent, e_child);
    repo->save();
    std::printf("added edge %s -> %s\n", e_parent.c_str(), e_child.c_str());
  });

  std::string v_old, v_new;
  auto* c_vedge = app.add_subcommand("add-version-edge", "mark new-model as the next version");
  c_vedge->add_option("old", v_old)->required();
  c_vedge->add_option("new", v_new)->required();
  c_vedge->callback([&] {
    auto repo = open_repo(g);
    repo->graph().add_ver_edge(v_old, v_new);
    repo->save();
    std::printf("added version edge %s -> %s\n", v_old.c_str(), v_new.c_str());
  });

  std::string re_parent, re_child;
  bool re_version = false;
  auto* c_redge = app.add_subcommand("remove-edge", "remove a provenance or version edge");
  c_redge->add_option("parent", re_parent)->required();
  c_redge->add_option("child", re_child)->required();
  c_redge->add_flag("--version", re_version, "remove a version edge instead of provenance");
  c_redge->callback([&] {
    auto repo = open_repo(g);
    if (re_version) {
      repo->graph().remove_ver_edge(re_parent, re_child);
    } else {
      repo->graph().remove_prov_edge(re_parent, re_child);
    }
    repo->save();
    std::printf("removed edge %s -> %s\n", re_parent.c_str(), re_child.c_str());
  });

  // ---- remove-node ----
  std::string rn_name;
  auto* c_rm = app.add_subcommand("remove-node",
                                  "remove a model and its now-unreachable descendants");
  c_rm->add_option("name", rn_name)->required();
  c_rm->callback([&] {
    auto repo = open_repo(g);
    auto removed = repo->graph().remove_node(rn_name);
    repo->save();
    for (const auto& n : removed) {
      std::printf(g.porcelain ? "removed %s\n" : "removed model %s\n", n.c_str());
    }
  });

  // ---- register-hook / deregister-test ----
  std::string rh_target, rh_test;
  bool rh_creation = false, rh_for_type = false;
  int64_t rh_timeout = 3'600'000;
  std::vector<std::string> rh_cmd;
  auto* c_hook = app.add_subcommand("register-hook", "attach a creation or test command");
  c_hook->add_option("target", rh_target, "model name (or model type with --for-type)")
      ->required();
  c_hook->add_option("cmd", rh_cmd, "command and arguments (after --)")->expected(-1);
  c_hook->add_flag("--creation", rh_creation, "register the creation hook");
  c_hook->add_option("--test", rh_test, "register a test hook with this name");
  c_hook->add_flag("--for-type", rh_for_type, "target is a model type (test hooks only)");
  c_hook->add_option("--timeout-ms", rh_timeout, "kill the hook after this long");
  c_hook->callback([&] {
    if (rh_creation == !rh_test.empty()) {
      raise(errc::usage, "pass exactly one of --creation or --test NAME");
    }
    if (rh_creation && rh_for_type) {
      raise(errc::usage, "--for-type applies to test hooks only");
    }
    auto repo = open_repo(g);
    HookSpec spec = hook_from_cli(rh_cmd, rh_timeout);
    if (rh_creation) {
      repo->graph().node_mut(rh_target).creation_hook = std::move(spec);
      std::printf("registered creation hook on %s\n", rh_target.c_str());
    } else if (rh_for_type) {
      repo->graph().register_type_test(rh_target, rh_test, std::move(spec));
      std::printf("registered test %s for type %s\n", rh_test.c_str(), rh_target.c_str());
    } else {
      repo->graph().node_mut(rh_target).test_hooks[rh_test] = std::move(spec);
      std::printf("registered test %s on %s\n", rh_test.c_str(), rh_target.c_str());
    }
    repo->save();
  });

  std::string dt_target, dt_test;
  bool dt_for_type = false;
  auto* c_dereg = app.add_subcommand("deregister-test", "remove a test hook");
  c_dereg->add_option("target", dt_target, "model name (or model type with --for-type)")
      ->required();
  c_dereg->add_option("test", dt_test, "test name")->required();
  c_dereg->add_flag("--for-type", dt_for_type, "target is a model type");
  c_dereg->callback([&] {
    auto repo = open_repo(g);
    bool removed;
    if (dt_for_type) {
      removed = repo->graph().deregister_type_test(dt_target, dt_test);
    } else {
      removed = repo->graph().node_mut(dt_target).test_hooks.erase(dt_test) > 0;
    }
    if (!removed) raise(errc::not_found, "no test " + dt_test + " on " + dt_target);
    repo->save();
    std::printf("deregistered test %s from %s\n", dt_test.c_str(), dt_target.c_str());
  });

  // ---- log ----
  std::string log_start, log_trav = "bfs", log_edges = "prov";
  auto* c_log = app.add_subcommand("log", "walk the lineage graph from a model");
  c_log->add_option("start", log_start)->required();
  c_log->add_option("--traversal", log_trav, "bfs | dfs | chain | parents-first");
  c_log->add_option("--edges", log_edges, "prov | ver | both");
  c_log->callback([&] {
    auto repo = open_repo(g);
    auto names = traverse(repo->graph(), log_start, traversal_from(log_trav),
                          edges_from(log_edges));
    for (const auto& n : names) {
      if (g.porcelain) {
        std::printf("%s\n", n.c_str());
      } else {
        const LineageNode& node = repo->graph().node(n);
        std::printf("%s (type %s%s%s)\n", n.c_str(), node.model_type.c_str(),
                    node.prov_parents.empty() ? "" : ", from ",
                    join(node.prov_parents).c_str());
      }
    }
  });

  // ---- show ----
  std::string show_name;
  auto* c_show = app.add_subcommand("show", "describe one model");
  c_show->add_option("name", show_name)->required();
  c_show->callback([&] {
    auto repo = open_repo(g);
    const LineageNode& n = repo->graph().node(show_name);
    ModelGraph m = repo->get_model(show_name);
    size_t params = 0, stored = 0, delta = 0;
    for (const auto& l : m.layers) {
      for (const auto& [pn, p] : l.params) {
        ++params;
        if (p.kind == ParamRef::kind_t::stored) ++stored;
        if (p.kind == ParamRef::kind_t::delta) ++delta;
      }
    }
    std::vector<std::string> tests;
    for (const auto& [tn, s] : n.test_hooks) tests.push_back(tn);
    if (g.porcelain) {
      std::printf("name=%s\ntype=%s\nmanifest=%s\nseq=%llu\n", n.name.c_str(),
                  n.model_type.c_str(), n.manifest_key.c_str(),
                  static_cast<unsigned long long>(n.created_seq));
      std::printf("parents=%s\nchildren=%s\n", join(n.prov_parents, ",").c_str(),
                  join(n.prov_children, ",").c_str());
      std::printf("ver-parent=%s\nver-children=%s\n",
                  n.ver_parent ? n.ver_parent->c_str() : "-",
                  join(n.ver_children, ",").c_str());
      std::printf("creation-hook=%s\ntests=%s\n", n.creation_hook ? "yes" : "no",
                  join(tests, ",").c_str());
      std::printf("layers=%zu\nedges=%zu\nparams=%zu\nstored=%zu\ndelta=%zu\nbytes=%llu\n",
                  m.layers.size(), m.edges.size(), params, stored, delta,
                  static_cast<unsigned long long>(m.total_param_bytes()));
    } else {
      std::printf("%s  type=%s\n", n.name.c_str(), n.model_type.c_str());
      std::printf("  manifest   %s\n", n.manifest_key.c_str());
      std::printf("  parents    %s\n", n.prov_parents.empty() ? "(root)"
                                                              : join(n.prov_parents).c_str());
      std::printf("  children   %s\n", join(n.prov_children).c_str());
      std::printf("  versions   prev=%s next=%s\n", n.ver_parent ? n.ver_parent->c_str() : "-",
                  join(n.ver_children).c_str());
      std::printf("  hooks      creation=%s tests=[%s]\n", n.creation_hook ? "yes" : "no",
                  join(tests).c_str());
      std::printf("  graph      %zu layers, %zu edges, %zu params (%zu stored, %zu delta), "
                  "%llu param bytes\n",
                  m.layers.size(), m.edges.size(), params, stored, delta,
                  static_cast<unsigned long long>(m.total_param_bytes()));
    }
  });

  // ---- diff ----
  std::string d_a, d_b;
  bool d_contextual = false;
  auto* c_diff = app.add_subcommand("diff", "graph-match two models and report changes");
  c_diff->add_option("a", d_a)->required();
  c_diff->add_option("b", d_b)->required();
  c_diff->add_flag("--contextual", d_contextual, "compare parameter contents too");
  c_diff->callback([&] {
    auto repo = open_repo(g);
    DiffMode mode = d_contextual ? DiffMode::contextual : DiffMode::structural;
    DiffResult d = module_diff(repo->get_model(d_a), repo->get_model(d_b), mode);
    if (g.porcelain) {
      for (const auto& [x, y] : d.matches_n) std::printf("match %s %s\n", x.c_str(), y.c_str());
      for (const auto& id : d.del_n) std::printf("del-layer %s\n", id.c_str());
      for (const auto& id : d.add_n) std::printf("add-layer %s\n", id.c_str());
      for (const auto& e : d.del_e) std::printf("del-edge %s %s\n", e.first.c_str(),
                                                e.second.c_str());
      for (const auto& e : d.add_e) std::printf("add-edge %s %s\n", e.first.c_str(),
                                                e.second.c_str());
      std::printf("divergence %s\n", num(d.divergence()).c_str());
    } else {
      std::fputs(diff_report(d).c_str(), stdout);
    }
  });

  // ---- compress ----
  std::string cp_model, cp_against, cp_backend = "dict";
  double cp_eps = 1e-4, cp_tthr = 0.01;
  int cp_depth = 64;
  bool cp_use_tests = false;
  auto* c_cmp = app.add_subcommand("compress", "delta-compress a model against its parent");
  c_cmp->add_option("model", cp_model)->required();
  c_cmp->add_option("--against", cp_against, "baseline model (default: first parent)");
  c_cmp->add_option("--epsilon", cp_eps, "quantization bound parameter");
  c_cmp->add_option("--backend", cp_backend, "lossless backend: rle | dict");
  c_cmp->add_option("--t-thr", cp_tthr, "tolerated metric drop");
  c_cmp->add_option("--max-chain-depth", cp_depth, "longest allowed delta chain");
  c_cmp->add_flag("--use-tests", cp_use_tests, "guard acceptance with the model's test metrics");
  c_cmp->callback([&] {
    auto repo = open_repo(g);
    CodecConfig cfg;
    cfg.epsilon = cp_eps;
    cfg.backend = cp_backend;
    cfg.t_thr = cp_tthr;
    cfg.max_chain_depth = cp_depth;
    CompressionOutcome out = compress_model(*repo, cp_model, cp_against, cfg, cp_use_tests);
    if (g.porcelain) {
      if (out.accepted) {
        std::printf("accepted saving=%s raw=%llu compressed=%llu records=%zu\n",
                    num(out.storage_saving).c_str(),
                    static_cast<unsigned long long>(out.raw_bytes),
                    static_cast<unsigned long long>(out.compressed_bytes), out.records.size());
      } else {
        std::printf("rejected reason=%s saving=%s\n", out.reason.c_str(),
                    num(out.storage_saving).c_str());
      }
    } else if (out.accepted) {
      std::printf("compressed %s: %llu -> %llu bytes (saving %sx, %zu delta records)\n",
                  cp_model.c_str(), static_cast<unsigned long long>(out.raw_bytes),
                  static_cast<unsigned long long>(out.compressed_bytes),
                  num(out.storage_saving).c_str(), out.records.size());
    } else {
      std::printf("left %s uncompressed (%s, saving %sx)\n", cp_model.c_str(),
                  out.reason.c_str(), num(out.storage_saving).c_str());
    }
    if (!out.accepted) exit_code = 1;
  });

  // ---- gc ----
  auto* c_gc = app.add_subcommand("gc", "delete unreferenced blobs, records, and manifests");
  c_gc->callback([&] {
    auto repo = open_repo(g);
    auto st = repo->gc();
    if (g.porcelain) {
      std::printf("objects=%zu deltas=%zu manifests=%zu bytes=%llu\n", st.objects_removed,
                  st.deltas_removed, st.manifests_removed,
                  static_cast<unsigned long long>(st.bytes_freed));
    } else {
      std::printf("removed %zu objects, %zu delta records, %zu manifests (%llu bytes)\n",
                  st.objects_removed, st.deltas_removed, st.manifests_removed,
                  static_cast<unsigned long long>(st.bytes_freed));
    }
  });

  // ---- fsck ----
  auto* c_fsck = app.add_subcommand("fsck", "verify store integrity and reference resolution");
  c_fsck->callback([&] {
    auto repo = open_repo(g);
    auto rep = repo->fsck();
    for (const auto& e : rep.errors) std::printf("error %s\n", e.c_str());
    for (const auto& w : rep.warnings) std::printf("warn %s\n", w.c_str());
    std::printf("%s\n", rep.clean() ? "clean" : "dirty");
    if (!rep.clean()) raise(errc::integrity, "repository has integrity errors");
  });

  // ---- test ----
  std::string t_model, t_pattern;
  auto* c_test = app.add_subcommand("test", "run a model's test hooks");
  c_test->add_option("model", t_model)->required();
  c_test->add_option("--pattern", t_pattern, "regex filter on test names");
  c_test->callback([&] {
    auto repo = open_repo(g);
    auto reports = run_tests(*repo, t_model, t_pattern);
    print_test_reports(reports, g.porcelain);
    if (reports.empty() && !g.porcelain) std::printf("no tests selected\n");
    for (const auto& r : reports) {
      if (!r.run.passed()) exit_code = 1;
    }
  });

  // ---- run ----
  std::string r_model, r_fn;
  auto* c_run = app.add_subcommand("run", "evaluate a built-in analysis function");
  c_run->add_option("model", r_model)->required();
  c_run->add_option("function", r_fn, "delta_norm | l2_norm | sparsity")->required();
  c_run->callback([&] {
    auto repo = open_repo(g);
    double v = run_function(*repo, r_model, r_fn);
    std::printf("%.17g\n", v);
  });

  // ---- bisect ----
  std::string b_good, b_bad, b_test;
  auto* c_bis = app.add_subcommand("bisect", "find the first failing version of a test");
  c_bis->add_option("good", b_good, "version known to pass")->required();
  c_bis->add_option("bad", b_bad, "later version known to fail")->required();
  c_bis->add_option("--test", b_test, "test hook name")->required();
  c_bis->callback([&] {
    auto repo = open_repo(g);
    BisectResult res = bisect(*repo, b_good, b_bad, b_test);
    if (g.porcelain) {
      for (const auto& p : res.probed) std::printf("probe %s\n", p.c_str());
      std::printf("first-bad %s\ninvocations %zu\n", res.first_bad.c_str(), res.invocations);
    } else {
      std::printf("first bad version: %s (%zu test runs)\n", res.first_bad.c_str(),
                  res.invocations);
    }
  });

  // ---- update ----
  std::string u_model;
  auto* c_upd = app.add_subcommand("update", "cascade a model update through its dependents");
  c_upd->add_option("model", u_model, "the outdated model (its new version must exist)")
      ->required();
  c_upd->callback([&] {
    auto repo = open_repo(g);
    CascadeReport rep = update_cascade(*repo, u_model);
    if (g.porcelain) {
      std::printf("root %s\n", rep.updated_root.c_str());
      for (const auto& s : rep.steps) {
        std::printf("step %s %s %s\n", s.source.c_str(), s.created.c_str(),
                    s.passed ? "ok" : (s.hook_run ? "fail" : "skip"));
      }
    } else {
      std::printf("cascading from %s\n", rep.updated_root.c_str());
      for (const auto& s : rep.steps) {
        std::printf("  %s -> %s: %s%s%s\n", s.source.c_str(), s.created.c_str(),
                    s.passed ? "ok" : (s.hook_run ? "FAILED" : "skipped"),
                    s.note.empty() ? "" : " - ", s.note.c_str());
      }
      if (rep.steps.empty()) std::printf("  nothing to update\n");
    }
    if (!rep.all_passed()) exit_code = 1;
  });

  // ---- merge ----
  std::string m_a, m_b, m_out, m_type;
  auto* c_merge = app.add_subcommand("merge", "three-way merge two models");
  c_merge->add_option("a", m_a)->required();
  c_merge->add_option("b", m_b)->required();
  c_merge->add_option("--out", m_out, "register the merged model under this name");
  c_merge->add_option("--type", m_type, "model type for --out (default: ancestor's)");
  c_merge->callback([&] {
    auto repo = open_repo(g);
    MergeReport rep = merge_models(*repo, m_a, m_b);
    const char* status = rep.status == MergeStatus::no_conflict ? "no-conflict"
                         : rep.status == MergeStatus::possible_conflict ? "possible-conflict"
                                                                        : "conflict";
    if (g.porcelain) {
      std::printf("status %s\nancestor %s\n", status, rep.ancestor.c_str());
      for (const auto& id : rep.changed_a) std::printf("changed-a %s\n", id.c_str());
      for (const auto& id : rep.changed_b) std::printf("changed-b %s\n", id.c_str());
    } else {
      std::printf("%s (ancestor %s): %s\n", status, rep.ancestor.c_str(), rep.detail.c_str());
    }
    if (rep.merged && !m_out.empty()) {
      ModelGraph merged = *rep.merged;
      merged.model_name = m_out;
      LineageNode& node = repo->add_model(
          m_out, m_type.empty() ? merged.model_type : m_type, merged);
      node.created_at_ms = wall_ms();
      repo->graph().add_prov_edge(m_a, m_out);
      repo->graph().add_prov_edge(m_b, m_out);
      repo->save();
      std::printf(g.porcelain ? "merged %s\n" : "registered merged model %s\n", m_out.c_str());
      if (rep.status == MergeStatus::possible_conflict && !g.porcelain) {
        std::printf("run `modelvc test %s` to check the combined model\n", m_out.c_str());
      }
    }
    exit_code = static_cast<int>(rep.status);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 6;
  } catch (const error& e) {
    std::fprintf(stderr, "modelvc: %s\n", e.what());
    switch (e.kind()) {
      case errc::no_repository: return 3;
      case errc::lock: return 4;
      case errc::usage:
      case errc::selector:
      case errc::pattern: return 6;
      default: return 5;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "modelvc: %s\n", e.what());
    return 5;
  }
  return exit_code;
}
