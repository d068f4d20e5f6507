#include "modelvc/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <limits>
#include <queue>
#include <regex>
#include <set>

#include "modelvc/errors.hpp"
#include "modelvc/io.hpp"
#include "modelvc/kernels.hpp"

namespace modelvc {

namespace fs = std::filesystem;

const char* traversal_name(Traversal t) {
  switch (t) {
    case Traversal::bfs: return "bfs";
    case Traversal::dfs: return "dfs";
    case Traversal::version_chain: return "chain";
    case Traversal::all_parents_first: return "parents-first";
  }
  return "?";
}

const char* edge_set_name(EdgeSet e) {
  switch (e) {
    case EdgeSet::provenance: return "prov";
    case EdgeSet::versioning: return "ver";
    case EdgeSet::both: return "both";
  }
  return "?";
}

// ---- traversals ---------------------------------------------------------------

namespace {

std::vector<std::string> children_of(const LineageNode& n, EdgeSet e) {
  switch (e) {
    case EdgeSet::provenance: return n.prov_children;
    case EdgeSet::versioning: return n.ver_children;
    case EdgeSet::both: {
      std::vector<std::string> out = n.prov_children;
      out.insert(out.end(), n.ver_children.begin(), n.ver_children.end());
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      return out;
    }
  }
  return {};
}

std::vector<std::string> parents_of(const LineageNode& n, EdgeSet e) {
  std::vector<std::string> out;
  if (e != EdgeSet::versioning) out = n.prov_parents;
  if (e != EdgeSet::provenance && n.ver_parent) {
    out.push_back(*n.ver_parent);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

Visit apply(const VisitFn& f, const LineageNode& n) { return f ? f(n) : Visit::take; }

}  // namespace

std::vector<std::string> traverse(const LineageGraph& g, const std::string& start, Traversal t,
                                  EdgeSet edges, const VisitFn& filter) {
  g.node(start);   // existence check
  std::vector<std::string> out;

  if (t == Traversal::version_chain) {
    for (const auto& name : g.version_chain(start)) {
      Visit v = apply(filter, g.node(name));
      if (v == Visit::take || v == Visit::prune) out.push_back(name);
      if (v == Visit::prune || v == Visit::drop) break;
    }
    return out;
  }

  if (t == Traversal::bfs || t == Traversal::dfs) {
    std::set<std::string> seen{start};
    std::deque<std::string> work{start};
    while (!work.empty()) {
      std::string cur;
      if (t == Traversal::bfs) {
        cur = work.front();
        work.pop_front();
      } else {
        cur = work.back();
        work.pop_back();
      }
      const LineageNode& n = g.node(cur);
      Visit v = apply(filter, n);
      if (v == Visit::take || v == Visit::prune) out.push_back(cur);
      if (v == Visit::take || v == Visit::skip) {
        auto kids = children_of(n, edges);
        if (t == Traversal::dfs) std::reverse(kids.begin(), kids.end());
        for (const auto& c : kids) {
          if (seen.insert(c).second) work.push_back(c);
        }
      }
    }
    return out;
  }

  // all_parents_first: Kahn over the reachable induced subgraph, ready
  // nodes in name order. Pruned/dropped nodes never relax their out-edges,
  // so their exclusive descendants stay unemitted.
  std::set<std::string> reach{start};
  std::deque<std::string> q{start};
  while (!q.empty()) {
    std::string cur = q.front();
    q.pop_front();
    for (const auto& c : children_of(g.node(cur), edges)) {
      if (reach.insert(c).second) q.push_back(c);
    }
  }
  std::map<std::string, size_t> indeg;
  for (const auto& name : reach) {
    size_t d = 0;
    for (const auto& p : parents_of(g.node(name), edges)) d += reach.count(p);
    indeg[name] = d;
  }
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [name, d] : indeg) {
    if (d == 0) ready.push(name);
  }
  while (!ready.empty()) {
    std::string cur = ready.top();
    ready.pop();
    const LineageNode& n = g.node(cur);
    Visit v = apply(filter, n);
    if (v == Visit::take || v == Visit::prune) out.push_back(cur);
    if (v == Visit::take || v == Visit::skip) {
      for (const auto& c : children_of(n, edges)) {
        if (reach.count(c) && --indeg[c] == 0) ready.push(c);
      }
    }
  }
  return out;
}

// ---- export -------------------------------------------------------------------

fs::path export_model(Repository& repo, const ModelGraph& m, const fs::path& dir) {
  io::ensure_dir(dir);
  ShardedFileStore blob_out(dir / "objects");
  ParamResolver res = repo.resolver();
  ModelGraph out = m;
  for (auto& l : out.layers) {
    for (auto& [pname, p] : l.params) {
      Tensor t = res.resolve(p);
      std::string key = content_key(t);
      blob_out.put_bytes(key, encode_tensor_blob(t));
      p.kind = ParamRef::kind_t::stored;
      p.key = key;
      p.payload.clear();
    }
  }
  fs::path manifest = dir / "manifest.json";
  io::atomic_write_file(manifest, serialize_model(out));
  return manifest;
}

// ---- tests --------------------------------------------------------------------

namespace {

std::map<std::string, HookSpec> merged_tests(const LineageGraph& g, const std::string& model) {
  const LineageNode& n = g.node(model);
  std::map<std::string, HookSpec> merged = g.type_tests(n.model_type);
  for (const auto& [name, spec] : n.test_hooks) merged[name] = spec;
  return merged;
}

PlaceholderValues model_placeholders(Repository& repo, const std::string& model) {
  const LineageNode& n = repo.graph().node(model);
  PlaceholderValues vals;
  vals.model = repo.model_manifest_path(model).string();
  vals.objects = (repo.root() / "objects").string();
  vals.workdir = repo.workdir().string();
  for (const auto& p : n.prov_parents) {
    vals.parents.push_back(repo.model_manifest_path(p).string());
  }
  return vals;
}

}  // namespace

std::vector<TestReport> run_tests(Repository& repo, const std::string& model,
                                  const std::string& name_pattern) {
  auto merged = merged_tests(repo.graph(), model);
  std::optional<std::regex> re;
  if (!name_pattern.empty()) {
    try {
      re.emplace(name_pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      raise(errc::pattern, "bad test name pattern '" + name_pattern + "': " + e.what());
    }
  }
  PlaceholderValues vals = model_placeholders(repo, model);
  std::vector<TestReport> out;
  for (const auto& [name, spec] : merged) {
    if (re && !std::regex_search(name, *re)) continue;
    TestReport r;
    r.test_name = name;
    r.run = run_command(substitute_placeholders(spec.argv, vals), repo.workdir(),
                        spec.timeout_ms);
    out.push_back(std::move(r));
  }
  return out;
}

RunResult run_named_test(Repository& repo, const std::string& model,
                         const std::string& test_name) {
  auto merged = merged_tests(repo.graph(), model);
  auto it = merged.find(test_name);
  if (it == merged.end()) {
    raise(errc::not_found, "model " + model + " has no test named " + test_name);
  }
  PlaceholderValues vals = model_placeholders(repo, model);
  return run_command(substitute_placeholders(it->second.argv, vals), repo.workdir(),
                     it->second.timeout_ms);
}

// ---- analysis functions ---------------------------------------------------------

namespace {

std::vector<float> to_f32(const Tensor& t) {
  size_t n = t.element_count();
  std::vector<float> v(n);
  if (t.dt == dtype::f32) {
    std::memcpy(v.data(), t.data.data(), n * sizeof(float));
  } else {
    for (size_t i = 0; i < n; ++i) v[i] = t.f32_at(i);
  }
  return v;
}

}  // namespace

std::vector<std::string> analysis_function_names() { return {"delta_norm", "l2_norm", "sparsity"}; }

double run_function(Repository& repo, const std::string& model, const std::string& fn) {
  ModelGraph m = repo.get_model(model);
  ParamResolver res = repo.resolver();

  if (fn == "l2_norm" || fn == "sparsity") {
    double squares = 0.0;
    uint64_t zeros = 0, total = 0;
    for (const auto& l : m.layers) {
      for (const auto& [pname, p] : l.params) {
        if (!dtype_is_float(p.dt)) continue;
        auto buf = to_f32(res.resolve(p));
        squares += kernels::sum_squares(buf.data(), buf.size());
        zeros += kernels::count_zeros(buf.data(), buf.size());
        total += buf.size();
      }
    }
    if (fn == "l2_norm") return std::sqrt(squares);
    return total == 0 ? 0.0 : double(zeros) / double(total);
  }

  if (fn == "delta_norm") {
    const LineageNode& n = repo.graph().node(model);
    if (n.prov_parents.empty()) {
      raise(errc::usage, "delta_norm needs a provenance parent, and " + model + " has none");
    }
    ModelGraph parent = repo.get_model(n.prov_parents.front());
    auto sp = param_sequence(parent);
    auto sm = param_sequence(m);
    auto mapping = lcs_param_mapping(sp, sm);
    double squares = 0.0;
    for (const auto& [ip, im] : mapping) {
      if (!dtype_is_float(sm[im].ref->dt)) continue;
      auto a = to_f32(res.resolve(*sp[ip].ref));
      auto b = to_f32(res.resolve(*sm[im].ref));
      squares += kernels::sum_squared_diff(a.data(), b.data(), a.size());
    }
    return std::sqrt(squares);
  }

  raise(errc::selector, "unknown analysis function: " + fn + " (have: delta_norm, l2_norm, sparsity)");
}

// ---- compression driver ---------------------------------------------------------

CompressionOutcome compress_model(Repository& repo, const std::string& model,
                                  const std::string& against, const CodecConfig& cfg,
                                  bool use_tests) {
  const LineageNode& n = repo.graph().node(model);
  std::string parent_name = against;
  if (parent_name.empty()) {
    if (n.prov_parents.empty()) {
      raise(errc::usage, model + " has no provenance parent to compress against");
    }
    parent_name = n.prov_parents.front();
  } else {
    repo.graph().node(parent_name);
  }
  ModelGraph m1 = repo.get_model(parent_name);
  ModelGraph m2 = repo.get_model(model);

  MetricsFn metrics;
  auto hooks = merged_tests(repo.graph(), model);
  if (use_tests && !hooks.empty()) {
    metrics = [&repo, &hooks, &model](const ModelGraph& candidate) {
      fs::path scratch = repo.hooks_scratch_dir();
      fs::path manifest = export_model(repo, candidate, scratch);
      PlaceholderValues vals;
      vals.model = manifest.string();
      vals.objects = (scratch / "objects").string();
      vals.workdir = repo.workdir().string();
      for (const auto& p : repo.graph().node(model).prov_parents) {
        vals.parents.push_back(repo.model_manifest_path(p).string());
      }
      std::vector<double> out;
      for (const auto& [name, spec] : hooks) {
        RunResult r = run_command(substitute_placeholders(spec.argv, vals), repo.workdir(),
                                  spec.timeout_ms);
        if (!r.passed()) {
          out.push_back(-std::numeric_limits<double>::infinity());
        } else if (r.metric) {
          out.push_back(*r.metric);
        } else {
          out.push_back(std::numeric_limits<double>::quiet_NaN());   // no metric: unchecked
        }
      }
      std::error_code ec;
      fs::remove_all(scratch, ec);
      return out;
    };
  }

  CompressionOutcome outcome =
      delta_compression(m1, m2, cfg, repo.objects(), repo.deltas(), metrics);
  if (outcome.accepted) {
    repo.set_model(model, outcome.m2_out);
    repo.save();
  }
  return outcome;
}

// ---- bisect -----------------------------------------------------------------

BisectResult bisect(Repository& repo, const std::string& good, const std::string& bad,
                    const std::string& test_name) {
  auto chain = repo.graph().version_chain(bad);
  auto pos = [&](const std::string& name) -> size_t {
    auto it = std::find(chain.begin(), chain.end(), name);
    if (it == chain.end()) {
      raise(errc::usage, good + " and " + bad + " are not on one version chain");
    }
    return size_t(it - chain.begin());
  };
  size_t lo = pos(good), hi = pos(bad);
  if (lo >= hi) raise(errc::usage, good + " is not an earlier version than " + bad);

  BisectResult res;
  std::map<std::string, bool> memo{{good, true}, {bad, false}};
  auto probe = [&](const std::string& name) {
    auto it = memo.find(name);
    if (it != memo.end()) return it->second;
    RunResult r = run_named_test(repo, name, test_name);
    ++res.invocations;
    res.probed.push_back(name);
    return memo.emplace(name, r.passed()).first->second;
  };
  while (hi - lo > 1) {
    size_t mid = lo + (hi - lo) / 2;
    if (probe(chain[mid])) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  res.first_bad = chain[hi];
  return res;
}

// ---- update cascade -----------------------------------------------------------

bool CascadeReport::all_passed() const {
  for (const auto& s : steps) {
    if (!s.passed) return false;
  }
  return true;
}

CascadeReport update_cascade(Repository& repo, const std::string& model) {
  LineageGraph& g = repo.graph();
  auto next = g.get_next_version(model);
  if (!next) {
    raise(errc::usage, model + " has no newer version; add one before cascading");
  }
  CascadeReport report;
  report.updated_root = *next;

  // Phase 1: placeholders, parents before children so every placeholder can
  // point at its parents' next-or-current versions. A descendant gets a new
  // version only if it has a creation hook and at least one parent that was
  // itself updated; anything else cuts the cascade along that path.
  std::set<std::string> reach{model};
  std::deque<std::string> q{model};
  while (!q.empty()) {
    std::string cur = q.front();
    q.pop_front();
    for (const auto& c : g.node(cur).prov_children) {
      if (reach.insert(c).second) q.push_back(c);
    }
  }
  std::map<std::string, size_t> indeg;
  for (const auto& name : reach) {
    size_t d = 0;
    for (const auto& p : g.node(name).prov_parents) d += reach.count(p);
    indeg[name] = d;
  }
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [name, d] : indeg) {
    if (d == 0) ready.push(name);
  }
  std::map<std::string, std::string> newver{{model, *next}};
  std::vector<std::string> order;   // sources that got placeholders, parents first
  while (!ready.empty()) {
    std::string cur = ready.top();
    ready.pop();
    for (const auto& c : g.node(cur).prov_children) {
      if (reach.count(c) && --indeg[c] == 0) ready.push(c);
    }
    if (cur == model) continue;
    const LineageNode& src = g.node(cur);
    bool has_updated_parent = false;
    for (const auto& p : src.prov_parents) {
      if (newver.count(p)) has_updated_parent = true;
    }
    if (!has_updated_parent || !src.creation_hook) continue;

    std::string fresh = g.next_version_name(cur);
    g.add_node(fresh, src.model_type, src.manifest_key);
    for (const auto& p : g.node(cur).prov_parents) {
      auto it = newver.find(p);
      g.add_prov_edge(it == newver.end() ? p : it->second, fresh);
    }
    g.add_ver_edge(cur, fresh);
    LineageNode& placed = g.node_mut(fresh);
    placed.creation_hook = g.node(cur).creation_hook;
    placed.test_hooks = g.node(cur).test_hooks;
    newver[cur] = fresh;
    order.push_back(cur);
  }
  repo.save();

  // Phase 2: run creation hooks parents-first over the new nodes. A failed
  // or blocked node blocks everything below it.
  std::set<std::string> failed;
  for (const auto& src : order) {
    const std::string& fresh = newver.at(src);
    CascadeStep step;
    step.source = src;
    step.created = fresh;
    bool blocked = false;
    for (const auto& p : g.node(fresh).prov_parents) {
      if (failed.count(p)) blocked = true;
    }
    if (blocked) {
      step.note = "skipped: upstream creation failed";
      failed.insert(fresh);
      report.steps.push_back(std::move(step));
      continue;
    }
    fs::path scratch = repo.hooks_scratch_dir();
    fs::path out_dir = scratch / "out";
    io::ensure_dir(out_dir);
    PlaceholderValues vals;
    vals.output = out_dir.string();
    vals.objects = (repo.root() / "objects").string();
    vals.workdir = repo.workdir().string();
    for (const auto& p : g.node(fresh).prov_parents) {
      vals.parents.push_back(repo.model_manifest_path(p).string());
    }
    const HookSpec& hook = *g.node(fresh).creation_hook;
    step.hook_run = true;
    RunResult r = run_command(substitute_placeholders(hook.argv, vals), repo.workdir(),
                              hook.timeout_ms);
    step.metric = r.metric;
    if (r.passed()) {
      try {
        ModelGraph built = import_model_bundle(out_dir, repo.objects());
        repo.set_model(fresh, built);
        repo.save();
        step.passed = true;
      } catch (const error& e) {
        step.note = std::string("bundle import failed: ") + e.what();
        failed.insert(fresh);
      }
    } else {
      step.note = r.timed_out ? "creation hook timed out"
                              : "creation hook exited " + std::to_string(r.exit_code);
      failed.insert(fresh);
    }
    std::error_code ec;
    fs::remove_all(scratch, ec);
    report.steps.push_back(std::move(step));
  }
  return report;
}

// ---- merge ------------------------------------------------------------------

namespace {

std::string ref_content_key(const ParamRef& p) {
  if (p.kind == ParamRef::kind_t::inline_) {
    Tensor t{p.dt, p.shape, p.payload};
    return content_key(t);
  }
  return p.key;
}

bool same_param_content(const LayerNode& a, const LayerNode& b) {
  if (a.params.size() != b.params.size()) return false;
  auto ita = a.params.begin(), itb = b.params.begin();
  for (; ita != a.params.end(); ++ita, ++itb) {
    if (ita->first != itb->first) return false;
    if (ref_content_key(ita->second) != ref_content_key(itb->second)) return false;
  }
  return true;
}

struct SideChanges {
  std::set<std::string> deleted;                      // ancestor ids
  std::map<std::string, const LayerNode*> modified;   // ancestor id -> side layer
  std::vector<const LayerNode*> added;                // side layers
  std::map<std::string, std::string> side_to_merged;  // side id -> merged id
  const DiffResult* diff = nullptr;
};

SideChanges side_changes(const ModelGraph& anc, const ModelGraph& side, const DiffResult& d) {
  SideChanges s;
  s.diff = &d;
  for (const auto& id : d.del_n) s.deleted.insert(id);
  for (const auto& [anc_id, side_id] : d.matches_n) {
    s.side_to_merged[side_id] = anc_id;
    const LayerNode* la = anc.find_layer(anc_id);
    const LayerNode* lb = side.find_layer(side_id);
    if (!same_param_content(*la, *lb)) s.modified[anc_id] = lb;
  }
  for (const auto& id : d.add_n) {
    s.added.push_back(side.find_layer(id));
    s.side_to_merged[id] = id;
  }
  return s;
}

std::set<std::string> changed_ancestor_ids(const SideChanges& s) {
  std::set<std::string> out = s.deleted;
  for (const auto& [id, l] : s.modified) out.insert(id);
  return out;
}

std::string join(const std::set<std::string>& v) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

}  // namespace

MergeReport merge_models(Repository& repo, const std::string& a, const std::string& b) {
  LineageGraph& g = repo.graph();
  auto anc_name = g.closest_common_ancestor(a, b);
  if (!anc_name) {
    raise(errc::ancestry, a + " and " + b + " share no provenance ancestor");
  }
  MergeReport rep;
  rep.ancestor = *anc_name;

  ModelGraph manc = repo.get_model(*anc_name);
  ModelGraph ma = repo.get_model(a);
  ModelGraph mb = repo.get_model(b);
  DiffResult da = module_diff(manc, ma, DiffMode::structural);
  DiffResult db = module_diff(manc, mb, DiffMode::structural);
  SideChanges ca = side_changes(manc, ma, da);
  SideChanges cb = side_changes(manc, mb, db);

  auto changed_a = changed_ancestor_ids(ca);
  auto changed_b = changed_ancestor_ids(cb);
  rep.changed_a.assign(changed_a.begin(), changed_a.end());
  for (const auto* l : ca.added) rep.changed_a.push_back(l->layer_id);
  rep.changed_b.assign(changed_b.begin(), changed_b.end());
  for (const auto* l : cb.added) rep.changed_b.push_back(l->layer_id);

  std::set<std::string> overlap;
  std::set_intersection(changed_a.begin(), changed_a.end(), changed_b.begin(), changed_b.end(),
                        std::inserter(overlap, overlap.begin()));
  if (!overlap.empty()) {
    rep.status = MergeStatus::conflict;
    rep.detail = "both sides changed: " + join(overlap);
    return rep;
  }
  {
    std::set<std::string> added_a, added_b, add_overlap;
    for (const auto* l : ca.added) added_a.insert(l->layer_id);
    for (const auto* l : cb.added) added_b.insert(l->layer_id);
    std::set_intersection(added_a.begin(), added_a.end(), added_b.begin(), added_b.end(),
                          std::inserter(add_overlap, add_overlap.begin()));
    if (!add_overlap.empty()) {
      rep.status = MergeStatus::conflict;
      rep.detail = "both sides added layers named: " + join(add_overlap);
      return rep;
    }
  }

  // Candidate: ancestor minus deletions, with each side's modifications and
  // additions applied; edge set rebuilt the same way.
  ModelGraph merged;
  merged.model_name = ma.model_name + "+" + mb.model_name;
  merged.model_type = manc.model_type;
  for (const auto& l : manc.layers) {
    if (ca.deleted.count(l.layer_id) || cb.deleted.count(l.layer_id)) continue;
    const LayerNode* src = &l;
    if (auto it = ca.modified.find(l.layer_id); it != ca.modified.end()) src = it->second;
    if (auto it = cb.modified.find(l.layer_id); it != cb.modified.end()) src = it->second;
    LayerNode copy = *src;
    copy.layer_id = l.layer_id;
    merged.layers.push_back(std::move(copy));
  }
  for (const auto* l : ca.added) merged.layers.push_back(*l);
  for (const auto* l : cb.added) merged.layers.push_back(*l);

  std::set<std::pair<std::string, std::string>> edges;
  std::set<std::pair<std::string, std::string>> dropped;
  for (const auto& e : da.del_e) dropped.insert(e);
  for (const auto& e : db.del_e) dropped.insert(e);
  for (const auto& e : manc.edges) {
    if (!dropped.count(e)) edges.insert(e);
  }
  auto add_side_edges = [&](const SideChanges& s) {
    for (const auto& e : s.diff->add_e) {
      auto su = s.side_to_merged.find(e.first);
      auto sv = s.side_to_merged.find(e.second);
      if (su == s.side_to_merged.end() || sv == s.side_to_merged.end()) continue;
      edges.insert({su->second, sv->second});
    }
  };
  add_side_edges(ca);
  add_side_edges(cb);
  merged.edges.assign(edges.begin(), edges.end());

  try {
    merged.validate();
  } catch (const error& e) {
    rep.status = MergeStatus::conflict;
    rep.detail = std::string("combined changes do not form a valid model: ") + e.what();
    return rep;
  }

  // Directed path between one side's changes and the other's in the
  // candidate (deleted layers are gone; modified + added represent a side).
  std::set<std::string> set_a, set_b;
  for (const auto& [id, l] : ca.modified) set_a.insert(id);
  for (const auto* l : ca.added) set_a.insert(l->layer_id);
  for (const auto& [id, l] : cb.modified) set_b.insert(id);
  for (const auto* l : cb.added) set_b.insert(l->layer_id);

  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& e : merged.edges) adj[e.first].push_back(e.second);
  auto reaches = [&](const std::set<std::string>& from, const std::set<std::string>& to) {
    std::deque<std::string> work(from.begin(), from.end());
    std::set<std::string> seen(from.begin(), from.end());
    while (!work.empty()) {
      std::string cur = work.front();
      work.pop_front();
      if (to.count(cur) && !from.count(cur)) return true;
      for (const auto& c : adj[cur]) {
        if (seen.insert(c).second) work.push_back(c);
      }
    }
    // `from` and `to` are disjoint by the conflict checks above, but a node
    // can appear in `to` and also start in `from` after set reuse; guard
    // against counting a zero-length path.
    for (const auto& s : from) {
      if (to.count(s)) return true;
    }
    return false;
  };

  rep.merged = std::move(merged);
  if (reaches(set_a, set_b) || reaches(set_b, set_a)) {
    rep.status = MergeStatus::possible_conflict;
    rep.detail = "changes are connected by a directed path; run tests on the merged model";
  } else {
    rep.status = MergeStatus::no_conflict;
    rep.detail = "changes are independent";
  }
  return rep;
}

}  // namespace modelvc
