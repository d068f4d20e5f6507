#include "modelvc/lineage.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <queue>

#include "modelvc/errors.hpp"
#include "modelvc/hash.hpp"
#include "json.hpp"

namespace modelvc {

using json = nlohmann::ordered_json;

// ---- accessors --------------------------------------------------------------

bool LineageGraph::has_node(const std::string& name) const { return nodes_.count(name) != 0; }

const LineageNode& LineageGraph::node(const std::string& name) const {
  auto it = nodes_.find(name);
  if (it == nodes_.end()) raise(errc::not_found, "no such model: " + name);
  return it->second;
}

LineageNode& LineageGraph::node_mut(const std::string& name) {
  auto it = nodes_.find(name);
  if (it == nodes_.end()) raise(errc::not_found, "no such model: " + name);
  return it->second;
}

std::vector<std::string> LineageGraph::node_names() const {
  std::vector<std::string> out;
  out.reserve(nodes_.size());
  for (const auto& [k, v] : nodes_) out.push_back(k);
  return out;
}

// ---- mutation ---------------------------------------------------------------

void LineageGraph::insert_sorted(std::vector<std::string>& v, const std::string& s) {
  v.insert(std::lower_bound(v.begin(), v.end(), s), s);
}

bool LineageGraph::erase_value(std::vector<std::string>& v, const std::string& s) {
  auto it = std::find(v.begin(), v.end(), s);
  if (it == v.end()) return false;
  v.erase(it);
  return true;
}

LineageNode& LineageGraph::add_node(const std::string& name, const std::string& model_type,
                                    const std::string& manifest_key) {
  if (name.empty()) raise(errc::name, "model name must not be empty");
  if (nodes_.count(name)) raise(errc::name, "model already exists: " + name);
  if (!is_content_key(manifest_key)) {
    raise(errc::integrity, "manifest key is not a content key: " + manifest_key);
  }
  LineageNode n;
  n.name = name;
  n.model_type = model_type;
  n.manifest_key = manifest_key;
  n.created_at_ms = 0;
  n.created_seq = next_seq_++;
  return nodes_.emplace(name, std::move(n)).first->second;
}

bool LineageGraph::prov_reaches(const std::string& from, const std::string& to) const {
  std::deque<const std::string*> q{&from};
  std::set<std::string> seen{from};
  while (!q.empty()) {
    const std::string& cur = *q.front();
    q.pop_front();
    if (cur == to) return true;
    for (const auto& c : node(cur).prov_children) {
      if (seen.insert(c).second) q.push_back(&*seen.find(c));
    }
  }
  return false;
}

bool LineageGraph::ver_reaches(const std::string& from, const std::string& to) const {
  std::deque<const std::string*> q{&from};
  std::set<std::string> seen{from};
  while (!q.empty()) {
    const std::string& cur = *q.front();
    q.pop_front();
    if (cur == to) return true;
    for (const auto& c : node(cur).ver_children) {
      if (seen.insert(c).second) q.push_back(&*seen.find(c));
    }
  }
  return false;
}

void LineageGraph::add_prov_edge(const std::string& parent, const std::string& child) {
  LineageNode& p = node_mut(parent);
  LineageNode& c = node_mut(child);
  if (parent == child) raise(errc::cycle, "provenance self-loop on " + parent);
  if (std::binary_search(c.prov_parents.begin(), c.prov_parents.end(), parent)) {
    raise(errc::integrity, "provenance edge exists: " + parent + " -> " + child);
  }
  if (prov_reaches(child, parent)) {
    raise(errc::cycle, "provenance edge would close a cycle: " + parent + " -> " + child);
  }
  insert_sorted(p.prov_children, child);
  insert_sorted(c.prov_parents, parent);
}

void LineageGraph::add_ver_edge(const std::string& old_model, const std::string& new_model) {
  LineageNode& o = node_mut(old_model);
  LineageNode& n = node_mut(new_model);
  if (old_model == new_model) raise(errc::cycle, "version self-loop on " + old_model);
  if (o.model_type != n.model_type) {
    raise(errc::type_mismatch, "version edge across model types: " + o.model_type +
                                   " vs " + n.model_type);
  }
  if (n.ver_parent.has_value()) {
    raise(errc::integrity, new_model + " already has a version parent: " + *n.ver_parent);
  }
  if (ver_reaches(new_model, old_model)) {
    raise(errc::cycle, "version edge would close a cycle: " + old_model + " -> " + new_model);
  }
  insert_sorted(o.ver_children, new_model);
  n.ver_parent = old_model;
}

void LineageGraph::remove_prov_edge(const std::string& parent, const std::string& child) {
  LineageNode& p = node_mut(parent);
  LineageNode& c = node_mut(child);
  if (!erase_value(p.prov_children, child) || !erase_value(c.prov_parents, parent)) {
    raise(errc::not_found, "no provenance edge " + parent + " -> " + child);
  }
}

void LineageGraph::remove_ver_edge(const std::string& old_model, const std::string& new_model) {
  LineageNode& o = node_mut(old_model);
  LineageNode& n = node_mut(new_model);
  if (n.ver_parent != old_model || !erase_value(o.ver_children, new_model)) {
    raise(errc::not_found, "no version edge " + old_model + " -> " + new_model);
  }
  n.ver_parent.reset();
}

std::vector<std::string> LineageGraph::remove_node(const std::string& name) {
  node(name);   // existence check

  // Mark everything provenance-reachable from the original roots, walking a
  // graph that pretends `name` is already gone.
  std::deque<std::string> q;
  std::set<std::string> live;
  for (const auto& [n, nd] : nodes_) {
    if (nd.prov_parents.empty() && n != name) {
      live.insert(n);
      q.push_back(n);
    }
  }
  while (!q.empty()) {
    std::string cur = q.front();
    q.pop_front();
    for (const auto& c : node(cur).prov_children) {
      if (c != name && live.insert(c).second) q.push_back(c);
    }
  }

  std::vector<std::string> removed;
  for (const auto& [n, nd] : nodes_) {
    if (!live.count(n)) removed.push_back(n);
  }

  std::set<std::string> gone(removed.begin(), removed.end());
  for (auto& [n, nd] : nodes_) {
    if (gone.count(n)) continue;
    nd.prov_parents.erase(std::remove_if(nd.prov_parents.begin(), nd.prov_parents.end(),
                                         [&](const std::string& s) { return gone.count(s); }),
                          nd.prov_parents.end());
    nd.prov_children.erase(std::remove_if(nd.prov_children.begin(), nd.prov_children.end(),
                                          [&](const std::string& s) { return gone.count(s); }),
                           nd.prov_children.end());
    nd.ver_children.erase(std::remove_if(nd.ver_children.begin(), nd.ver_children.end(),
                                         [&](const std::string& s) { return gone.count(s); }),
                          nd.ver_children.end());
    if (nd.ver_parent && gone.count(*nd.ver_parent)) nd.ver_parent.reset();
  }
  for (const auto& n : removed) nodes_.erase(n);
  return removed;
}

// ---- type tests ---------------------------------------------------------------

const std::map<std::string, HookSpec>& LineageGraph::type_tests(
    const std::string& model_type) const {
  static const std::map<std::string, HookSpec> kEmpty;
  auto it = type_tests_.find(model_type);
  return it == type_tests_.end() ? kEmpty : it->second;
}

void LineageGraph::register_type_test(const std::string& model_type,
                                      const std::string& test_name, HookSpec spec) {
  if (test_name.empty()) raise(errc::name, "test name must not be empty");
  if (spec.argv.empty()) raise(errc::usage, "test command must not be empty");
  type_tests_[model_type][test_name] = std::move(spec);
}

bool LineageGraph::deregister_type_test(const std::string& model_type,
                                        const std::string& test_name) {
  auto it = type_tests_.find(model_type);
  if (it == type_tests_.end()) return false;
  bool erased = it->second.erase(test_name) > 0;
  if (it->second.empty()) type_tests_.erase(it);
  return erased;
}

std::vector<std::string> LineageGraph::model_types() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : type_tests_) out.push_back(k);
  return out;
}

// ---- queries ----------------------------------------------------------------

std::vector<std::string> LineageGraph::version_chain(const std::string& name) const {
  std::string cur = name;
  node(cur);
  while (node(cur).ver_parent) cur = *node(cur).ver_parent;
  std::vector<std::string> chain{cur};
  for (auto nxt = get_next_version(cur); nxt; nxt = get_next_version(*nxt)) {
    chain.push_back(*nxt);
    cur = *nxt;
  }
  return chain;
}

std::optional<std::string> LineageGraph::get_next_version(const std::string& name) const {
  const LineageNode& n = node(name);
  std::optional<std::string> best;
  uint64_t best_seq = 0;
  for (const auto& c : n.ver_children) {
    uint64_t s = node(c).created_seq;
    if (!best || s > best_seq) {
      best = c;
      best_seq = s;
    }
  }
  return best;
}

std::optional<std::string> LineageGraph::get_prev_version(const std::string& name) const {
  return node(name).ver_parent;
}

std::optional<std::string> LineageGraph::closest_common_ancestor(const std::string& a,
                                                                 const std::string& b) const {
  auto dists = [&](const std::string& start) {
    std::map<std::string, uint64_t> d{{start, 0}};
    std::deque<std::string> q{start};
    while (!q.empty()) {
      std::string cur = q.front();
      q.pop_front();
      for (const auto& p : node(cur).prov_parents) {
        if (!d.count(p)) {
          d[p] = d[cur] + 1;
          q.push_back(p);
        }
      }
    }
    return d;
  };
  auto da = dists(a), db = dists(b);
  std::optional<std::string> best;
  uint64_t best_d = std::numeric_limits<uint64_t>::max();
  for (const auto& [n, d1] : da) {
    auto it = db.find(n);
    if (it == db.end()) continue;
    uint64_t total = d1 + it->second;
    if (total < best_d || (total == best_d && (!best || n < *best))) {
      best = n;
      best_d = total;
    }
  }
  return best;
}

std::vector<std::string> LineageGraph::roots() const {
  std::vector<std::string> out;
  for (const auto& [n, nd] : nodes_) {
    if (nd.prov_parents.empty()) out.push_back(n);
  }
  return out;
}

std::string LineageGraph::next_version_name(const std::string& base) const {
  std::string stem = base;
  auto at = base.rfind("@v");
  if (at != std::string::npos && at + 2 < base.size() &&
      base.find_first_not_of("0123456789", at + 2) == std::string::npos) {
    stem = base.substr(0, at);
  }
  for (uint64_t n = 2;; ++n) {
    std::string cand = stem + "@v" + std::to_string(n);
    if (!nodes_.count(cand)) return cand;
  }
}

// ---- serialization -------------------------------------------------------------

namespace {

json hook_to_json(const HookSpec& h) {
  return json{{"argv", h.argv}, {"timeout_ms", h.timeout_ms}};
}

HookSpec hook_from_json(const json& j) {
  HookSpec h;
  if (!j.is_object() || !j.contains("argv") || !j.at("argv").is_array()) {
    raise(errc::parse, "malformed hook spec");
  }
  for (const auto& a : j.at("argv")) {
    if (!a.is_string()) raise(errc::parse, "hook argv entries must be strings");
    h.argv.push_back(a.get<std::string>());
  }
  if (h.argv.empty()) raise(errc::parse, "hook argv must not be empty");
  if (j.contains("timeout_ms")) h.timeout_ms = j.at("timeout_ms").get<int64_t>();
  if (h.timeout_ms <= 0) raise(errc::parse, "hook timeout must be positive");
  return h;
}

}  // namespace

std::string LineageGraph::serialize() const {
  json root;
  root["format"] = "modelvc-lineage";
  root["version"] = 1;
  root["next_seq"] = next_seq_;
  json nodes = json::object();
  for (const auto& [name, n] : nodes_) {
    json jn;
    jn["model_type"] = n.model_type;
    jn["manifest"] = n.manifest_key;
    jn["created_at_ms"] = n.created_at_ms;
    jn["created_seq"] = n.created_seq;
    jn["prov_parents"] = n.prov_parents;
    if (n.ver_parent) jn["ver_parent"] = *n.ver_parent;
    if (n.creation_hook) jn["creation_hook"] = hook_to_json(*n.creation_hook);
    if (!n.test_hooks.empty()) {
      json th = json::object();
      for (const auto& [tn, spec] : n.test_hooks) th[tn] = hook_to_json(spec);
      jn["test_hooks"] = std::move(th);
    }
    nodes[name] = std::move(jn);
  }
  root["nodes"] = std::move(nodes);
  if (!type_tests_.empty()) {
    json tt = json::object();
    for (const auto& [ty, tests] : type_tests_) {
      json jt = json::object();
      for (const auto& [tn, spec] : tests) jt[tn] = hook_to_json(spec);
      tt[ty] = std::move(jt);
    }
    root["type_tests"] = std::move(tt);
  }
  return root.dump(2) + "\n";
}

LineageGraph LineageGraph::deserialize(const std::string& text) {
  json root = json::parse(text, nullptr, false);
  if (root.is_discarded() || !root.is_object()) {
    raise(errc::parse, "lineage graph is not valid JSON");
  }
  LineageGraph g;
  try {
    if (root.value("format", "") != "modelvc-lineage") {
      raise(errc::parse, "not a lineage graph document");
    }
    if (root.value("version", 0) != 1) {
      raise(errc::format_version, "unsupported lineage graph version");
    }
    const json& nodes = root.at("nodes");
    // Pass 1: nodes.
    for (const auto& [name, jn] : nodes.items()) {
      LineageNode n;
      n.name = name;
      n.model_type = jn.at("model_type").get<std::string>();
      n.manifest_key = jn.at("manifest").get<std::string>();
      if (!is_content_key(n.manifest_key)) {
        raise(errc::parse, "bad manifest key for " + name);
      }
      n.created_at_ms = jn.value("created_at_ms", int64_t{0});
      n.created_seq = jn.at("created_seq").get<uint64_t>();
      if (jn.contains("creation_hook")) {
        n.creation_hook = hook_from_json(jn.at("creation_hook"));
      }
      if (jn.contains("test_hooks")) {
        for (const auto& [tn, jt] : jn.at("test_hooks").items()) {
          n.test_hooks[tn] = hook_from_json(jt);
        }
      }
      g.nodes_.emplace(name, std::move(n));
    }
    // Pass 2: edges, via the checked mutators so cycles and type mismatches
    // in a hand-edited file surface as errors.
    for (const auto& [name, jn] : nodes.items()) {
      if (jn.contains("prov_parents")) {
        for (const auto& p : jn.at("prov_parents")) {
          g.add_prov_edge(p.get<std::string>(), name);
        }
      }
      if (jn.contains("ver_parent")) {
        g.add_ver_edge(jn.at("ver_parent").get<std::string>(), name);
      }
    }
    if (root.contains("type_tests")) {
      for (const auto& [ty, jt] : root.at("type_tests").items()) {
        for (const auto& [tn, js] : jt.items()) {
          g.type_tests_[ty][tn] = hook_from_json(js);
        }
      }
    }
    g.next_seq_ = root.at("next_seq").get<uint64_t>();
    for (const auto& [name, n] : g.nodes_) {
      if (n.created_seq >= g.next_seq_) {
        raise(errc::parse, "created_seq ahead of next_seq for " + name);
      }
    }
  } catch (const json::exception& e) {
    raise(errc::parse, std::string("malformed lineage graph: ") + e.what());
  }
  g.audit();
  return g;
}

void LineageGraph::audit() const {
  auto sorted_unique = [](const std::vector<std::string>& v) {
    return std::is_sorted(v.begin(), v.end()) &&
           std::adjacent_find(v.begin(), v.end()) == v.end();
  };
  for (const auto& [name, n] : nodes_) {
    if (n.name != name) raise(errc::integrity, "node name mismatch: " + name);
    if (!sorted_unique(n.prov_parents) || !sorted_unique(n.prov_children) ||
        !sorted_unique(n.ver_children)) {
      raise(errc::integrity, "adjacency not sorted/unique at " + name);
    }
    for (const auto& p : n.prov_parents) {
      const auto it = nodes_.find(p);
      if (it == nodes_.end()) raise(errc::integrity, "dangling provenance parent " + p);
      const auto& back = it->second.prov_children;
      if (!std::binary_search(back.begin(), back.end(), name)) {
        raise(errc::integrity, "unmirrored provenance edge " + p + " -> " + name);
      }
    }
    for (const auto& c : n.prov_children) {
      const auto it = nodes_.find(c);
      if (it == nodes_.end()) raise(errc::integrity, "dangling provenance child " + c);
      const auto& back = it->second.prov_parents;
      if (!std::binary_search(back.begin(), back.end(), name)) {
        raise(errc::integrity, "unmirrored provenance edge " + name + " -> " + c);
      }
    }
    if (n.ver_parent) {
      const auto it = nodes_.find(*n.ver_parent);
      if (it == nodes_.end()) raise(errc::integrity, "dangling version parent " + *n.ver_parent);
      if (it->second.model_type != n.model_type) {
        raise(errc::integrity, "version edge across model types at " + name);
      }
      const auto& back = it->second.ver_children;
      if (!std::binary_search(back.begin(), back.end(), name)) {
        raise(errc::integrity, "unmirrored version edge " + *n.ver_parent + " -> " + name);
      }
    }
    for (const auto& c : n.ver_children) {
      const auto it = nodes_.find(c);
      if (it == nodes_.end()) raise(errc::integrity, "dangling version child " + c);
      if (it->second.ver_parent != name) {
        raise(errc::integrity, "unmirrored version edge " + name + " -> " + c);
      }
    }
  }
  // Acyclicity of both relations via Kahn over provenance / version edges.
  for (int rel = 0; rel < 2; ++rel) {
    std::map<std::string, size_t> indeg;
    for (const auto& [name, n] : nodes_) {
      indeg[name] = rel == 0 ? n.prov_parents.size() : (n.ver_parent ? 1 : 0);
    }
    std::deque<std::string> q;
    for (const auto& [name, d] : indeg) {
      if (d == 0) q.push_back(name);
    }
    size_t seen = 0;
    while (!q.empty()) {
      std::string cur = q.front();
      q.pop_front();
      ++seen;
      const auto& kids = rel == 0 ? node(cur).prov_children : node(cur).ver_children;
      for (const auto& c : kids) {
        if (--indeg[c] == 0) q.push_back(c);
      }
    }
    if (seen != nodes_.size()) {
      raise(errc::integrity, rel == 0 ? "provenance relation is cyclic"
                                      : "version relation is cyclic");
    }
  }
}

}  // namespace modelvc
