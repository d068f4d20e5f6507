#include "modelvc/model.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <unordered_map>

#include "json.hpp"

#include "modelvc/errors.hpp"
#include "modelvc/hash.hpp"
#include "modelvc/io.hpp"

namespace modelvc {

using json = nlohmann::json;

uint64_t ParamRef::byte_size() const {
  uint64_t n = 1;
  for (uint64_t d : shape) n *= d;
  return n * dtype_size(dt);
}

const LayerNode* ModelGraph::find_layer(std::string_view id) const {
  for (const auto& l : layers) {
    if (l.layer_id == id) return &l;
  }
  return nullptr;
}

LayerNode* ModelGraph::find_layer(std::string_view id) {
  for (auto& l : layers) {
    if (l.layer_id == id) return &l;
  }
  return nullptr;
}

bool ModelGraph::has_edge(const std::string& src, const std::string& dst) const {
  for (const auto& e : edges) {
    if (e.first == src && e.second == dst) return true;
  }
  return false;
}

void ModelGraph::validate() const {
  std::set<std::string_view> ids;
  for (const auto& l : layers) {
    if (l.layer_id.empty()) raise(errc::integrity, "empty layer id");
    if (!ids.insert(l.layer_id).second) {
      raise(errc::integrity, "duplicate layer id: " + l.layer_id);
    }
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : edges) {
    if (!ids.count(e.first)) raise(errc::integrity, "edge source missing: " + e.first);
    if (!ids.count(e.second)) raise(errc::integrity, "edge target missing: " + e.second);
    if (e.first == e.second) raise(errc::cyclic_model, "self-loop on " + e.first);
    if (!seen.insert(e).second) {
      raise(errc::integrity, "duplicate edge " + e.first + " -> " + e.second);
    }
  }
  topo_order();  // throws cyclic_model on a cycle
}

std::vector<size_t> ModelGraph::topo_order() const {
  std::unordered_map<std::string_view, size_t> index;
  for (size_t i = 0; i < layers.size(); ++i) index[layers[i].layer_id] = i;

  std::vector<size_t> indeg(layers.size(), 0);
  std::vector<std::vector<size_t>> out(layers.size());
  for (const auto& e : edges) {
    auto s = index.find(e.first), d = index.find(e.second);
    if (s == index.end() || d == index.end()) {
      raise(errc::integrity, "edge endpoint missing: " + e.first + " -> " + e.second);
    }
    out[s->second].push_back(d->second);
    ++indeg[d->second];
  }

  auto by_id = [&](size_t a, size_t b) { return layers[a].layer_id > layers[b].layer_id; };
  std::priority_queue<size_t, std::vector<size_t>, decltype(by_id)> ready(by_id);
  for (size_t i = 0; i < layers.size(); ++i) {
    if (indeg[i] == 0) ready.push(i);
  }

  std::vector<size_t> order;
  order.reserve(layers.size());
  while (!ready.empty()) {
    size_t i = ready.top();
    ready.pop();
    order.push_back(i);
    for (size_t j : out[i]) {
      if (--indeg[j] == 0) ready.push(j);
    }
  }
  if (order.size() != layers.size()) raise(errc::cyclic_model, "model graph has a cycle");
  return order;
}

uint64_t ModelGraph::total_param_bytes() const {
  uint64_t n = 0;
  for (const auto& l : layers) {
    for (const auto& [name, p] : l.params) n += p.byte_size();
  }
  return n;
}

// ---- JSON mapping ----

namespace {

json attr_to_json(const AttrValue& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

AttrValue attr_from_json(const json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer() || j.is_number_unsigned()) return j.get<int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  raise(errc::parse, "attribute must be a scalar or string");
}

json param_to_json(const ParamRef& p) {
  json j;
  switch (p.kind) {
    case ParamRef::kind_t::stored: j["kind"] = "stored"; break;
    case ParamRef::kind_t::delta: j["kind"] = "delta"; break;
    case ParamRef::kind_t::inline_: j["kind"] = "inline"; break;
  }
  j["dtype"] = dtype_name(p.dt);
  j["shape"] = p.shape;
  if (p.kind == ParamRef::kind_t::inline_) {
    j["data"] = io::base64_encode(p.payload);
  } else {
    j["key"] = p.key;
  }
  return j;
}

ParamRef param_from_json(const json& j) {
  ParamRef p;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "stored") {
    p.kind = ParamRef::kind_t::stored;
  } else if (kind == "delta") {
    p.kind = ParamRef::kind_t::delta;
  } else if (kind == "inline") {
    p.kind = ParamRef::kind_t::inline_;
  } else {
    raise(errc::parse, "unknown param kind: " + kind);
  }
  auto dt = dtype_from_name(j.at("dtype").get<std::string>());
  if (!dt) raise(errc::parse, "unknown param dtype");
  p.dt = *dt;
  p.shape = j.at("shape").get<std::vector<uint64_t>>();
  if (p.kind == ParamRef::kind_t::inline_) {
    p.payload = io::base64_decode(j.at("data").get<std::string>());
    Tensor t{p.dt, p.shape, p.payload};
    t.validate();
  } else {
    p.key = j.at("key").get<std::string>();
    if (!is_content_key(p.key)) raise(errc::parse, "malformed content key in param ref");
  }
  return p;
}

}  // namespace

std::string serialize_model(const ModelGraph& m) {
  m.validate();
  auto order = m.topo_order();
  std::vector<size_t> pos(m.layers.size());
  for (size_t k = 0; k < order.size(); ++k) pos[order[k]] = k;

  json layers = json::array();
  for (size_t idx : order) {
    const LayerNode& l = m.layers[idx];
    json jl;
    jl["layer_id"] = l.layer_id;
    jl["op_type"] = l.op_type;
    json attrs = json::object();
    for (const auto& [k, v] : l.attributes) attrs[k] = attr_to_json(v);
    jl["attributes"] = attrs;
    json params = json::object();
    for (const auto& [k, v] : l.params) params[k] = param_to_json(v);
    jl["params"] = params;
    layers.push_back(jl);
  }

  std::unordered_map<std::string_view, size_t> index;
  for (size_t i = 0; i < m.layers.size(); ++i) index[m.layers[i].layer_id] = i;
  auto sorted_edges = m.edges;
  std::sort(sorted_edges.begin(), sorted_edges.end(),
            [&](const auto& a, const auto& b) {
              auto ka = std::pair(pos[index.at(a.first)], pos[index.at(a.second)]);
              auto kb = std::pair(pos[index.at(b.first)], pos[index.at(b.second)]);
              return ka < kb;
            });
  json edges = json::array();
  for (const auto& e : sorted_edges) edges.push_back(json::array({e.first, e.second}));

  json root;
  root["edges"] = edges;
  root["format_version"] = kManifestVersion;
  root["layers"] = layers;
  root["model_name"] = m.model_name;
  root["model_type"] = m.model_type;
  return root.dump(2) + "\n";
}

ModelGraph deserialize_model(std::string_view text) {
  json root = json::parse(text, nullptr, false);
  if (root.is_discarded() || !root.is_object()) raise(errc::parse, "manifest is not valid JSON");
  try {
    int ver = root.at("format_version").get<int>();
    if (ver != kManifestVersion) {
      raise(errc::format_version, "manifest format version " + std::to_string(ver));
    }
    ModelGraph m;
    m.model_name = root.at("model_name").get<std::string>();
    m.model_type = root.at("model_type").get<std::string>();
    for (const auto& jl : root.at("layers")) {
      LayerNode l;
      l.layer_id = jl.at("layer_id").get<std::string>();
      l.op_type = jl.at("op_type").get<std::string>();
      for (const auto& [k, v] : jl.at("attributes").items()) l.attributes[k] = attr_from_json(v);
      for (const auto& [k, v] : jl.at("params").items()) l.params[k] = param_from_json(v);
      m.layers.push_back(std::move(l));
    }
    for (const auto& je : root.at("edges")) {
      if (!je.is_array() || je.size() != 2) raise(errc::parse, "edge must be a [src, dst] pair");
      m.edges.emplace_back(je[0].get<std::string>(), je[1].get<std::string>());
    }
    m.validate();
    return m;
  } catch (const json::exception& e) {
    raise(errc::parse, std::string("manifest: ") + e.what());
  }
}

}  // namespace modelvc
