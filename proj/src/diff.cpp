#include "modelvc/diff.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "modelvc/errors.hpp"
#include "modelvc/hash.hpp"
#include "modelvc/tensor.hpp"

namespace modelvc {

const char* diff_mode_name(DiffMode m) {
  return m == DiffMode::structural ? "structural" : "contextual";
}

std::string layer_signature(const LayerNode& l, DiffMode mode) {
  sha256_stream h;
  auto field = [&](std::string_view s) {
    std::string len;
    put_u64le(len, s.size());
    h.update(len);
    h.update(s);
  };
  field(l.op_type);
  for (const auto& [k, v] : l.attributes) {
    field(k);
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, bool>) {
            field(x ? "b1" : "b0");
          } else if constexpr (std::is_same_v<T, int64_t>) {
            field("i" + std::to_string(x));
          } else if constexpr (std::is_same_v<T, double>) {
            uint64_t bits;
            static_assert(sizeof(bits) == sizeof(x));
            std::memcpy(&bits, &x, 8);
            std::string enc = "d";
            put_u64le(enc, bits);
            field(enc);
          } else {
            field("s" + x);
          }
        },
        v);
  }
  for (const auto& [name, p] : l.params) {
    field(name);
    std::string enc;
    enc += char(static_cast<uint8_t>(p.dt));
    put_u64le(enc, p.shape.size());
    for (uint64_t d : p.shape) put_u64le(enc, d);
    field(enc);
    if (mode == DiffMode::contextual) {
      if (p.kind == ParamRef::kind_t::inline_) {
        Tensor t{p.dt, p.shape, p.payload};
        field(content_key(t));
      } else {
        field(p.key);
      }
    }
  }
  return h.hex_digest();
}

namespace {

struct Prepared {
  std::vector<size_t> order;                      // topo order (layer indices)
  std::vector<std::string> ids;                   // layer ids by topo position
  std::vector<std::string> sig;                   // signatures by topo position
  std::vector<std::pair<size_t, size_t>> edges;   // position pairs, sorted
};

Prepared prepare(const ModelGraph& m, DiffMode mode) {
  Prepared p;
  p.order = m.topo_order();
  std::unordered_map<std::string_view, size_t> pos;
  p.ids.reserve(p.order.size());
  p.sig.reserve(p.order.size());
  for (size_t k = 0; k < p.order.size(); ++k) {
    const LayerNode& l = m.layers[p.order[k]];
    pos[l.layer_id] = k;
    p.ids.push_back(l.layer_id);
    p.sig.push_back(layer_signature(l, mode));
  }
  for (const auto& e : m.edges) {
    p.edges.emplace_back(pos.at(e.first), pos.at(e.second));
  }
  std::sort(p.edges.begin(), p.edges.end());
  return p;
}

// Greedy pass: edge-driven matching over signature-equal buckets (committing
// only endpoint-consistent pairs), then leftover nodes per signature bucket.
// Its pairs seed the tie-break of the maximal matching below.
std::vector<int64_t> greedy_raw_matching(const std::vector<std::string>& s1,
                                         const std::vector<std::pair<size_t, size_t>>& e1,
                                         const std::vector<std::string>& s2,
                                         const std::vector<std::pair<size_t, size_t>>& e2) {
  std::vector<int64_t> m1to2(s1.size(), -1), m2to1(s2.size(), -1);
  auto ok = [&](size_t u, size_t v) {
    return (m1to2[u] < 0 && m2to1[v] < 0) || m1to2[u] == int64_t(v);
  };
  auto commit = [&](size_t u, size_t v) {
    m1to2[u] = int64_t(v);
    m2to1[v] = int64_t(u);
  };

  using EdgeSig = std::pair<std::string_view, std::string_view>;
  std::map<EdgeSig, std::pair<std::vector<size_t>, std::vector<size_t>>> edge_buckets;
  for (size_t k = 0; k < e1.size(); ++k) {
    edge_buckets[{s1[e1[k].first], s1[e1[k].second]}].first.push_back(k);
  }
  for (size_t k = 0; k < e2.size(); ++k) {
    edge_buckets[{s2[e2[k].first], s2[e2[k].second]}].second.push_back(k);
  }
  for (auto& [sig, lists] : edge_buckets) {
    auto& [l1, l2] = lists;
    std::vector<bool> used(l2.size(), false);
    for (size_t a : l1) {
      for (size_t bi = 0; bi < l2.size(); ++bi) {
        if (used[bi]) continue;
        auto [u1, v1] = e1[a];
        auto [u2, v2] = e2[l2[bi]];
        if (ok(u1, u2) && ok(v1, v2)) {
          commit(u1, u2);
          commit(v1, v2);
          used[bi] = true;
          break;
        }
      }
    }
  }

  std::map<std::string_view, std::pair<std::vector<size_t>, std::vector<size_t>>> node_buckets;
  for (size_t i = 0; i < s1.size(); ++i) {
    if (m1to2[i] < 0) node_buckets[s1[i]].first.push_back(i);
  }
  for (size_t j = 0; j < s2.size(); ++j) {
    if (m2to1[j] < 0) node_buckets[s2[j]].second.push_back(j);
  }
  for (auto& [sig, lists] : node_buckets) {
    auto& [l1, l2] = lists;
    size_t k = std::min(l1.size(), l2.size());
    for (size_t i = 0; i < k; ++i) commit(l1[i], l2[i]);
  }
  return m1to2;
}

// Maximum order-consistent matching of the two signature sequences; among
// maxima prefers the one keeping the most greedy-pass pairs.
std::vector<int64_t> maximal_matching(const std::vector<std::string>& s1,
                                      const std::vector<std::string>& s2,
                                      const std::vector<int64_t>& raw) {
  size_t n = s1.size(), m = s2.size();
  std::vector<uint32_t> len((n + 1) * (m + 1), 0), bon((n + 1) * (m + 1), 0);
  auto at = [m](size_t i, size_t j) { return i * (m + 1) + j; };
  for (size_t i = n; i-- > 0;) {
    for (size_t j = m; j-- > 0;) {
      uint32_t bl = len[at(i + 1, j)], bb = bon[at(i + 1, j)];
      if (std::pair(len[at(i, j + 1)], bon[at(i, j + 1)]) > std::pair(bl, bb)) {
        bl = len[at(i, j + 1)];
        bb = bon[at(i, j + 1)];
      }
      if (s1[i] == s2[j]) {
        uint32_t ml = len[at(i + 1, j + 1)] + 1;
        uint32_t mb = bon[at(i + 1, j + 1)] + (raw[i] == int64_t(j) ? 1 : 0);
        if (std::pair(ml, mb) > std::pair(bl, bb)) {
          bl = ml;
          bb = mb;
        }
      }
      len[at(i, j)] = bl;
      bon[at(i, j)] = bb;
    }
  }
  std::vector<int64_t> m1to2(n, -1);
  size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (s1[i] == s2[j]) {
      uint32_t ml = len[at(i + 1, j + 1)] + 1;
      uint32_t mb = bon[at(i + 1, j + 1)] + (raw[i] == int64_t(j) ? 1 : 0);
      if (ml == len[at(i, j)] && mb == bon[at(i, j)]) {
        m1to2[i] = int64_t(j);
        ++i, ++j;
        continue;
      }
    }
    if (len[at(i + 1, j)] == len[at(i, j)] && bon[at(i + 1, j)] == bon[at(i, j)]) {
      ++i;
    } else {
      ++j;
    }
  }
  return m1to2;
}

// Both the greedy pass (side-1-driven commit order) and the DP tie-break
// (advance i before j on ties) are direction-biased, so among equally maximal
// matchings the two argument orders could select matchings inducing different
// edge-match counts. Orient every pair canonically (by signature sequence,
// then edge list) and mirror the mapping back, so swapping the arguments
// yields the exact inverse matching and divergence is symmetric.
bool canonical_swap(const std::vector<std::string>& s1,
                    const std::vector<std::pair<size_t, size_t>>& e1,
                    const std::vector<std::string>& s2,
                    const std::vector<std::pair<size_t, size_t>>& e2) {
  if (s1 != s2) return s2 < s1;
  return e2 < e1;
}

std::vector<int64_t> invert_matching(const std::vector<int64_t>& m2to1, size_t n1) {
  std::vector<int64_t> m1to2(n1, -1);
  for (size_t j = 0; j < m2to1.size(); ++j) {
    if (m2to1[j] >= 0) m1to2[size_t(m2to1[j])] = int64_t(j);
  }
  return m1to2;
}

std::vector<int64_t> match_positions(const Prepared& p1, const Prepared& p2) {
  if (canonical_swap(p1.sig, p1.edges, p2.sig, p2.edges)) {
    auto raw = greedy_raw_matching(p2.sig, p2.edges, p1.sig, p1.edges);
    return invert_matching(maximal_matching(p2.sig, p1.sig, raw), p1.sig.size());
  }
  auto raw = greedy_raw_matching(p1.sig, p1.edges, p2.sig, p2.edges);
  return maximal_matching(p1.sig, p2.sig, raw);
}

bool multisets_equal(std::vector<std::string> a, std::vector<std::string> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

size_t induced_edge_matches(const std::vector<int64_t>& m1to2,
                            const std::vector<std::pair<size_t, size_t>>& e1,
                            const std::vector<std::pair<size_t, size_t>>& e2) {
  std::set<std::pair<size_t, size_t>> set2(e2.begin(), e2.end());
  size_t matched = 0;
  for (const auto& [u, v] : e1) {
    if (m1to2[u] >= 0 && m1to2[v] >= 0 &&
        set2.count({size_t(m1to2[u]), size_t(m1to2[v])})) {
      ++matched;
    }
  }
  return matched;
}

double score(size_t matched_edges, size_t n_e1, size_t n_e2, bool nodes_equal) {
  size_t denom = n_e1 + n_e2;
  if (denom == 0) return nodes_equal ? 0.0 : 1.0;
  size_t unmatched = (n_e1 - matched_edges) + (n_e2 - matched_edges);
  return double(unmatched) / double(denom);
}

}  // namespace

double DiffResult::divergence() const {
  return score(matches_e.size(), edge_count_1, edge_count_2, node_multisets_equal);
}

DiffResult module_diff(const ModelGraph& m1, const ModelGraph& m2, DiffMode mode) {
  Prepared p1 = prepare(m1, mode), p2 = prepare(m2, mode);
  auto m1to2 = match_positions(p1, p2);

  DiffResult d;
  d.mode = mode;
  d.edge_count_1 = p1.edges.size();
  d.edge_count_2 = p2.edges.size();
  d.node_multisets_equal = multisets_equal(p1.sig, p2.sig);

  std::vector<bool> matched2(p2.sig.size(), false);
  for (size_t i = 0; i < m1to2.size(); ++i) {
    if (m1to2[i] >= 0) {
      d.matches_n.emplace_back(p1.ids[i], p2.ids[size_t(m1to2[i])]);
      matched2[size_t(m1to2[i])] = true;
    } else {
      d.del_n.push_back(p1.ids[i]);
    }
  }
  for (size_t j = 0; j < p2.sig.size(); ++j) {
    if (!matched2[j]) d.add_n.push_back(p2.ids[j]);
  }

  std::set<std::pair<size_t, size_t>> set2(p2.edges.begin(), p2.edges.end());
  std::set<std::pair<size_t, size_t>> used2;
  for (const auto& [u, v] : p1.edges) {
    if (m1to2[u] >= 0 && m1to2[v] >= 0) {
      std::pair<size_t, size_t> e2{size_t(m1to2[u]), size_t(m1to2[v])};
      if (set2.count(e2)) {
        d.matches_e.push_back({{p1.ids[u], p1.ids[v]}, {p2.ids[e2.first], p2.ids[e2.second]}});
        used2.insert(e2);
        continue;
      }
    }
    d.del_e.push_back({p1.ids[u], p1.ids[v]});
  }
  for (const auto& [u, v] : p2.edges) {
    if (!used2.count({u, v})) d.add_e.push_back({p2.ids[u], p2.ids[v]});
  }
  return d;
}

DivergenceScore divergence(const ModelGraph& m1, const ModelGraph& m2) {
  DivergenceScore s;
  s.structural = module_diff(m1, m2, DiffMode::structural).divergence();
  s.contextual = module_diff(m1, m2, DiffMode::contextual).divergence();
  return s;
}

ModelGraph apply_diff(const ModelGraph& m1, const ModelGraph& m2, const DiffResult& d) {
  ModelGraph out;
  out.model_name = m2.model_name;
  out.model_type = m2.model_type;

  std::unordered_map<std::string, std::string> rename;   // m1 id -> m2 id
  for (const auto& [a, b] : d.matches_n) rename[a] = b;

  std::set<std::string> added(d.add_n.begin(), d.add_n.end());
  for (const auto& l : m1.layers) {
    auto it = rename.find(l.layer_id);
    if (it == rename.end()) continue;   // deleted
    LayerNode copy = l;
    copy.layer_id = it->second;
    out.layers.push_back(std::move(copy));
  }
  for (const auto& l : m2.layers) {
    if (added.count(l.layer_id)) out.layers.push_back(l);
  }

  for (const auto& [e1, e2] : d.matches_e) {
    (void)e1;
    out.edges.push_back(e2);
  }
  for (const auto& e : d.add_e) out.edges.push_back(e);
  out.validate();
  return out;
}

std::string diff_report(const DiffResult& d) {
  std::ostringstream os;
  os << diff_mode_name(d.mode) << " diff: " << d.matches_n.size() << " matched layer(s), "
     << d.del_n.size() << " deleted, " << d.add_n.size() << " added; " << d.matches_e.size()
     << " matched edge(s), " << d.del_e.size() << " deleted, " << d.add_e.size() << " added\n";
  for (const auto& [a, b] : d.matches_n) {
    os << "  match " << a << (a == b ? "" : " ~ " + b) << "\n";
  }
  for (const auto& id : d.del_n) os << "  - layer " << id << "\n";
  for (const auto& id : d.add_n) os << "  + layer " << id << "\n";
  for (const auto& e : d.del_e) os << "  - edge " << e.first << " -> " << e.second << "\n";
  for (const auto& e : d.add_e) os << "  + edge " << e.first << " -> " << e.second << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "  divergence %.6f", d.divergence());
  os << buf << "\n";
  return os.str();
}

ModelSignature model_signature(const ModelGraph& m, DiffMode mode) {
  Prepared p = prepare(m, mode);
  return ModelSignature{std::move(p.sig), std::move(p.edges)};
}

double divergence_from_signatures(const ModelSignature& a, const ModelSignature& b) {
  if (canonical_swap(a.seq, a.edges, b.seq, b.edges)) {
    return divergence_from_signatures(b, a);
  }
  auto raw = greedy_raw_matching(a.seq, a.edges, b.seq, b.edges);
  auto m1to2 = maximal_matching(a.seq, b.seq, raw);
  size_t matched = induced_edge_matches(m1to2, a.edges, b.edges);
  return score(matched, a.edges.size(), b.edges.size(),
               multisets_equal(a.seq, b.seq));
}

}  // namespace modelvc
