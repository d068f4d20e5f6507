#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "modelvc/diff.hpp"
#include "modelvc/errors.hpp"

using namespace modelvc;

namespace {

LayerNode layer(std::string id, std::string op, int64_t units = 0) {
  LayerNode l;
  l.layer_id = std::move(id);
  l.op_type = std::move(op);
  if (units) l.attributes["units"] = units;
  return l;
}

ModelGraph chain(std::vector<std::pair<std::string, std::string>> id_ops) {
  ModelGraph m;
  m.model_name = "m";
  m.model_type = "t";
  for (auto& [id, op] : id_ops) m.layers.push_back(layer(id, op));
  for (size_t i = 1; i < id_ops.size(); ++i) {
    m.edges.emplace_back(id_ops[i - 1].first, id_ops[i].first);
  }
  return m;
}

// Exhaustive oracle for the maximum order-consistent matching size: plain
// LCS over the topo-ordered signature sequences.
size_t lcs_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::vector<size_t>> dp(a.size() + 1, std::vector<size_t>(b.size() + 1, 0));
  for (size_t i = a.size(); i-- > 0;) {
    for (size_t j = b.size(); j-- > 0;) {
      dp[i][j] = std::max(dp[i + 1][j], dp[i][j + 1]);
      if (a[i] == b[j]) dp[i][j] = std::max(dp[i][j], dp[i + 1][j + 1] + 1);
    }
  }
  return dp[0][0];
}

std::vector<std::string> topo_signatures(const ModelGraph& m, DiffMode mode) {
  std::vector<std::string> out;
  for (size_t i : m.topo_order()) out.push_back(layer_signature(m.layers[i], mode));
  return out;
}

ModelGraph random_dag(std::mt19937_64& rng, size_t n) {
  static const char* ops[] = {"conv", "relu", "pool"};
  ModelGraph m;
  m.model_name = "r";
  m.model_type = "t";
  for (size_t i = 0; i < n; ++i) {
    LayerNode l = layer("n" + std::to_string(i), ops[rng() % 3]);
    if (rng() % 2) l.attributes["k"] = int64_t(rng() % 3);
    m.layers.push_back(l);
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (rng() % 3 == 0) {
        m.edges.emplace_back("n" + std::to_string(i), "n" + std::to_string(j));
      }
    }
  }
  return m;
}

void check_partition(const ModelGraph& m1, const ModelGraph& m2, const DiffResult& d) {
  std::multiset<std::string> left, m1_ids;
  for (auto& [a, b] : d.matches_n) left.insert(a);
  for (auto& id : d.del_n) left.insert(id);
  for (auto& l : m1.layers) m1_ids.insert(l.layer_id);
  CHECK(left == m1_ids);

  std::multiset<std::string> right, m2_ids;
  for (auto& [a, b] : d.matches_n) right.insert(b);
  for (auto& id : d.add_n) right.insert(id);
  for (auto& l : m2.layers) m2_ids.insert(l.layer_id);
  CHECK(right == m2_ids);

  std::multiset<EdgeIds> le, e1;
  for (auto& [a, b] : d.matches_e) le.insert(a);
  for (auto& e : d.del_e) le.insert(e);
  for (auto& e : m1.edges) e1.insert(e);
  CHECK(le == e1);

  std::multiset<EdgeIds> re, e2;
  for (auto& [a, b] : d.matches_e) re.insert(b);
  for (auto& e : d.add_e) re.insert(e);
  for (auto& e : m2.edges) e2.insert(e);
  CHECK(re == e2);

  // Every matched edge's endpoints are matched nodes, pairwise consistent.
  std::map<std::string, std::string> node_map(d.matches_n.begin(), d.matches_n.end());
  for (auto& [ea, eb] : d.matches_e) {
    REQUIRE(node_map.count(ea.first));
    REQUIRE(node_map.count(ea.second));
    CHECK(node_map[ea.first] == eb.first);
    CHECK(node_map[ea.second] == eb.second);
  }
}

}  // namespace

TEST_CASE("layer_signature separates what must differ, ignores what must not") {
  LayerNode a = layer("x", "conv", 8);
  LayerNode b = layer("completely-different-id", "conv", 8);
  // Ids never enter the signature.
  CHECK(layer_signature(a, DiffMode::structural) == layer_signature(b, DiffMode::structural));
  CHECK(layer_signature(a, DiffMode::contextual) == layer_signature(b, DiffMode::contextual));

  LayerNode c = layer("x", "conv", 9);
  CHECK(layer_signature(a, DiffMode::structural) != layer_signature(c, DiffMode::structural));
  LayerNode d = layer("x", "pool", 8);
  CHECK(layer_signature(a, DiffMode::structural) != layer_signature(d, DiffMode::structural));

  // Attribute types are distinguished even when the text form coincides.
  LayerNode e1 = layer("x", "op");
  e1.attributes["flag"] = true;
  LayerNode e2 = layer("x", "op");
  e2.attributes["flag"] = std::string("true");
  CHECK(layer_signature(e1, DiffMode::structural) != layer_signature(e2, DiffMode::structural));
  LayerNode e3 = layer("x", "op");
  e3.attributes["flag"] = int64_t(1);
  LayerNode e4 = layer("x", "op");
  e4.attributes["flag"] = 1.0;
  CHECK(layer_signature(e3, DiffMode::structural) != layer_signature(e4, DiffMode::structural));

  // Params: shape and dtype are structural; content keys only contextual.
  ParamRef p1;
  p1.kind = ParamRef::kind_t::stored;
  p1.dt = dtype::f32;
  p1.shape = {4};
  p1.key = std::string(64, 'a');
  ParamRef p2 = p1;
  p2.key = std::string(64, 'b');
  LayerNode f1 = layer("x", "op");
  f1.params["w"] = p1;
  LayerNode f2 = layer("x", "op");
  f2.params["w"] = p2;
  CHECK(layer_signature(f1, DiffMode::structural) == layer_signature(f2, DiffMode::structural));
  CHECK(layer_signature(f1, DiffMode::contextual) != layer_signature(f2, DiffMode::contextual));

  ParamRef p3 = p1;
  p3.shape = {5};
  LayerNode f3 = layer("x", "op");
  f3.params["w"] = p3;
  CHECK(layer_signature(f1, DiffMode::structural) != layer_signature(f3, DiffMode::structural));

  // Field boundaries are length-delimited: ("ab","c") != ("a","bc").
  LayerNode g1 = layer("x", "ab");
  g1.attributes["c"] = true;
  LayerNode g2 = layer("x", "a");
  g2.attributes["bc"] = true;
  CHECK(layer_signature(g1, DiffMode::structural) != layer_signature(g2, DiffMode::structural));
}

TEST_CASE("identical models diff to an empty change set") {
  ModelGraph m = chain({{"a", "conv"}, {"b", "relu"}, {"c", "pool"}});
  for (DiffMode mode : {DiffMode::structural, DiffMode::contextual}) {
    DiffResult d = module_diff(m, m, mode);
    CHECK(d.matches_n.size() == 3);
    CHECK(d.del_n.empty());
    CHECK(d.add_n.empty());
    CHECK(d.matches_e.size() == 2);
    CHECK(d.del_e.empty());
    CHECK(d.add_e.empty());
    CHECK(d.divergence() == 0.0);
    // Identity mapping on ids.
    for (auto& [a, b] : d.matches_n) CHECK(a == b);
  }
}

TEST_CASE("hand-computed divergence for a one-layer replacement in a chain") {
  // a-b-c-d-e versus a-B-c-d-e (B differs structurally): matching loses b,
  // breaking edges (a,b) and (b,c) on both sides: 4 changed / 8 total = 0.5.
  ModelGraph m1 = chain({{"a", "conv"}, {"b", "relu"}, {"c", "pool"}, {"d", "conv"}, {"e", "relu"}});
  ModelGraph m2 = chain({{"a", "conv"}, {"b", "tanh"}, {"c", "pool"}, {"d", "conv"}, {"e", "relu"}});
  DiffResult d = module_diff(m1, m2, DiffMode::structural);
  CHECK(d.matches_n.size() == 4);
  CHECK(d.del_n == std::vector<std::string>{"b"});
  CHECK(d.add_n == std::vector<std::string>{"b"});
  CHECK(d.del_e.size() == 2);
  CHECK(d.add_e.size() == 2);
  CHECK(d.divergence() == doctest::Approx(0.5));
  check_partition(m1, m2, d);

  // Appending one layer to a 4-edge chain: 1 new edge / 9 total.
  ModelGraph m3 = m1;
  m3.layers.push_back(layer("f", "pool"));
  m3.edges.emplace_back("e", "f");
  DiffResult d2 = module_diff(m1, m3, DiffMode::structural);
  CHECK(d2.matches_n.size() == 5);
  CHECK(d2.add_n == std::vector<std::string>{"f"});
  CHECK(d2.divergence() == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("alternating signature chains match by order-consistent LCS") {
  // ABAB vs BABA: best order-consistent matching is 3 (drop one end).
  ModelGraph m1 = chain({{"1", "A"}, {"2", "B"}, {"3", "A"}, {"4", "B"}});
  ModelGraph m2 = chain({{"1", "B"}, {"2", "A"}, {"3", "B"}, {"4", "A"}});
  DiffResult d = module_diff(m1, m2, DiffMode::structural);
  CHECK(d.matches_n.size() == 3);
  CHECK(d.del_n.size() == 1);
  CHECK(d.add_n.size() == 1);
  check_partition(m1, m2, d);
}

TEST_CASE("matching size equals the LCS oracle on random DAG pairs") {
  std::mt19937_64 rng(123);
  for (int iter = 0; iter < 60; ++iter) {
    ModelGraph m1 = random_dag(rng, 2 + rng() % 7);
    ModelGraph m2 = random_dag(rng, 2 + rng() % 7);
    for (DiffMode mode : {DiffMode::structural, DiffMode::contextual}) {
      DiffResult d = module_diff(m1, m2, mode);
      CHECK(d.matches_n.size() ==
            lcs_oracle(topo_signatures(m1, mode), topo_signatures(m2, mode)));
      check_partition(m1, m2, d);
      // Matched pairs carry equal signatures.
      for (auto& [a, b] : d.matches_n) {
        CHECK(layer_signature(*m1.find_layer(a), mode) ==
              layer_signature(*m2.find_layer(b), mode));
      }
    }
  }
}

TEST_CASE("divergence is symmetric") {
  std::mt19937_64 rng(321);
  for (int iter = 0; iter < 20; ++iter) {
    ModelGraph m1 = random_dag(rng, 2 + rng() % 6);
    ModelGraph m2 = random_dag(rng, 2 + rng() % 6);
    DivergenceScore ab = divergence(m1, m2);
    DivergenceScore ba = divergence(m2, m1);
    CHECK(ab.structural == doctest::Approx(ba.structural));
    CHECK(ab.contextual == doctest::Approx(ba.contextual));
    CHECK(ab.structural >= 0.0);
    CHECK(ab.structural <= 1.0);
    // Contextual identity is at least as strict as structural.
    CHECK(ab.contextual >= ab.structural - 1e-12);
  }
}

TEST_CASE("edgeless graphs use the multiset convention") {
  ModelGraph a, b;
  a.model_name = b.model_name = "m";
  a.model_type = b.model_type = "t";
  a.layers = {layer("x", "conv"), layer("y", "relu")};
  b.layers = {layer("p", "relu"), layer("q", "conv")};
  // Same signature multisets, different ids: divergence 0.
  CHECK(module_diff(a, b, DiffMode::structural).divergence() == 0.0);

  ModelGraph c = b;
  c.layers[0] = layer("p", "tanh");
  CHECK(module_diff(a, c, DiffMode::structural).divergence() == 1.0);

  // Empty vs empty.
  ModelGraph e1, e2;
  e1.model_name = e2.model_name = "m";
  e1.model_type = e2.model_type = "t";
  CHECK(module_diff(e1, e2, DiffMode::structural).divergence() == 0.0);

  // Edgeless vs edged: divergence over edge counts.
  ModelGraph edged = chain({{"x", "conv"}, {"y", "relu"}});
  DiffResult d = module_diff(a, edged, DiffMode::structural);
  CHECK(d.divergence() == doctest::Approx(1.0));  // 1 added edge / 1 total
}

TEST_CASE("apply_diff reconstructs the target graph") {
  std::mt19937_64 rng(555);
  for (int iter = 0; iter < 20; ++iter) {
    ModelGraph m1 = random_dag(rng, 2 + rng() % 6);
    ModelGraph m2 = random_dag(rng, 2 + rng() % 6);
    DiffResult d = module_diff(m1, m2, DiffMode::structural);
    ModelGraph rebuilt = apply_diff(m1, m2, d);
    rebuilt.validate();
    DiffResult recheck = module_diff(rebuilt, m2, DiffMode::structural);
    CHECK(recheck.del_n.empty());
    CHECK(recheck.add_n.empty());
    CHECK(recheck.del_e.empty());
    CHECK(recheck.add_e.empty());
    CHECK(recheck.divergence() == 0.0);
  }
}

TEST_CASE("diff_report mentions every change") {
  ModelGraph m1 = chain({{"a", "conv"}, {"b", "relu"}});
  ModelGraph m2 = chain({{"a", "conv"}, {"c", "pool"}});
  DiffResult d = module_diff(m1, m2, DiffMode::structural);
  std::string rep = diff_report(d);
  CHECK(rep.find("b") != std::string::npos);
  CHECK(rep.find("c") != std::string::npos);
  CHECK(rep.find("divergence") != std::string::npos);
}

TEST_CASE("signature-cache scoring equals the full diff") {
  std::mt19937_64 rng(777);
  for (int iter = 0; iter < 30; ++iter) {
    ModelGraph m1 = random_dag(rng, 2 + rng() % 7);
    ModelGraph m2 = random_dag(rng, 2 + rng() % 7);
    for (DiffMode mode : {DiffMode::structural, DiffMode::contextual}) {
      ModelSignature s1 = model_signature(m1, mode);
      ModelSignature s2 = model_signature(m2, mode);
      CHECK(divergence_from_signatures(s1, s2) ==
            doctest::Approx(module_diff(m1, m2, mode).divergence()).epsilon(1e-12));
    }
  }
}
