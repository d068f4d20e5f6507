#pragma once

#include <optional>
#include <string>
#include <vector>

#include "modelvc/diff.hpp"
#include "modelvc/repo.hpp"

namespace modelvc {

// ---- Automatic lineage placement ----
//
// Scores an incoming model against every registered model (contextual and
// structural divergence, both in [0, 1]) and proposes the closest one as its
// provenance parent — closest by contextual divergence, ties broken by
// structural divergence, then by name. When even the winner is distant
// (both divergences >= tau) the model is placed as a new root instead.
// Pairwise scoring is embarrassingly parallel and runs under OpenMP.

struct PlacementScore {
  std::string name;
  double contextual = 1.0;
  double structural = 1.0;
};

struct PlacementDecision {
  std::optional<std::string> parent;    // nullopt: place as root
  std::vector<PlacementScore> scores;   // ascending (contextual, structural, name)
};

inline constexpr double kDefaultPlacementTau = 0.9;

PlacementDecision place_model(Repository& repo, const ModelGraph& incoming,
                              double tau = kDefaultPlacementTau);

}  // namespace modelvc
