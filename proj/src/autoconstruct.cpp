#include "modelvc/autoconstruct.hpp"

#include <algorithm>
#include <exception>
#include <tuple>

#include "modelvc/errors.hpp"

namespace modelvc {

PlacementDecision place_model(Repository& repo, const ModelGraph& incoming, double tau) {
  if (tau <= 0 || tau > 1) raise(errc::usage, "placement tau must be in (0, 1]");
  ModelSignature inc_ctx = model_signature(incoming, DiffMode::contextual);
  ModelSignature inc_str = model_signature(incoming, DiffMode::structural);

  std::vector<std::string> names = repo.graph().node_names();
  std::vector<PlacementScore> scores(names.size());
  std::exception_ptr first_error;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (size_t i = 0; i < names.size(); ++i) {
    try {
      ModelGraph m = repo.get_model(names[i]);
      PlacementScore s;
      s.name = names[i];
      s.contextual =
          divergence_from_signatures(inc_ctx, model_signature(m, DiffMode::contextual));
      s.structural =
          divergence_from_signatures(inc_str, model_signature(m, DiffMode::structural));
      scores[i] = std::move(s);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      {
        if (!first_error) first_error = std::current_exception();
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);

  std::sort(scores.begin(), scores.end(), [](const PlacementScore& a, const PlacementScore& b) {
    return std::tie(a.contextual, a.structural, a.name) <
           std::tie(b.contextual, b.structural, b.name);
  });

  PlacementDecision d;
  d.scores = std::move(scores);
  if (!d.scores.empty()) {
    const PlacementScore& best = d.scores.front();
    if (!(best.contextual >= tau && best.structural >= tau)) d.parent = best.name;
  }
  return d;
}

}  // namespace modelvc
