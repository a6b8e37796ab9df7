#include "ecgid/matcher.hpp"

#include <limits>

namespace ecgid {

void MatchThresholds::validate() const {
  if (!(prd_max > 0.0)) throw InvalidArgument("prd_max must be positive");
  if (!(cc_min >= -1.0 && cc_min <= 1.0)) throw InvalidArgument("cc_min must lie in [-1, 1]");
  if (std::abs(w_prd + w_cc - 1.0) > 1e-9) {
    throw InvalidArgument("w_prd + w_cc must equal 1");
  }
}

MatchResult best_match(const FeatureVector &query, std::span<const SubjectRecord> candidates,
                       const MatchThresholds &thresholds) {
  MatchResult result;
  result.candidates_scanned = candidates.size();
  const double query_energy = query.squaredNorm();
  if (!(query_energy > 0.0)) {
    // Every pair needs the probe energy; nothing is scorable.
    result.skipped = candidates.size();
    return result;
  }

  double best_hit = -std::numeric_limits<double>::infinity();
  double best_any = -std::numeric_limits<double>::infinity();
  std::optional<std::size_t> hit_index;
  std::optional<std::size_t> any_index;
  double hit_prd = 0, hit_cc = 0, any_prd = 0, any_cc = 0;

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto &f = candidates[i].vector;
    const double f_energy = f.squaredNorm();
    if (!(f_energy > 0.0)) {
      ++result.skipped;
      continue;
    }
    const double p = std::sqrt((query - f).squaredNorm() / query_energy) * 100.0;
    const double c = std::clamp(query.dot(f) / std::sqrt(query_energy * f_energy), -1.0, 1.0);
    const double conf = confidence(p, c, thresholds);
    if (conf > best_any) {
      best_any = conf;
      any_index = i;
      any_prd = p;
      any_cc = c;
    }
    if (p <= thresholds.prd_max && c >= thresholds.cc_min && conf > best_hit) {
      best_hit = conf;
      hit_index = i;
      hit_prd = p;
      hit_cc = c;
    }
  }

  if (hit_index) {
    result.hit_id = candidates[*hit_index].subject_id;
    result.candidate_index = hit_index;
    result.prd = hit_prd;
    result.cc = hit_cc;
    result.confidence = best_hit;
  } else if (any_index) {
    result.candidate_index = any_index;
    result.prd = any_prd;
    result.cc = any_cc;
    result.confidence = best_any;
  }
  return result;
}

}  // namespace ecgid
