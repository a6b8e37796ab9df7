#ifndef ECGID_MATCHER_HPP
#define ECGID_MATCHER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "ecgid/error.hpp"
#include "ecgid/types.hpp"

namespace ecgid {

/// Acceptance thresholds and confidence weights for a probe/template pair.
struct MatchThresholds {
  double prd_max = 14.0;
  double cc_min = 0.995;
  double w_prd = 0.5;
  double w_cc = 0.5;

  /// Throws InvalidArgument unless prd_max > 0, cc_min in [-1, 1] and the
  /// weights sum to 1.
  void validate() const;
};

/// Percentage root-mean-square difference of template `f` against probe `x`,
/// normalised by the probe energy. Not symmetric. Throws InvalidArgument when
/// `x` is the zero vector.
template <typename DerivedX, typename DerivedF>
typename DerivedX::Scalar prd(const Eigen::MatrixBase<DerivedX> &x,
                              const Eigen::MatrixBase<DerivedF> &f) {
  const auto energy = x.squaredNorm();
  if (!(energy > 0)) throw InvalidArgument("prd: probe is the zero vector");
  return std::sqrt((x - f).squaredNorm() / energy) * 100;
}

/// Normalised cross-correlation, in [-1, 1]. Throws InvalidArgument when
/// either vector is zero.
template <typename DerivedX, typename DerivedF>
typename DerivedX::Scalar cc(const Eigen::MatrixBase<DerivedX> &x,
                             const Eigen::MatrixBase<DerivedF> &f) {
  const auto denom = std::sqrt(x.squaredNorm() * f.squaredNorm());
  if (!(denom > 0)) throw InvalidArgument("cc: zero vector has no correlation");
  using Scalar = typename DerivedX::Scalar;
  const Scalar r = x.dot(f) / denom;
  return std::clamp(r, Scalar(-1), Scalar(1));
}

/// w_prd * (100 - prd) + w_cc * cc. PRD is in percent and CC is not; the
/// mix is kept as-is.
inline double confidence(double prd_val, double cc_val, const MatchThresholds &t) {
  return t.w_prd * (100.0 - prd_val) + t.w_cc * cc_val;
}

struct MatchResult {
  /// Set only when some candidate passed both thresholds.
  std::optional<std::string> hit_id;
  /// Scores of the hit, or of the best-confidence candidate when there is no
  /// hit; NaN when nothing could be scored.
  double prd = std::nan("");
  double cc = std::nan("");
  double confidence = std::nan("");
  /// Index of the reported candidate within the scanned list.
  std::optional<std::size_t> candidate_index;
  std::size_t candidates_scanned = 0;
  /// Candidates that could not be scored (zero vectors).
  std::size_t skipped = 0;
};

/// Highest-confidence candidate among those with prd <= prd_max and
/// cc >= cc_min; ties go to the earlier candidate.
MatchResult best_match(const FeatureVector &query, std::span<const SubjectRecord> candidates,
                       const MatchThresholds &thresholds);

}  // namespace ecgid

#endif  // ECGID_MATCHER_HPP
