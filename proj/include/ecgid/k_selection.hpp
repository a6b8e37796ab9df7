#ifndef ECGID_K_SELECTION_HPP
#define ECGID_K_SELECTION_HPP

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "ecgid/clustering.hpp"
#include "ecgid/types.hpp"

namespace ecgid {

struct ElbowPoint {
  int k = 0;
  double ssq = 0.0;
};

/// One independent kmeans_fit per k (all sharing options.seed), ascending k.
/// Requires a non-empty range with first >= 2 and last - 1 <= gallery size.
std::vector<ElbowPoint> elbow_curve(std::span<const SubjectRecord> gallery, KRange k_range,
                                    const KMeansOptions &options = {});

/// Interior k maximising ssq[i-1] - 2 ssq[i] + ssq[i+1]; smaller k wins ties.
/// Throws InvalidArgument for fewer than 3 points or non-ascending k.
int detect_knee(std::span<const ElbowPoint> curve);

/// Per-point silhouette s(i) = (b - a) / max(a, b); 0 for singleton clusters.
/// Labels need not be contiguous. Throws InvalidArgument with fewer than two
/// distinct labels.
std::vector<double> silhouette_values(std::span<const SubjectRecord> gallery,
                                      const Assignment &assignment);

double silhouette_avg(std::span<const SubjectRecord> gallery, const Assignment &assignment);

struct DecisionWeights {
  double time = 0.2;
  double accuracy = 0.5;
  double silhouette = 0.3;

  /// Throws InvalidArgument unless the weights sum to 1 within 1e-9.
  void validate() const;
};

struct KDecisionRow {
  int k = 0;
  double time_reduction_pct = 0.0;
  double accuracy_pct = 0.0;
  double silhouette_avg = 0.0;
  double weighted_score = 0.0;
};

struct KDecision {
  int best_k = 0;
  std::vector<KDecisionRow> rows;
};

/// Scores every row and returns the argmax (smaller k on ties). Throws
/// InvalidArgument for an empty row list.
KDecision decide_k(std::vector<KDecisionRow> rows, const DecisionWeights &weights = {});

/// The `count` k values with the highest silhouette (smaller k on ties).
std::vector<int> silhouette_candidates(std::span<const KDecisionRow> rows, std::size_t count = 3);

void write_elbow_csv(std::ostream &out, std::span<const ElbowPoint> curve);

/// Header `k,time_reduction,accuracy,silhouette,score`.
void write_decision_csv(std::ostream &out, std::span<const KDecisionRow> rows);

/// Reads decision rows; the `score` column is optional and ignored (it is
/// recomputed by decide_k).
std::vector<KDecisionRow> parse_decision_csv(std::string_view text);
std::vector<KDecisionRow> load_decision_csv(const std::filesystem::path &path);

}  // namespace ecgid

#endif  // ECGID_K_SELECTION_HPP
