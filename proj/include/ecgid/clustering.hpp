#ifndef ECGID_CLUSTERING_HPP
#define ECGID_CLUSTERING_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "ecgid/types.hpp"

namespace ecgid {

struct KMeansOptions {
  /// Convergence threshold on the largest centroid displacement.
  double tol = 1e-4;
  int max_iter = 300;
  std::uint64_t seed = 0;
};

/// Fitted k-means model. Centroids are stored one per row.
struct ClusterModel {
  int k = 0;
  CentroidMatrix centroids;
  /// Final within-cluster sum of squared Euclidean distances.
  double ssq = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  /// SSQ after every assignment step, ending with the final SSQ.
  std::vector<double> ssq_trace;

  FeatureVector centroid(int label) const { return centroids.row(label).transpose(); }
};

/// One label in [0, k) per gallery record, index-aligned.
using Assignment = std::vector<int>;

struct KMeansFit {
  ClusterModel model;
  Assignment assignment;
};

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar squared_distance(const Eigen::MatrixBase<DerivedA> &a,
                                           const Eigen::MatrixBase<DerivedB> &b) {
  return (a - b).squaredNorm();
}

/// Nearest centroid by Euclidean distance; the lowest label wins ties.
template <typename Derived>
int nearest_centroid(const Eigen::MatrixBase<Derived> &v, const CentroidMatrix &centroids) {
  int best = 0;
  double best_d = squared_distance(centroids.row(0).transpose(), v);
  for (int c = 1; c < centroids.rows(); ++c) {
    const double d = squared_distance(centroids.row(c).transpose(), v);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

/// Lloyd's algorithm from a seeded k-means++ start. Empty clusters are
/// re-seeded with the point farthest from its centroid. Throws
/// InvalidArgument when k == 0 or the gallery has fewer than k records.
KMeansFit kmeans_fit(std::span<const SubjectRecord> gallery, int k,
                     const KMeansOptions &options = {});

int assign(const FeatureVector &vector, const ClusterModel &model);

Assignment assign_all(std::span<const SubjectRecord> gallery, const ClusterModel &model);

double ssq(std::span<const SubjectRecord> gallery, const ClusterModel &model,
           const Assignment &assignment);

}  // namespace ecgid

#endif  // ECGID_CLUSTERING_HPP
