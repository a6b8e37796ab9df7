#include "ecgid/clustering.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "ecgid/error.hpp"

namespace ecgid {
namespace {

// Greedy k-means++: each step draws several D^2-weighted candidates and keeps
// the one that leaves the smallest total potential.
CentroidMatrix kmeanspp_init(std::span<const SubjectRecord> gallery, int k,
                             std::mt19937_64 &rng) {
  const auto n = gallery.size();
  const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));
  CentroidMatrix centroids(k, kFeatureDim);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  centroids.row(0) = gallery[pick(rng)].vector.transpose();

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = squared_distance(gallery[i].vector, centroids.row(0).transpose());
  }
  std::vector<double> candidate_d2(n);
  std::vector<double> best_d2(n);
  for (int c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    if (!(total > 0.0)) {
      // Every point already coincides with a centroid.
      centroids.row(c) = gallery[pick(rng)].vector.transpose();
      continue;
    }
    std::uniform_real_distribution<double> u(0.0, total);
    std::size_t best = 0;
    double best_potential = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
      double target = u(rng);
      std::size_t chosen = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        chosen = i;
        target -= d2[i];
        if (target < 0.0) break;
      }
      double potential = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        candidate_d2[i] =
            std::min(d2[i], squared_distance(gallery[i].vector, gallery[chosen].vector));
        potential += candidate_d2[i];
      }
      if (potential < best_potential) {
        best_potential = potential;
        best = chosen;
        best_d2.swap(candidate_d2);
      }
    }
    centroids.row(c) = gallery[best].vector.transpose();
    d2.swap(best_d2);
  }
  return centroids;
}

double assign_into(std::span<const SubjectRecord> gallery, const CentroidMatrix &centroids,
                   Assignment &labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    const int label = nearest_centroid(gallery[i].vector, centroids);
    labels[i] = label;
    total += squared_distance(gallery[i].vector, centroids.row(label).transpose());
  }
  return total;
}

// Means of the assigned points; empty clusters take the point farthest from
// its own (updated) centroid, one distinct point per empty cluster.
CentroidMatrix update_centroids(std::span<const SubjectRecord> gallery,
                                const Assignment &labels, const CentroidMatrix &previous) {
  const auto k = previous.rows();
  CentroidMatrix sums = CentroidMatrix::Zero(k, kFeatureDim);
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    sums.row(labels[i]) += gallery[i].vector.transpose();
    ++counts[labels[i]];
  }
  CentroidMatrix next = previous;
  std::vector<int> empty;
  for (int c = 0; c < k; ++c) {
    if (counts[c] > 0) {
      next.row(c) = sums.row(c) / static_cast<double>(counts[c]);
    } else {
      empty.push_back(c);
    }
  }
  if (empty.empty()) return next;

  std::vector<double> d2(gallery.size());
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    d2[i] = squared_distance(gallery[i].vector, next.row(labels[i]).transpose());
  }
  for (int c : empty) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < d2.size(); ++i) {
      if (d2[i] > d2[far]) far = i;
    }
    next.row(c) = gallery[far].vector.transpose();
    d2[far] = -1.0;
  }
  return next;
}

}  // namespace

KMeansFit kmeans_fit(std::span<const SubjectRecord> gallery, int k, const KMeansOptions &options) {
  if (k <= 0) throw InvalidArgument("kmeans_fit: k must be positive");
  if (gallery.size() < static_cast<std::size_t>(k)) {
    throw InvalidArgument("kmeans_fit: gallery has " + std::to_string(gallery.size()) +
                          " records, fewer than k = " + std::to_string(k));
  }
  if (!(options.tol > 0.0)) throw InvalidArgument("kmeans_fit: tol must be positive");
  if (options.max_iter <= 0) throw InvalidArgument("kmeans_fit: max_iter must be positive");

  std::mt19937_64 rng(options.seed);
  ClusterModel model;
  model.k = k;
  model.seed = options.seed;
  model.tol = options.tol;
  model.centroids = kmeanspp_init(gallery, k, rng);

  Assignment labels(gallery.size());
  Assignment next_labels(gallery.size());
  double current = assign_into(gallery, model.centroids, labels);
  while (model.iterations < options.max_iter) {
    model.ssq_trace.push_back(current);
    CentroidMatrix next = update_centroids(gallery, labels, model.centroids);
    const double shift = (next - model.centroids).rowwise().norm().maxCoeff();
    model.centroids = std::move(next);
    ++model.iterations;
    current = assign_into(gallery, model.centroids, next_labels);
    const bool stable = next_labels == labels;
    labels.swap(next_labels);
    if (stable || shift < options.tol) break;
  }
  model.ssq = current;
  model.ssq_trace.push_back(current);
  return {std::move(model), std::move(labels)};
}

int assign(const FeatureVector &vector, const ClusterModel &model) {
  return nearest_centroid(vector, model.centroids);
}

Assignment assign_all(std::span<const SubjectRecord> gallery, const ClusterModel &model) {
  Assignment labels(gallery.size());
  assign_into(gallery, model.centroids, labels);
  return labels;
}

double ssq(std::span<const SubjectRecord> gallery, const ClusterModel &model,
           const Assignment &assignment) {
  if (assignment.size() != gallery.size()) {
    throw InvalidArgument("ssq: assignment length differs from gallery size");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    const int label = assignment[i];
    if (label < 0 || label >= model.k) throw InvalidArgument("ssq: label out of range");
    total += squared_distance(gallery[i].vector, model.centroids.row(label).transpose());
  }
  return total;
}

}  // namespace ecgid
