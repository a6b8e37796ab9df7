#ifndef ECGID_FEATURE_DATA_HPP
#define ECGID_FEATURE_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "ecgid/types.hpp"

namespace ecgid {

/// Per-feature population mean and standard deviation.
struct ScalingStats {
  FeatureVector mean = FeatureVector::Zero();
  FeatureVector stddev = FeatureVector::Zero();

  friend bool operator==(const ScalingStats &, const ScalingStats &) = default;
};

/// Replaces every absent slot by 0.
std::vector<RawRecord> fill_missing(std::vector<RawRecord> records);

/// Collapses repeated enrollments into one record per subject holding the
/// component-wise mean. Output follows first-appearance order of ids.
/// Throws InvalidArgument if any slot is still absent.
Gallery fuse_enrollments(std::span<const RawRecord> records);

/// Rounds every component to the nearest integer, halves away from zero.
Gallery round_features(Gallery records);

/// Population (divide-by-n) statistics. Throws EmptyData on an empty gallery.
ScalingStats zscore_fit(std::span<const SubjectRecord> records);

/// (x - mean) / stddev per component; components with zero stddev map to 0.
template <typename Derived>
FeatureVectorT<typename Derived::Scalar>
zscore_apply(const Eigen::MatrixBase<Derived> &x, const ScalingStats &stats) {
  using Scalar = typename Derived::Scalar;
  FeatureVectorT<Scalar> z;
  for (int j = 0; j < kFeatureDim; ++j) {
    const auto sd = static_cast<Scalar>(stats.stddev[j]);
    z[j] = sd > Scalar(0) ? (x[j] - static_cast<Scalar>(stats.mean[j])) / sd
                          : Scalar(0);
  }
  return z;
}

/// Inverse of zscore_apply for components with nonzero stddev; components
/// with zero stddev come back as the mean.
template <typename Derived>
FeatureVectorT<typename Derived::Scalar>
zscore_invert(const Eigen::MatrixBase<Derived> &z, const ScalingStats &stats) {
  using Scalar = typename Derived::Scalar;
  return (z.array() * stats.stddev.template cast<Scalar>().array() +
          stats.mean.template cast<Scalar>().array())
      .matrix();
}

Gallery zscore_apply(Gallery records, const ScalingStats &stats);

struct PreprocessResult {
  Gallery gallery;
  ScalingStats stats;
};

/// fill_missing -> fuse_enrollments -> round_features -> z-score (fitted on
/// the gallery itself).
PreprocessResult preprocess(std::vector<RawRecord> records);

struct SynthOptions {
  std::size_t n_subjects = 1000;
  std::size_t n_blobs = 5;
  double blob_spread = 5.0;
  std::uint64_t seed = 0;
  /// Raw rows emitted per subject; > 1 exercises enrollment fusion.
  std::size_t enrollments_per_subject = 1;
};

/// Gaussian-blob gallery in raw feature units. Subject i belongs to blob
/// i % n_blobs, so blob sizes differ by at most one. Blob centres are at
/// least 10 * blob_spread apart. Throws InvalidArgument when
/// n_subjects < n_blobs or any count/spread is non-positive.
std::vector<RawRecord> synth_gallery(const SynthOptions &options);

std::vector<RawRecord> synth_gallery(std::size_t n_subjects, std::size_t n_blobs,
                                     double blob_spread, std::uint64_t seed);

/// Key-value sidecar: `mean.<feature>=` and `stddev.<feature>=` lines.
void write_scaling_stats(std::ostream &out, const ScalingStats &stats);
void save_scaling_stats(const std::filesystem::path &path, const ScalingStats &stats);
ScalingStats read_scaling_stats(std::istream &in);
ScalingStats load_scaling_stats(const std::filesystem::path &path);

}  // namespace ecgid

#endif  // ECGID_FEATURE_DATA_HPP
