#ifndef ECGID_TYPES_HPP
#define ECGID_TYPES_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace ecgid {

/// Number of fiducial features per record.
inline constexpr int kFeatureDim = 9;

/// Column names in fixed schema order.
inline constexpr std::array<std::string_view, kFeatureDim> kFeatureNames = {
    "rr", "pr", "qrs", "qt", "qtc", "p_axis", "qrs_axis", "t_axis", "acci"};

template <typename Scalar>
using FeatureVectorT = Eigen::Matrix<Scalar, kFeatureDim, 1>;

using FeatureVector = FeatureVectorT<double>;

/// Row-major k x 9 matrix, one centroid per row.
template <typename Scalar>
using CentroidMatrixT =
    Eigen::Matrix<Scalar, Eigen::Dynamic, kFeatureDim, Eigen::RowMajor>;

using CentroidMatrix = CentroidMatrixT<double>;

/// One gallery row as ingested: any slot may be missing.
struct RawRecord {
  std::string subject_id;
  std::array<std::optional<double>, kFeatureDim> features{};

  friend bool operator==(const RawRecord &, const RawRecord &) = default;
};

/// One enrolled subject after preprocessing.
struct SubjectRecord {
  std::string subject_id;
  FeatureVector vector = FeatureVector::Zero();

  friend bool operator==(const SubjectRecord &a, const SubjectRecord &b) {
    return a.subject_id == b.subject_id && a.vector == b.vector;
  }
};

using Gallery = std::vector<SubjectRecord>;

/// Half-open integer interval [first, last).
struct KRange {
  int first = 2;
  int last = 10;

  bool empty() const { return last <= first; }
  int size() const { return empty() ? 0 : last - first; }
};

}  // namespace ecgid

#endif  // ECGID_TYPES_HPP
