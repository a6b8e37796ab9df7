#include "ecgid/feature_data.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>

#include <Eigen/QR>

#include "ecgid/error.hpp"
#include "ecgid/gallery_io.hpp"

namespace ecgid {
namespace {

// Typical resting values in raw units (ms, degrees, index units); synthetic
// galleries are centred here so the raw CSV looks like fiducial data.
const FeatureVector &raw_baseline() {
  static const FeatureVector baseline =
      (FeatureVector() << 800, 160, 90, 380, 410, 50, 40, 40, 100).finished();
  return baseline;
}

FeatureVector standard_normal(std::mt19937_64 &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  FeatureVector v;
  for (int j = 0; j < kFeatureDim; ++j) v[j] = normal(rng);
  return v;
}

// Blob centres. Up to kFeatureDim blobs sit on the axes of a random rotation,
// so every pair is the same distance apart; larger counts fall back to
// rejection sampling in a box.
std::vector<FeatureVector> blob_centres(std::size_t n_blobs, double spread,
                                        std::mt19937_64 &rng) {
  const double min_separation = 10.0 * spread;
  const double radius = 20.0 * spread;
  std::vector<FeatureVector> centres;
  centres.reserve(n_blobs);
  if (n_blobs <= static_cast<std::size_t>(kFeatureDim)) {
    Eigen::Matrix<double, kFeatureDim, kFeatureDim> gaussian;
    for (int c = 0; c < kFeatureDim; ++c) gaussian.col(c) = standard_normal(rng);
    const Eigen::Matrix<double, kFeatureDim, kFeatureDim> rotation =
        gaussian.householderQr().householderQ();
    for (std::size_t b = 0; b < n_blobs; ++b) {
      centres.push_back(raw_baseline() + radius * rotation.col(static_cast<int>(b)));
    }
    return centres;
  }

  const double half_width =
      radius * std::pow(static_cast<double>(n_blobs), 1.0 / kFeatureDim);
  std::uniform_real_distribution<double> uniform(-half_width, half_width);
  constexpr int kMaxAttempts = 100000;
  for (int attempt = 0; centres.size() < n_blobs; ++attempt) {
    if (attempt == kMaxAttempts) {
      throw Error("synth_gallery: could not place " + std::to_string(n_blobs) +
                  " separated blob centres");
    }
    FeatureVector candidate;
    for (int j = 0; j < kFeatureDim; ++j) candidate[j] = uniform(rng);
    candidate += raw_baseline();
    bool separated = true;
    for (const auto &c : centres) {
      if ((c - candidate).norm() < min_separation) {
        separated = false;
        break;
      }
    }
    if (separated) centres.push_back(candidate);
  }
  return centres;
}

std::string subject_id(std::size_t index, std::size_t total) {
  const auto width = std::to_string(total).size();
  auto digits = std::to_string(index + 1);
  return "S" + std::string(width > digits.size() ? width - digits.size() : 0, '0') +
         digits;
}

}  // namespace

std::vector<RawRecord> fill_missing(std::vector<RawRecord> records) {
  for (auto &r : records) {
    for (auto &slot : r.features) {
      if (!slot) slot = 0.0;
    }
  }
  return records;
}

Gallery fuse_enrollments(std::span<const RawRecord> records) {
  Gallery fused;
  std::vector<std::size_t> counts;
  std::unordered_map<std::string, std::size_t> slot_of;
  for (const auto &r : records) {
    FeatureVector v;
    for (int j = 0; j < kFeatureDim; ++j) {
      if (!r.features[j]) {
        throw InvalidArgument("fuse_enrollments: subject '" + r.subject_id +
                              "' has a missing '" + std::string(kFeatureNames[j]) +
                              "' value; run fill_missing first");
      }
      v[j] = *r.features[j];
    }
    const auto [it, inserted] = slot_of.try_emplace(r.subject_id, fused.size());
    if (inserted) {
      fused.push_back({r.subject_id, v});
      counts.push_back(1);
    } else {
      fused[it->second].vector += v;
      ++counts[it->second];
    }
  }
  for (std::size_t i = 0; i < fused.size(); ++i) {
    if (counts[i] > 1) fused[i].vector /= static_cast<double>(counts[i]);
  }
  return fused;
}

Gallery round_features(Gallery records) {
  for (auto &r : records) {
    r.vector = r.vector.unaryExpr([](double x) { return std::round(x); });
  }
  return records;
}

ScalingStats zscore_fit(std::span<const SubjectRecord> records) {
  if (records.empty()) throw EmptyData("zscore_fit: no records to fit");
  const auto n = static_cast<double>(records.size());
  ScalingStats stats;
  for (const auto &r : records) stats.mean += r.vector;
  stats.mean /= n;
  FeatureVector sq = FeatureVector::Zero();
  for (const auto &r : records) sq += (r.vector - stats.mean).cwiseAbs2();
  stats.stddev = (sq / n).cwiseSqrt();
  return stats;
}

Gallery zscore_apply(Gallery records, const ScalingStats &stats) {
  for (auto &r : records) r.vector = zscore_apply(r.vector, stats);
  return records;
}

PreprocessResult preprocess(std::vector<RawRecord> records) {
  const auto filled = fill_missing(std::move(records));
  auto gallery = round_features(fuse_enrollments(filled));
  auto stats = zscore_fit(gallery);
  return {zscore_apply(std::move(gallery), stats), stats};
}

std::vector<RawRecord> synth_gallery(const SynthOptions &options) {
  if (options.n_blobs == 0) throw InvalidArgument("synth_gallery: n_blobs must be positive");
  if (options.n_subjects < options.n_blobs) {
    throw InvalidArgument("synth_gallery: n_subjects (" +
                          std::to_string(options.n_subjects) + ") < n_blobs (" +
                          std::to_string(options.n_blobs) + ")");
  }
  if (!(options.blob_spread > 0.0) || !std::isfinite(options.blob_spread)) {
    throw InvalidArgument("synth_gallery: blob_spread must be positive");
  }
  if (options.enrollments_per_subject == 0) {
    throw InvalidArgument("synth_gallery: enrollments_per_subject must be positive");
  }

  std::mt19937_64 rng(options.seed);
  const auto centres = blob_centres(options.n_blobs, options.blob_spread, rng);
  // Repeat enrollments scatter a quarter-spread around the subject's own point.
  const double enrollment_jitter = 0.25 * options.blob_spread;

  std::vector<RawRecord> records;
  records.reserve(options.n_subjects * options.enrollments_per_subject);
  for (std::size_t i = 0; i < options.n_subjects; ++i) {
    const FeatureVector subject =
        centres[i % options.n_blobs] + options.blob_spread * standard_normal(rng);
    const auto id = subject_id(i, options.n_subjects);
    for (std::size_t e = 0; e < options.enrollments_per_subject; ++e) {
      FeatureVector v = subject;
      if (options.enrollments_per_subject > 1) v += enrollment_jitter * standard_normal(rng);
      RawRecord r;
      r.subject_id = id;
      for (int j = 0; j < kFeatureDim; ++j) r.features[j] = v[j];
      records.push_back(std::move(r));
    }
  }
  return records;
}

std::vector<RawRecord> synth_gallery(std::size_t n_subjects, std::size_t n_blobs,
                                     double blob_spread, std::uint64_t seed) {
  return synth_gallery(SynthOptions{n_subjects, n_blobs, blob_spread, seed, 1});
}

void write_scaling_stats(std::ostream &out, const ScalingStats &stats) {
  out << "# z-score scaling statistics (population)\n";
  out << "dim=" << kFeatureDim << '\n';
  for (int j = 0; j < kFeatureDim; ++j) {
    out << "mean." << kFeatureNames[j] << '=' << format_real(stats.mean[j]) << '\n';
  }
  for (int j = 0; j < kFeatureDim; ++j) {
    out << "stddev." << kFeatureNames[j] << '=' << format_real(stats.stddev[j]) << '\n';
  }
}

void save_scaling_stats(const std::filesystem::path &path, const ScalingStats &stats) {
  std::ostringstream out;
  write_scaling_stats(out, stats);
  write_file(path, out.str());
}

ScalingStats read_scaling_stats(std::istream &in) {
  std::unordered_map<std::string, std::string> kv;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(ParseError::Kind::bad_field, row, "expected key=value");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto number = [&](const std::string &key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(ParseError::Kind::missing_value, 0, "missing key '" + key + "'");
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(it->second, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used == 0 || used != it->second.size() || !std::isfinite(v)) {
      throw ParseError(ParseError::Kind::bad_number, 0, "key '" + key + "': bad number");
    }
    return v;
  };
  if (number("dim") != kFeatureDim) {
    throw ParseError(ParseError::Kind::bad_field, 0, "stats dimension mismatch");
  }
  ScalingStats stats;
  for (int j = 0; j < kFeatureDim; ++j) {
    stats.mean[j] = number("mean." + std::string(kFeatureNames[j]));
    stats.stddev[j] = number("stddev." + std::string(kFeatureNames[j]));
    if (stats.stddev[j] < 0) {
      throw ParseError(ParseError::Kind::bad_number, 0, "negative stddev");
    }
  }
  return stats;
}

ScalingStats load_scaling_stats(const std::filesystem::path &path) {
  std::istringstream in(read_file(path));
  return read_scaling_stats(in);
}

}  // namespace ecgid
