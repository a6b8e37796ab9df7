#include "ecgid/k_selection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <string>

#include "ecgid/error.hpp"
#include "ecgid/gallery_io.hpp"

namespace ecgid {

std::vector<ElbowPoint> elbow_curve(std::span<const SubjectRecord> gallery, KRange k_range,
                                    const KMeansOptions &options) {
  if (k_range.empty()) throw InvalidArgument("elbow_curve: empty k range");
  if (k_range.first < 2) throw InvalidArgument("elbow_curve: k range must start at 2 or above");
  if (static_cast<std::size_t>(k_range.last - 1) > gallery.size()) {
    throw InvalidArgument("elbow_curve: largest k exceeds gallery size");
  }
  std::vector<ElbowPoint> curve;
  for (int k = k_range.first; k < k_range.last; ++k) {
    curve.push_back({k, kmeans_fit(gallery, k, options).model.ssq});
  }
  return curve;
}

int detect_knee(std::span<const ElbowPoint> curve) {
  if (curve.size() < 3) throw InvalidArgument("detect_knee: need at least 3 points");
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].k <= curve[i - 1].k) throw InvalidArgument("detect_knee: k must ascend");
  }
  std::size_t best = 1;
  double best_diff = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    const double diff = curve[i - 1].ssq - 2.0 * curve[i].ssq + curve[i + 1].ssq;
    if (diff > best_diff) {
      best_diff = diff;
      best = i;
    }
  }
  return curve[best].k;
}

std::vector<double> silhouette_values(std::span<const SubjectRecord> gallery,
                                      const Assignment &assignment) {
  if (assignment.size() != gallery.size()) {
    throw InvalidArgument("silhouette: assignment length differs from gallery size");
  }
  // Compact the labels so cluster sums can live in a dense table.
  std::map<int, int> dense;
  for (int label : assignment) dense.try_emplace(label, 0);
  if (dense.size() < 2) throw InvalidArgument("silhouette: need at least two clusters");
  int next = 0;
  for (auto &[label, idx] : dense) idx = next++;
  const int n_clusters = next;

  const std::size_t n = gallery.size();
  std::vector<int> label(n);
  std::vector<std::size_t> size(n_clusters, 0);
  for (std::size_t i = 0; i < n; ++i) {
    label[i] = dense[assignment[i]];
    ++size[label[i]];
  }

  std::vector<double> s(n, 0.0);
  std::vector<double> dist_sum(n_clusters);
  for (std::size_t i = 0; i < n; ++i) {
    const int own = label[i];
    if (size[own] == 1) continue;
    std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
    const auto &xi = gallery[i].vector;
    for (std::size_t j = 0; j < n; ++j) {
      dist_sum[label[j]] += (xi - gallery[j].vector).norm();
    }
    const double a = dist_sum[own] / static_cast<double>(size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < n_clusters; ++c) {
      if (c != own) b = std::min(b, dist_sum[c] / static_cast<double>(size[c]));
    }
    const double denom = std::max(a, b);
    s[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return s;
}

double silhouette_avg(std::span<const SubjectRecord> gallery, const Assignment &assignment) {
  const auto s = silhouette_values(gallery, assignment);
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

void DecisionWeights::validate() const {
  if (std::abs(time + accuracy + silhouette - 1.0) > 1e-9) {
    throw InvalidArgument("decision weights must sum to 1");
  }
}

KDecision decide_k(std::vector<KDecisionRow> rows, const DecisionWeights &weights) {
  if (rows.empty()) throw InvalidArgument("decide_k: no rows");
  KDecision decision;
  const KDecisionRow *best = nullptr;
  for (auto &row : rows) {
    row.weighted_score = weights.time * row.time_reduction_pct +
                         weights.accuracy * row.accuracy_pct +
                         weights.silhouette * row.silhouette_avg;
  }
  for (const auto &row : rows) {
    if (!best || row.weighted_score > best->weighted_score ||
        (row.weighted_score == best->weighted_score && row.k < best->k)) {
      best = &row;
    }
  }
  decision.best_k = best->k;
  decision.rows = std::move(rows);
  return decision;
}

std::vector<int> silhouette_candidates(std::span<const KDecisionRow> rows, std::size_t count) {
  std::vector<KDecisionRow> sorted(rows.begin(), rows.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto &a, const auto &b) {
    return a.silhouette_avg != b.silhouette_avg ? a.silhouette_avg > b.silhouette_avg
                                                : a.k < b.k;
  });
  std::vector<int> ks;
  for (std::size_t i = 0; i < sorted.size() && i < count; ++i) ks.push_back(sorted[i].k);
  return ks;
}

void write_elbow_csv(std::ostream &out, std::span<const ElbowPoint> curve) {
  out << "k,ssq\n";
  for (const auto &p : curve) out << p.k << ',' << format_real(p.ssq) << '\n';
}

void write_decision_csv(std::ostream &out, std::span<const KDecisionRow> rows) {
  out << "k,time_reduction,accuracy,silhouette,score\n";
  for (const auto &r : rows) {
    out << r.k << ',' << format_real(r.time_reduction_pct) << ','
        << format_real(r.accuracy_pct) << ',' << format_real(r.silhouette_avg) << ','
        << format_real(r.weighted_score) << '\n';
  }
}

namespace {

double parse_number(std::string_view cell, std::size_t row) {
  while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() ||
      !std::isfinite(v)) {
    throw ParseError(ParseError::Kind::bad_number, row,
                     "not a number: '" + std::string(cell) + "'");
  }
  return v;
}

}  // namespace

std::vector<KDecisionRow> parse_decision_csv(std::string_view text) {
  std::vector<KDecisionRow> rows;
  std::size_t row = 0;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++row;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (header) {
      if (!line.starts_with("k,time_reduction,accuracy,silhouette")) {
        throw ParseError(ParseError::Kind::bad_header, row,
                         "expected header 'k,time_reduction,accuracy,silhouette[,score]'");
      }
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 4 && cells.size() != 5) {
      throw ParseError(ParseError::Kind::column_count, row, "expected 4 or 5 columns");
    }
    KDecisionRow r;
    const double k = parse_number(cells[0], row);
    if (k != std::floor(k)) throw ParseError(ParseError::Kind::bad_number, row, "k must be an integer");
    r.k = static_cast<int>(k);
    r.time_reduction_pct = parse_number(cells[1], row);
    r.accuracy_pct = parse_number(cells[2], row);
    r.silhouette_avg = parse_number(cells[3], row);
    rows.push_back(r);
  }
  if (header) throw ParseError(ParseError::Kind::bad_header, 0, "empty decision file");
  return rows;
}

std::vector<KDecisionRow> load_decision_csv(const std::filesystem::path &path) {
  return parse_decision_csv(read_file(path));
}

}  // namespace ecgid
