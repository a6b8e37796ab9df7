// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ecgid/clustering.hpp"
#include "ecgid/feature_data.hpp"
#include "ecgid/gallery_io.hpp"
#include "ecgid/identification_bench.hpp"
#include "ecgid/k_selection.hpp"
#include "ecgid/matcher.hpp"
#include "ecgid/partition_store.hpp"
#include "oracles.hpp"

namespace {

using namespace ecgid;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int g_failures = 0;

void report(int id, const char *title, double budget_s, const std::function<Outcome()> &body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception &e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (secs >= budget_s) {
    o.pass = false;
    o.detail += " (over " + std::to_string(static_cast<int>(budget_s)) + " s budget)";
  }
  if (!o.pass) ++g_failures;
  std::printf("[%s] %d. %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool trace_non_increasing(const ClusterModel &m) {
  for (std::size_t i = 1; i < m.ssq_trace.size(); ++i) {
    if (m.ssq_trace[i] > m.ssq_trace[i - 1] * (1 + 1e-12) + 1e-12) return false;
  }
  return true;
}

std::string vector_key(const FeatureVector &v) {
  std::string key;
  for (int j = 0; j < kFeatureDim; ++j) key += format_real(v[j]) + ',';
  return key;
}

std::vector<oracle::Point> points(const Gallery &g) {
  std::vector<oracle::Point> p;
  for (const auto &r : g) p.push_back(oracle::to_point(r.vector));
  return p;
}

Outcome table_arithmetic() {
  // k, time reduction, accuracy, silhouette, printed score.
  const std::vector<std::tuple<int, double, double, double, double>> table = {
      {2, 18.57, 97, 0.39, 52.331}, {3, 57.37, 100, 0.32, 61.57}, {4, 73.10, 96, 0.35, 62.725},
      {5, 79.26, 100, 0.32, 65.95}, {6, 80.95, 94, 0.28, 63.27},  {7, 83.43, 98, 0.29, 65.77},
      {8, 82.34, 98, 0.27, 65.54},  {9, 86.14, 97, 0.24, 65.8},
  };
  std::vector<KDecisionRow> rows;
  for (const auto &[k, t, a, s, printed] : table) rows.push_back({k, t, a, s, 0.0});
  const auto decision = decide_k(rows);
  Outcome o;
  int agree = 0;
  std::string off;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double printed = std::get<4>(table[i]);
    const double got = decision.rows[i].weighted_score;
    if (std::abs(got - printed) <= 0.005) {
      ++agree;
    } else {
      o.pass = false;
      off += fmt(" k=%d computed %.4f vs printed %.3f;", decision.rows[i].k, got, printed);
    }
  }
  if (decision.best_k != 5) o.pass = false;
  o.detail = fmt("%d/8 scores within 0.005, best_k=%d", agree, decision.best_k) + off;
  return o;
}

Outcome matching_identities() {
  const double tol = 1e-9;
  FeatureVector x = FeatureVector::LinSpaced(1.0, 9.0);
  FeatureVector e0 = FeatureVector::Unit(0), e1 = FeatureVector::Unit(1);
  const std::vector<std::pair<std::string, double>> checks = {
      {"prd identical", prd(x, x) - 0.0},
      {"prd zero template", prd(x, FeatureVector::Zero().eval()) - 100.0},
      {"prd orthogonal", prd(e0, e1) - 100.0 * std::sqrt(2.0)},
      {"cc parallel", cc(x, (3.0 * x).eval()) - 1.0},
      {"cc orthogonal", cc(e0, e1) - 0.0},
      {"cc anti-parallel", cc(x, (-x).eval()) + 1.0},
  };
  Outcome o;
  for (const auto &[name, err] : checks) {
    if (!(std::abs(err) <= tol)) {
      o.pass = false;
      o.detail += name + fmt(" off by %.3g; ", err);
    }
  }
  if (std::abs(prd(e0, e1) - 141.42) > 0.005) o.pass = false;
  o.detail += fmt("6 identities within 1e-9, orthogonal prd=%.4f", prd(e0, e1));
  return o;
}

// 10k-subject gallery with one on-disk partition set per K in [2,10).
struct SharedGallery {
  oracle::TempDir dir{"acceptance"};
  Gallery gallery;
  std::vector<ClusterModel> models;

  SharedGallery() {
    gallery = preprocess(synth_gallery(10'000, 5, 5.0, 2024)).gallery;
    save_gallery_csv(dir / "serial.csv", gallery);
    for (int k = 2; k < 10; ++k) {
      const auto fit = kmeans_fit(gallery, k, {.seed = 100u + k});
      partition(gallery, fit.model, dir / "parts");
      models.push_back(fit.model);
    }
  }
};

SharedGallery &shared() {
  static SharedGallery s;
  return s;
}

Outcome partition_integrity() {
  auto &s = shared();
  std::multiset<std::string> expected;
  for (const auto &r : s.gallery) expected.insert(r.subject_id + "|" + vector_key(r.vector));
  Outcome o;
  std::string detail;
  for (int k = 2; k < 10; ++k) {
    const auto &model = s.models[k - 2];
    const auto index = open_partition_index(s.dir / "parts", k);
    verify_partitions(index);
    std::multiset<std::string> seen;
    std::size_t misplaced = 0;
    for (int c = 0; c < k; ++c) {
      for (const auto &r : load_partition(index, c)) {
        seen.insert(r.subject_id + "|" + vector_key(r.vector));
        if (assign(r.vector, index.model) != c) ++misplaced;
      }
    }
    if (seen != expected || misplaced != 0) {
      o.pass = false;
      detail += fmt(" k=%d: union %s, %zu misplaced;", k, seen == expected ? "ok" : "differs",
                    misplaced);
    }
    if (!trace_non_increasing(model)) {
      o.pass = false;
      detail += fmt(" k=%d: ssq trace increased;", k);
    }
  }
  o.detail = fmt("K=2..9 on %zu rows: union and assignment consistency %s", s.gallery.size(),
                 o.pass ? "hold" : "broken") +
             detail;
  return o;
}

std::vector<BenchReport> g_exact_reports;

Outcome exact_hit_accuracy() {
  auto &s = shared();
  std::set<std::string> distinct;
  for (const auto &r : s.gallery) distinct.insert(vector_key(r.vector));
  if (distinct.size() != s.gallery.size()) return {false, "synthetic subjects are not distinct"};
  const auto queries = make_queries(s.gallery, 500, 0.0, 7);
  Outcome o;
  std::string per_k;
  for (int k = 2; k < 10; ++k) {
    const auto index = open_partition_index(s.dir / "parts", k);
    const auto mem = load_in_memory_index(s.dir / "serial.csv", index);
    const auto rep = run_bench(mem, queries, {}, {.repeats = 1, .in_memory = true});
    if (rep.accuracy_pct != 100.0) o.pass = false;
    per_k += fmt(" k=%d:%g%%", rep.k, rep.accuracy_pct);
    g_exact_reports.push_back(rep);
  }
  o.detail = "500 zero-noise queries on 10000 subjects;" + per_k;
  return o;
}

Outcome hit_equivalence() {
  if (g_exact_reports.size() != 8) return {false, "criterion 3 batches unavailable"};
  Outcome o;
  std::size_t eligible = 0, agree = 0;
  for (const auto &rep : g_exact_reports) {
    for (const auto &q : rep.queries) {
      if (!q.truth_in_cluster) continue;
      ++eligible;
      if (q.cluster_hit == q.serial_hit) ++agree;
    }
  }
  o.pass = eligible > 0 && agree == eligible;
  o.detail = fmt("%zu/%zu truth-in-cluster queries agree", agree, eligible);
  return o;
}

Outcome time_reduction_trend() {
  Outcome o;
  std::vector<double> t_avg;
  std::string detail;
  for (int k : {2, 5, 8}) {
    const auto gallery =
        preprocess(synth_gallery(100'000, static_cast<std::size_t>(k), 5.0, 500u + k)).gallery;
    const auto fit = kmeans_fit(gallery, k, {.seed = 9});
    const auto index = make_in_memory_index(gallery, fit.model);
    const auto queries = make_queries(gallery, 60, 0.0, 11u + k);
    const auto rep = run_bench(index, queries, {}, {.repeats = 5, .in_memory = true});
    const double expected = (1.0 - 1.0 / k) * 100.0;
    if (std::abs(rep.t_avg_pct - expected) > 15.0) o.pass = false;
    detail += fmt(" k=%d: %.2f%% (target %.1f);", k, rep.t_avg_pct, expected);
    t_avg.push_back(rep.t_avg_pct);
  }
  const bool monotone = std::is_sorted(t_avg.begin(), t_avg.end());
  if (!monotone) o.pass = false;
  o.detail = std::string("in-memory, 100000 rows;") + detail +
             (monotone ? " non-decreasing in k" : " NOT monotone");
  return o;
}

Outcome clustering_oracles() {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> size(5, 8);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  Outcome o;
  int matched = 0, fits = 0, monotone = 0;
  double worst = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    for (int k : {2, 3}) {
      // k well separated groups: centres 8 apart along distinct axes.
      std::vector<FeatureVector> centres;
      for (int c = 0; c < k; ++c) {
        FeatureVector v;
        for (int j = 0; j < kFeatureDim; ++j) v[j] = box(rng);
        v[c] += 8.0 * (c + 1);
        centres.push_back(v);
      }
      const int n = std::max(size(rng), k + 2);
      Gallery g;
      for (int i = 0; i < n; ++i) {
        FeatureVector v = centres[i % k];
        for (int j = 0; j < kFeatureDim; ++j) v[j] += noise(rng);
        g.push_back({std::to_string(i), v});
      }
      const auto fit = kmeans_fit(g, k, {.seed = static_cast<std::uint64_t>(instance)});
      const double best = oracle::optimal_ssq(points(g), k);
      const double err = std::abs(fit.model.ssq - best);
      worst = std::max(worst, err);
      ++fits;
      if (err <= 1e-9) ++matched;
      if (trace_non_increasing(fit.model)) ++monotone;
    }
  }
  o.pass = matched == fits && monotone == fits;
  o.detail = fmt("%d/%d fits hit the exhaustive optimum (max |diff| %.2g), %d/%d traces "
                 "non-increasing",
                 matched, fits, worst, monotone, fits);
  return o;
}

Outcome silhouette_oracle() {
  std::mt19937_64 rng(707);
  std::normal_distribution<double> coord(0.0, 3.0);
  Outcome o;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + trial % 3;
    const int n = std::uniform_int_distribution<int>(k + 1, 20)(rng);
    Gallery g;
    Assignment labels;
    for (int i = 0; i < n; ++i) {
      FeatureVector v;
      for (int j = 0; j < kFeatureDim; ++j) v[j] = coord(rng);
      g.push_back({std::to_string(i), v});
      labels.push_back(i < k ? i : std::uniform_int_distribution<int>(0, k - 1)(rng));
    }
    worst = std::max(worst, std::abs(silhouette_avg(g, labels) - oracle::silhouette_avg(points(g), labels)));
  }
  auto axis = [](double x) {
    FeatureVector v = FeatureVector::Zero();
    v[0] = x;
    return v;
  };
  const Gallery four = {{"a", axis(0)}, {"b", axis(1)}, {"c", axis(10)}, {"d", axis(11)}};
  const double example = silhouette_avg(four, {0, 0, 1, 1});
  o.pass = worst <= 1e-9 && std::abs(example - 0.8997) <= 1e-3;
  o.detail = fmt("50 galleries, max |diff| %.2g; worked example %.4f", worst, example);
  return o;
}

Outcome elbow_recovery() {
  int hits = 0;
  std::string knees;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto gallery = preprocess(synth_gallery(2000, 5, 5.0, 40 + seed)).gallery;
    const auto curve = elbow_curve(gallery, {2, 10}, {.seed = seed});
    const int knee = detect_knee(curve);
    if (knee == 5) ++hits;
    knees += fmt(" %d", knee);
  }
  return {hits >= 2, fmt("knee=5 in %d/3 seeds (knees:%s)", hits, knees.c_str())};
}

}  // namespace

int main() {
  std::printf("ecgid acceptance suite\n");
  report(1, "decision table arithmetic", 1, table_arithmetic);
  report(2, "matching identities", 1, matching_identities);
  report(3, "exact-hit accuracy", 120, exact_hit_accuracy);
  report(4, "clustered/serial hit equivalence", 1, hit_equivalence);
  report(5, "time-reduction trend", 300, time_reduction_trend);
  report(6, "clustering oracles", 30, clustering_oracles);
  report(7, "silhouette oracle", 30, silhouette_oracle);
  report(8, "elbow recovery", 120, elbow_recovery);
  report(9, "partition integrity", 60, partition_integrity);
  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
