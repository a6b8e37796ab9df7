#include "cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ecgid/clustering.hpp"
#include "ecgid/error.hpp"
#include "ecgid/feature_data.hpp"
#include "ecgid/gallery_io.hpp"
#include "ecgid/identification_bench.hpp"
#include "ecgid/k_selection.hpp"
#include "ecgid/matcher.hpp"
#include "ecgid/partition_store.hpp"

namespace fs = std::filesystem;

namespace ecgid::cli {
namespace {

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

KRange parse_k_range(const std::string &text) {
  const auto colon = text.find(':');
  KRange range;
  auto parse_int = [&](std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw InvalidArgument("--k-range: expected FIRST:LAST, got '" + text + "'");
    }
    return v;
  };
  if (colon == std::string::npos) {
    range.first = parse_int(text);
    range.last = range.first + 1;
  } else {
    range.first = parse_int(std::string_view(text).substr(0, colon));
    range.last = parse_int(std::string_view(text).substr(colon + 1));
  }
  if (range.empty()) throw InvalidArgument("--k-range: empty range '" + text + "'");
  return range;
}

FeatureVector parse_vector(const std::string &text) {
  FeatureVector v;
  std::size_t start = 0;
  for (int j = 0; j < kFeatureDim; ++j) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    if ((j + 1 < kFeatureDim) == (comma == std::string::npos)) {
      throw InvalidArgument("--query: expected " + std::to_string(kFeatureDim) +
                            " comma-separated values");
    }
    const auto [ptr, ec] = std::from_chars(text.data() + start, text.data() + end, v[j]);
    if (ec != std::errc() || ptr != text.data() + end) {
      throw InvalidArgument("--query: bad number in '" + text + "'");
    }
    start = end + 1;
  }
  return v;
}

void add_thresholds(CLI::App *app, MatchThresholds &t) {
  app->add_option("--prd-max", t.prd_max, "Largest accepted PRD (percent)");
  app->add_option("--cc-min", t.cc_min, "Smallest accepted cross-correlation");
  app->add_option("--w-prd", t.w_prd, "Confidence weight of (100 - PRD)");
  app->add_option("--w-cc", t.w_cc, "Confidence weight of CC");
}

void add_weights(CLI::App *app, DecisionWeights &w) {
  app->add_option("--w-time", w.time, "Decision weight of average time reduction");
  app->add_option("--w-acc", w.accuracy, "Decision weight of accuracy");
  app->add_option("--w-sil", w.silhouette, "Decision weight of average silhouette");
}

void add_bench_options(CLI::App *app, DecisionTableConfig &cfg, std::string &k_range) {
  app->add_option("--k-range", k_range, "Cluster counts as FIRST:LAST (LAST exclusive)");
  app->add_option("--queries", cfg.n_queries, "Query batch size");
  app->add_option("--noise-sigma", cfg.noise_sigma, "Per-component Gaussian noise on queries");
  app->add_option("--repeats", cfg.bench.repeats, "Timed runs per query and path (median kept)");
  app->add_flag("--in-memory", cfg.bench.in_memory, "Time only the scan, not file access");
  app->add_option("--tol", cfg.kmeans.tol, "k-means convergence tolerance");
  app->add_option("--max-iter", cfg.kmeans.max_iter, "k-means iteration cap");
}

void write_text(const fs::path &path, const std::string &text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file(path, text);
}

template <typename Fn>
std::string to_string_with(Fn &&fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

void print_decision(std::ostream &out, const KDecision &decision) {
  out << "k  time_reduction  accuracy  silhouette  score\n";
  for (const auto &r : decision.rows) {
    out << r.k << "  " << shortest(r.time_reduction_pct) << "  " << shortest(r.accuracy_pct)
        << "  " << shortest(r.silhouette_avg) << "  " << shortest(r.weighted_score) << '\n';
  }
  const auto top = silhouette_candidates(decision.rows);
  out << "silhouette top:";
  for (int k : top) out << ' ' << k;
  out << '\n';
  out << "best_k=" << decision.best_k << '\n';
}

// Integrity checks run after a bench: every partition verifies, the union of
// partitions covers the gallery, stored rows sit in their nearest cluster,
// and clustered hits agree with serial hits whenever the truth was searched.
std::vector<std::string> integrity_failures(const DecisionTable &table, std::size_t gallery_size) {
  std::vector<std::string> failures;
  for (const auto &index : table.indexes) {
    const auto tag = "k=" + std::to_string(index.k()) + ": ";
    try {
      std::size_t rows = 0;
      for (int c = 0; c < index.k(); ++c) {
        const auto records = load_partition(index, c);
        rows += records.size();
        for (const auto &r : records) {
          if (assign(r.vector, index.model) != c) {
            failures.push_back(tag + "record " + r.subject_id + " is not in its nearest cluster");
          }
        }
      }
      if (rows != gallery_size) failures.push_back(tag + "partitions do not cover the gallery");
    } catch (const Error &e) {
      failures.push_back(tag + e.what());
    }
  }
  for (const auto &report : table.reports) {
    if (report.hit_agreement_pct != 100.0) {
      failures.push_back("k=" + std::to_string(report.k) +
                         ": clustered and serial hits disagree on searched-truth queries");
    }
  }
  return failures;
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Cluster-partitioned ECG fiducial identification"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  // synth
  SynthOptions synth;
  std::string synth_out;
  auto *synth_cmd = app.add_subcommand("synth", "Write a synthetic Gaussian-blob raw gallery");
  synth_cmd->add_option("--subjects", synth.n_subjects, "Number of subjects")->required();
  synth_cmd->add_option("--blobs", synth.n_blobs, "Number of Gaussian blobs");
  synth_cmd->add_option("--spread", synth.blob_spread, "Per-blob standard deviation (raw units)");
  synth_cmd->add_option("--enrollments", synth.enrollments_per_subject, "Raw rows per subject");
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->required();
  synth_cmd->add_option("--out", synth_out, "Output gallery CSV")->required();

  // preprocess
  std::string pre_in, pre_out, pre_stats;
  auto *pre_cmd = app.add_subcommand(
      "preprocess", "Fill missing values, fuse enrollments, round, and z-score a gallery");
  pre_cmd->add_option("--in", pre_in, "Raw gallery CSV")->required();
  pre_cmd->add_option("--out", pre_out, "Processed gallery CSV")->required();
  pre_cmd->add_option("--stats-out", pre_stats, "Scaling statistics sidecar")->required();

  // partition
  std::string part_gallery, part_out;
  int part_k = 0;
  KMeansOptions part_kmeans;
  auto *part_cmd = app.add_subcommand("partition", "Fit k-means and write per-cluster partitions");
  part_cmd->add_option("--gallery", part_gallery, "Processed gallery CSV")->required();
  part_cmd->add_option("--k", part_k, "Number of clusters")->required();
  part_cmd->add_option("--seed", part_kmeans.seed, "k-means++ seed")->required();
  part_cmd->add_option("--out-dir", part_out, "Partition root directory")->required();
  part_cmd->add_option("--tol", part_kmeans.tol, "Convergence tolerance");
  part_cmd->add_option("--max-iter", part_kmeans.max_iter, "Iteration cap");

  // select-k
  std::string sel_gallery, sel_out, sel_rows, sel_range = "2:10";
  DecisionTableConfig sel_cfg;
  MatchThresholds sel_thresholds;
  DecisionWeights sel_weights;
  bool sel_no_knee = false;
  auto *sel_cmd = app.add_subcommand(
      "select-k", "Elbow curve, silhouettes and weighted decision over a range of K");
  sel_cmd->add_option("--gallery", sel_gallery, "Processed gallery CSV");
  auto *sel_seed = sel_cmd->add_option("--seed", sel_cfg.kmeans.seed, "k-means++ and query seed");
  sel_cmd->add_option("--out-dir", sel_out, "Directory for elbow.csv, decision.csv, partitions/");
  sel_cmd->add_option("--rows-from-file", sel_rows,
                      "Score precomputed rows (k,time_reduction,accuracy,silhouette) instead of "
                      "measuring");
  sel_cmd->add_flag("--no-knee", sel_no_knee, "Emit the elbow curve without picking a knee");
  add_bench_options(sel_cmd, sel_cfg, sel_range);
  add_thresholds(sel_cmd, sel_thresholds);
  add_weights(sel_cmd, sel_weights);

  // identify
  std::string id_gallery, id_partitions, id_query, id_query_id, id_stats;
  int id_k = 0;
  MatchThresholds id_thresholds;
  auto *id_cmd = app.add_subcommand("identify", "Identify one probe vector");
  id_cmd->add_option("--gallery", id_gallery, "Processed gallery CSV (serial scan)");
  id_cmd->add_option("--partitions", id_partitions, "Partition root (clustered scan)");
  id_cmd->add_option("--k", id_k, "Cluster count of the partition set to search");
  auto *id_query_opt =
      id_cmd->add_option("--query", id_query, "Probe as 9 comma-separated values");
  auto *id_query_id_opt =
      id_cmd->add_option("--query-id", id_query_id, "Use this enrolled subject's vector as probe");
  id_query_opt->excludes(id_query_id_opt);
  id_cmd->add_option("--stats", id_stats,
                     "Scaling statistics; when given, --query is in raw units and is z-scored");
  add_thresholds(id_cmd, id_thresholds);

  // bench
  std::string bench_gallery, bench_out, bench_range = "2:10";
  DecisionTableConfig bench_cfg;
  MatchThresholds bench_thresholds;
  DecisionWeights bench_weights;
  auto *bench_cmd = app.add_subcommand(
      "bench", "Time clustered against serial identification for every K and score the K values");
  bench_cmd->add_option("--gallery", bench_gallery, "Processed gallery CSV")->required();
  bench_cmd->add_option("--seed", bench_cfg.kmeans.seed, "k-means++ and query seed")->required();
  bench_cmd->add_option("--out-dir", bench_out, "Directory for CSV output and partitions/")
      ->required();
  add_bench_options(bench_cmd, bench_cfg, bench_range);
  add_thresholds(bench_cmd, bench_thresholds);
  add_weights(bench_cmd, bench_weights);

  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth_cmd) {
      const auto records = synth_gallery(synth);
      save_gallery_csv(synth_out, records);
      out << "wrote " << records.size() << " rows to " << synth_out << '\n';
      return kExitOk;
    }

    if (*pre_cmd) {
      auto raw = load_gallery_csv(pre_in);
      const auto n_raw = raw.size();
      const auto result = preprocess(std::move(raw));
      save_gallery_csv(pre_out, result.gallery);
      save_scaling_stats(pre_stats, result.stats);
      out << "read " << n_raw << " rows, wrote " << result.gallery.size() << " subjects to "
          << pre_out << '\n';
      return kExitOk;
    }

    if (*part_cmd) {
      const auto gallery = load_serial(part_gallery);
      const auto fit = kmeans_fit(gallery, part_k, part_kmeans);
      const auto index = partition(gallery, fit.model, part_out);
      out << "k=" << part_k << " iterations=" << fit.model.iterations
          << " ssq=" << shortest(fit.model.ssq) << '\n';
      out << "partition sizes:";
      for (auto s : index.partition_sizes) out << ' ' << s;
      out << '\n' << "manifest: " << (index.directory() / "manifest.txt").string() << '\n';
      return kExitOk;
    }

    if (*sel_cmd) {
      sel_thresholds.validate();
      sel_weights.validate();
      if (!sel_rows.empty()) {
        const auto decision = decide_k(load_decision_csv(sel_rows), sel_weights);
        if (!sel_out.empty()) {
          write_text(fs::path(sel_out) / "decision.csv",
                     to_string_with([&](std::ostream &s) { write_decision_csv(s, decision.rows); }));
        }
        print_decision(out, decision);
        return kExitOk;
      }
      if (sel_gallery.empty() || sel_out.empty() || sel_seed->count() == 0) {
        err << "select-k: --gallery, --out-dir and --seed are required unless --rows-from-file "
               "is given\n";
        return kExitUsage;
      }
      sel_cfg.k_range = parse_k_range(sel_range);
      sel_cfg.query_seed = sel_cfg.kmeans.seed;
      sel_cfg.partition_root = fs::path(sel_out) / "partitions";
      const auto table =
          build_decision_table(sel_gallery, sel_thresholds, sel_weights, sel_cfg);
      write_text(fs::path(sel_out) / "elbow.csv",
                 to_string_with([&](std::ostream &s) { write_elbow_csv(s, table.elbow); }));
      write_text(fs::path(sel_out) / "decision.csv", to_string_with([&](std::ostream &s) {
                   write_decision_csv(s, table.decision.rows);
                 }));
      if (!sel_no_knee && table.elbow.size() >= 3) {
        out << "elbow knee: k=" << detect_knee(table.elbow) << '\n';
      }
      print_decision(out, table.decision);
      return kExitOk;
    }

    if (*id_cmd) {
      id_thresholds.validate();
      if (id_gallery.empty() == id_partitions.empty()) {
        err << "identify: give exactly one of --gallery or --partitions\n";
        return kExitUsage;
      }
      if (!id_partitions.empty() && id_k <= 0) {
        err << "identify: --partitions needs --k\n";
        return kExitUsage;
      }
      if (id_query.empty() == id_query_id.empty()) {
        err << "identify: give exactly one of --query or --query-id\n";
        return kExitUsage;
      }

      std::optional<PartitionIndex> index;
      if (!id_partitions.empty()) index = open_partition_index(id_partitions, id_k);

      FeatureVector probe;
      if (!id_query.empty()) {
        probe = parse_vector(id_query);
        if (!id_stats.empty()) probe = zscore_apply(probe, load_scaling_stats(id_stats));
      } else {
        Gallery source;
        if (index) {
          for (int c = 0; c < index->k(); ++c) {
            auto part = load_partition(*index, c);
            source.insert(source.end(), part.begin(), part.end());
          }
        } else {
          source = load_serial(id_gallery);
        }
        const auto it = std::find_if(source.begin(), source.end(),
                                     [&](const auto &r) { return r.subject_id == id_query_id; });
        if (it == source.end()) {
          err << "identify: subject '" << id_query_id << "' is not enrolled\n";
          return kExitError;
        }
        probe = it->vector;
      }

      const auto result = index ? identify_clustered(probe, *index, id_thresholds)
                                : identify_serial(probe, fs::path(id_gallery), id_thresholds);
      out << "hit=" << result.hit_id.value_or("NONE") << " prd=" << shortest(result.match.prd)
          << " cc=" << shortest(result.match.cc)
          << " confidence=" << shortest(result.match.confidence) << '\n';
      return kExitOk;
    }

    if (*bench_cmd) {
      bench_cfg.k_range = parse_k_range(bench_range);
      bench_cfg.query_seed = bench_cfg.kmeans.seed;
      bench_cfg.partition_root = fs::path(bench_out) / "partitions";
      const auto table =
          build_decision_table(bench_gallery, bench_thresholds, bench_weights, bench_cfg);
      write_text(fs::path(bench_out) / "decision.csv", to_string_with([&](std::ostream &s) {
                   write_decision_csv(s, table.decision.rows);
                 }));
      write_text(fs::path(bench_out) / "queries.csv", to_string_with([&](std::ostream &s) {
                   write_query_csv(s, table.reports);
                 }));
      out << "mode=" << (bench_cfg.bench.in_memory ? "in-memory" : "file-backed") << '\n';
      print_decision(out, table.decision);
      const auto failures = integrity_failures(table, load_serial(bench_gallery).size());
      for (const auto &f : failures) err << "integrity: " << f << '\n';
      return failures.empty() ? kExitOk : kExitIntegrity;
    }
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace ecgid::cli
