#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "cli.hpp"
#include "ecgid/gallery_io.hpp"
#include "ecgid/k_selection.hpp"
#include "ecgid/partition_store.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace ecgid::cli {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ecgid");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  std::string path(const std::string &name) const { return (dir_ / name).string(); }

  // Raw synthetic gallery, preprocessed into processed.csv.
  void make_gallery(int subjects, int blobs, int enrollments = 1) {
    ASSERT_EQ(invoke({"synth", "--subjects", std::to_string(subjects), "--blobs",
                      std::to_string(blobs), "--enrollments", std::to_string(enrollments),
                      "--seed", "11", "--out", path("raw.csv")})
                  .code,
              kExitOk);
    const auto r = invoke({"preprocess", "--in", path("raw.csv"), "--out", path("processed.csv"),
                           "--stats-out", path("stats.txt")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }

  oracle::TempDir dir_{"cli"};
};

TEST_F(CliTest, PreprocessFusesDuplicates) {
  make_gallery(30, 3, 2);
  EXPECT_EQ(load_serial(path("processed.csv")).size(), 30u);
  EXPECT_TRUE(fs::exists(path("stats.txt")));
}

TEST_F(CliTest, MalformedRowCitesRowNumber) {
  write_file(path("bad.csv"), std::string(kGalleryHeader) +
                                  "\nA,1,2,3,4,5,6,7,8,9\nB,1,2,x,4,5,6,7,8,9\n");
  const auto r = invoke({"preprocess", "--in", path("bad.csv"), "--out", path("o.csv"),
                         "--stats-out", path("s.txt")});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_NE(r.err.find("row 3"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("o.csv")));
}

TEST_F(CliTest, PartitionRejectsKAboveGallerySize) {
  make_gallery(5, 1);
  const auto r = invoke({"partition", "--gallery", path("processed.csv"), "--k", "6", "--seed",
                         "1", "--out-dir", path("parts")});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, PartitionIsReproducible) {
  make_gallery(200, 4);
  for (const char *out : {"a", "b"}) {
    const auto r = invoke({"partition", "--gallery", path("processed.csv"), "--k", "4", "--seed",
                           "7", "--out-dir", path(out)});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
  std::size_t files = 0;
  for (const auto &entry : fs::directory_iterator(dir_ / "a" / "k=4")) {
    const auto twin = dir_ / "b" / "k=4" / entry.path().filename();
    ASSERT_TRUE(fs::exists(twin));
    EXPECT_EQ(read_file(entry.path()), read_file(twin)) << entry.path().filename();
    ++files;
  }
  EXPECT_EQ(files, 5u);
}

TEST_F(CliTest, IdentifyEnrolledSubject) {
  make_gallery(100, 3);
  auto r = invoke({"identify", "--gallery", path("processed.csv"), "--query-id", "S007"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out, "hit=S007 prd=0 cc=1 confidence=50.5\n");

  ASSERT_EQ(invoke({"partition", "--gallery", path("processed.csv"), "--k", "3", "--seed", "1",
                    "--out-dir", path("parts")})
                .code,
            kExitOk);
  r = invoke({"identify", "--partitions", path("parts"), "--k", "3", "--query-id", "S042"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("hit=S042 ", 0), 0u) << r.out;

  r = invoke({"identify", "--partitions", path("parts"), "--k", "4", "--query-id", "S042"});
  EXPECT_EQ(r.code, kExitError);
  r = invoke({"identify", "--gallery", path("processed.csv"), "--query", "1,2,3"});
  EXPECT_EQ(r.code, kExitError);
  r = invoke({"identify", "--gallery", path("processed.csv")});
  EXPECT_EQ(r.code, kExitUsage);
}

TEST_F(CliTest, SelectKFromInjectedRows) {
  write_file(path("rows.csv"),
             "k,time_reduction,accuracy,silhouette\n"
             "2,18.57,97,0.39\n3,57.37,100,0.32\n4,73.10,96,0.35\n5,79.26,100,0.32\n"
             "6,80.95,94,0.28\n7,83.43,98,0.29\n8,82.34,98,0.27\n9,86.14,97,0.24\n");
  const auto r = invoke({"select-k", "--rows-from-file", path("rows.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("silhouette top: 2 4 3\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("best_k=5\n"), std::string::npos) << r.out;

  EXPECT_EQ(invoke({"select-k", "--rows-from-file", path("rows.csv"), "--w-time", "0.9"}).code,
            kExitError);
  EXPECT_EQ(invoke({"select-k"}).code, kExitUsage);
}

TEST_F(CliTest, BenchOnBlobsWritesEightRows) {
  make_gallery(400, 5);
  const auto r = invoke({"bench", "--gallery", path("processed.csv"), "--seed", "3", "--out-dir",
                         path("bench"), "--queries", "30", "--repeats", "1", "--in-memory"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("mode=in-memory\n"), std::string::npos);
  const auto rows = load_decision_csv(dir_ / "bench" / "decision.csv");
  ASSERT_EQ(rows.size(), 8u);
  for (int i = 0; i < 8; ++i) {
    EXPECT_EQ(rows[i].k, i + 2);
    EXPECT_EQ(rows[i].accuracy_pct, 100.0);
  }
  const auto queries = read_file(dir_ / "bench" / "queries.csv");
  EXPECT_EQ(std::count(queries.begin(), queries.end(), '\n'), 1 + 8 * 30);
}

TEST_F(CliTest, SelectKWritesElbowAndDecision) {
  make_gallery(150, 3);
  const auto r = invoke({"select-k", "--gallery", path("processed.csv"), "--seed", "2",
                         "--out-dir", path("sel"), "--k-range", "2:6", "--queries", "10",
                         "--repeats", "1", "--in-memory"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("elbow knee: k="), std::string::npos);
  EXPECT_EQ(read_file(dir_ / "sel" / "elbow.csv").rfind("k,ssq\n", 0), 0u);
  EXPECT_EQ(load_decision_csv(dir_ / "sel" / "decision.csv").size(), 4u);
  EXPECT_EQ(invoke({"select-k", "--gallery", path("processed.csv"), "--seed", "2", "--out-dir",
                    path("sel"), "--k-range", "5:5"})
                .code,
            kExitError);
}

TEST(CliHelp, DocumentsDefaults) {
  auto r = invoke({"bench", "--help"});
  EXPECT_EQ(r.code, kExitOk);
  for (const char *needle : {"[14]", "[0.995]", "[0.5]", "[0.2]", "[0.3]", "[2:10]", "[5]"}) {
    EXPECT_NE(r.out.find(needle), std::string::npos) << needle << "\n" << r.out;
  }
  r = invoke({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  for (const char *sub : {"synth", "preprocess", "partition", "select-k", "identify", "bench"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"bench", "--bogus"}).code, kExitUsage);
}

}  // namespace
}  // namespace ecgid::cli
