// Apache License, Version 2.0, refer to LICENSE.txt

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "test_util.hpp"

namespace greedy_icl {
namespace {

namespace fs = std::filesystem;

class Workdir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("greedy_icl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  // Exit status of the CLI; stdout goes to out.txt and stderr to err.txt.
  int cli(const std::string& args) const {
    const std::string cmd = std::string(GREEDY_ICL_CLI) + " " + args + " > " + path("out.txt") + " 2> " + path("err.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

FitResult small_fit() {
  const auto adj = generate(diagonal_spec(30, 20, 3, 0.05, 4)).adjacency;
  SearchConfig s;
  s.restarts = 2;
  return fit(adj, PriorConfig::defaults_for(adj.model()), s);
}

TEST_F(Workdir, ReportRoundTrip) {
  const auto report = FitReport::of(small_fit(), AttributeModel::bernoulli(), "x.csv");
  save_report(report, path("r.json"));
  EXPECT_EQ(load_report(path("r.json")), report);
}

TEST_F(Workdir, ReportLabelsAreOneBased) {
  const auto report = FitReport::of(small_fit(), AttributeModel::bernoulli());
  const auto json = to_json(report);
  EXPECT_NE(json.find("\"format_version\": \"greedy-icl-report/1\""), std::string::npos);
  const auto j = nlohmann::json::parse(json);
  EXPECT_EQ(j.at("row_labels")[0].get<int>(), report.row_labels[0] + 1);
  EXPECT_EQ(j.at("trace").size(), report.trace.size());
  EXPECT_EQ(j.at("config").at("variant"), "A0");
}

TEST_F(Workdir, ReportRejectsGarbage) {
  write("bad.json", "{not json");
  EXPECT_THROW(load_report(path("bad.json")), InputError);
  write("old.json", R"({"format_version": "other/9"})");
  EXPECT_THROW(load_report(path("old.json")), InputError);
}

TEST_F(Workdir, TraceCsv) {
  save_trace_csv({{0, -10.5, 0, 3, 2}, {1, -4.25, 7, 2, 2}}, path("t.csv"));
  EXPECT_EQ(slurp(path("t.csv")), "sweep,icl,moves,K,G\n0,-10.5,0,3,2\n1,-4.25,7,2,2\n");
}

TEST(Heatmap, IdentityLayout) {
  const auto adj = BipartiteAdjacency::dense(3, 3, {0, 0, 1, 0, 1, 0, 1, 0, 0}, AttributeModel::bernoulli());
  const auto h = heatmap_layout(adj, Partition::from_labels({2, 1, 0}, {0, 1, 2}));
  EXPECT_EQ(h.row_order, (std::vector<std::size_t>{2, 1, 0}));
  EXPECT_EQ(h.row_breaks, (std::vector<std::size_t>{1, 2}));
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(h.at(r, c), r == c ? 0 : 255);
  }
}

TEST(Heatmap, PlantedClustersBecomeContiguous) {
  const auto net = generate(diagonal_spec(40, 30, 3, 0.0, 8));
  const auto p = Partition::from_labels(net.row_labels, net.col_labels);
  const auto h = heatmap_layout(net.adjacency, p);
  EXPECT_EQ(h.row_breaks.size(), static_cast<std::size_t>(p.k() - 1));
  for (std::size_t r = 0; r < 40; ++r) {
    for (std::size_t c = 0; c < 30; ++c) {
      const bool on = p.rows[h.row_order[r]] == p.cols[h.col_order[c]];
      EXPECT_EQ(h.at(r, c), on ? 0 : 255);
    }
  }
}

TEST_F(Workdir, HeatmapFiles) {
  const auto net = generate(diagonal_spec(10, 12, 2, 0.0, 2));
  const auto p = Partition::from_labels(net.row_labels, net.col_labels);
  render_heatmap(net.adjacency, p, path("h.svg"));
  render_heatmap(net.adjacency, p, path("h.ppm"));
  EXPECT_EQ(slurp(path("h.svg")).rfind("<svg", 0), 0u);
  const auto ppm = slurp(path("h.ppm"));
  EXPECT_EQ(ppm.rfind("P6\n240 200\n255\n", 0), 0u);
  EXPECT_EQ(ppm.size(), std::string("P6\n240 200\n255\n").size() + 240u * 200u * 3u);
}

TEST_F(Workdir, CliFitWritesReportTraceAndHeatmap) {
  ASSERT_EQ(cli("simulate --q 0.05 --n 40 --m 30 --k 3 --seed 3 --output " + path("m.csv") + " --truth-output " +
                path("truth.txt")),
            0);
  ASSERT_EQ(cli("fit --input " + path("m.csv") + " --restarts 3 --output " + path("r.json") + " --trace " +
                path("t.csv") + " --heatmap " + path("h.svg")),
            0)
      << slurp(path("err.txt"));
  const auto r = load_report(path("r.json"));
  EXPECT_EQ(r.row_labels.size(), 40u);
  EXPECT_EQ(slurp(path("t.csv")).rfind("sweep,icl,moves,K,G\n", 0), 0u);
  EXPECT_TRUE(fs::exists(path("h.svg")));
  ASSERT_EQ(cli("evaluate --pred " + path("r.json") + " --truth " + path("truth.txt")), 0);
  EXPECT_EQ(slurp(path("out.txt")), "2.000000\n");
}

TEST_F(Workdir, CliEnginesGiveSameReport) {
  ASSERT_EQ(cli("simulate --q 0.2 --n 30 --m 30 --k 3 --seed 6 --format sparse --output " + path("m.txt")), 0);
  for (const std::string engine : {"dense", "sparse"}) {
    ASSERT_EQ(cli("fit --input " + path("m.txt") + " --format sparse --prune on --engine " + engine + " --output " +
                  path(engine + ".json")),
              0);
  }
  auto a = load_report(path("dense.json")), b = load_report(path("sparse.json"));
  EXPECT_FALSE(a.same_result(b));  // the configs differ
  b.search.sparse_engine = false;
  EXPECT_TRUE(a.same_result(b));
}

TEST_F(Workdir, CliSimulateShapes) {
  ASSERT_EQ(cli("simulate --q 0.1 --n 7 --m 5 --k 2 --output " + path("m.csv")), 0);
  const auto adj = load_dense(path("m.csv"), AttributeModel::bernoulli());
  EXPECT_EQ(adj.n_rows(), 7u);
  EXPECT_EQ(adj.n_cols(), 5u);
}

TEST_F(Workdir, CliThetaFile) {
  write("theta.txt", "2 3\n1 2 3\n4 5 6\n");
  ASSERT_EQ(cli("simulate --theta-file " + path("theta.txt") + " --model poisson --n 20 --m 20 --output " +
                path("m.csv") + " --truth-output " + path("truth.txt")),
            0)
      << slurp(path("err.txt"));
  const auto truth = load_labels(path("truth.txt"));
  EXPECT_EQ(truth.rows.size(), 20u);
  for (int l : truth.cols) EXPECT_LT(l, 3);
  EXPECT_NO_THROW(load_dense(path("m.csv"), AttributeModel::poisson()));
}

TEST_F(Workdir, CliDomainViolationExitsOne) {
  write("bad.csv", "1,0\n0,2\n");
  EXPECT_EQ(cli("fit --input " + path("bad.csv") + " --output " + path("r.json")), 1);
  EXPECT_NE(slurp(path("err.txt")).find("bad.csv"), std::string::npos);
}

TEST_F(Workdir, CliCategoriesMisuseExitsTwo) {
  write("m.csv", "1,0\n0,1\n");
  EXPECT_EQ(cli("fit --input " + path("m.csv") + " --categories 3 --output " + path("r.json")), 2);
  EXPECT_EQ(cli("fit --input " + path("m.csv") + " --model categorical --output " + path("r.json")), 2);
  EXPECT_EQ(cli("fit --input " + path("m.csv") + " --model categorical --categories 2 --output " + path("r.json")), 0);
}

TEST_F(Workdir, CliUsageErrors) {
  write("m.csv", "1,0\n0,1\n");
  EXPECT_EQ(cli("fit --input " + path("m.csv")), 2);
  EXPECT_EQ(cli("fit --input " + path("m.csv") + " --kmax 5 --output " + path("r.json")), 2);
  EXPECT_EQ(cli("fit --input " + path("m.csv") + " --kappa 2 --output " + path("r.json")), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  EXPECT_EQ(cli("--help"), 0);
  EXPECT_EQ(cli("fit --input " + path("missing.csv") + " --output " + path("r.json")), 1);
}

TEST_F(Workdir, CliStudy) {
  ASSERT_EQ(cli("study --q-grid 0.05:0.4:0.45 --reps 1 --restarts 1 --n 30 --m 30 --k 3 --out-csv " + path("s.csv") +
                " --out-plot " + path("s.svg")),
            0)
      << slurp(path("err.txt"));
  const auto csv = slurp(path("s.csv"));
  EXPECT_EQ(csv.rfind("q,replicate,nmi,icl,k,g,seconds\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_TRUE(fs::exists(path("s.svg")));
}

}  // namespace
}  // namespace greedy_icl
