#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"
#include "dtwreg/core.hpp"
#include "dtwreg/synth.hpp"
#include "oracles.hpp"

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = dtwreg::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

class CliTest : public ::testing::Test {
protected:
  oracle::TempDir dir{"cli"};

  std::string make_data(std::size_t wafers = 24, const std::string& name = "d.csv") {
    const auto path = dir.file(name);
    auto r = run({"generate", "--wafers", std::to_string(wafers), "--seed", "5", "-o", path});
    EXPECT_EQ(r.code, 0) << r.err;
    return path;
  }
};

}  // namespace

TEST_F(CliTest, GenerateWritesDatasetAndSidecar) {
  const auto path = make_data(10);
  auto ds = dtwreg::load_dataset(path);
  EXPECT_EQ(ds.size(), 10u);
  EXPECT_EQ(ds.channel_order().size(), 11u);
  const auto meta = nlohmann::json::parse(oracle::slurp(dtwreg::meta_path_for(path)));
  EXPECT_EQ(meta["config"]["n_wafers"], 10);
  EXPECT_EQ(meta["config"]["seed"], 5);

  dtwreg::SynthConfig cfg;
  cfg.n_wafers = 10;
  cfg.seed = 5;
  EXPECT_EQ(ds, dtwreg::generate(cfg));
}

TEST_F(CliTest, GenerateIsByteIdenticalOnRepeat) {
  const auto a = make_data(15, "a.csv");
  const auto b = make_data(15, "b.csv");
  EXPECT_EQ(oracle::slurp(a), oracle::slurp(b));
  EXPECT_EQ(oracle::slurp(dtwreg::meta_path_for(a)), oracle::slurp(dtwreg::meta_path_for(b)));
}

TEST_F(CliTest, GenerateRejectsBadArguments) {
  EXPECT_EQ(run({"generate", "--wafers", "0", "-o", dir.file("x.csv")}).code, 2);
  EXPECT_EQ(run({"generate", "--wafers", "abc", "-o", dir.file("x.csv")}).code, 2);
  EXPECT_EQ(run({"generate", "--wafers", "5"}).code, 2);
  auto r = run({"generate", "--jitter", "30", "-o", dir.file("x.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("jitter_max"), std::string::npos) << r.err;
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
}

TEST_F(CliTest, StatsWritesFortyFourFeatureColumns) {
  const auto data = make_data(8);
  auto r = run({"stats", "-i", data});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(oracle::count_lines(r.out), 9u);
  const auto header = r.out.substr(0, r.out.find('\n'));
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 45);

  const auto out = dir.file("f/feat.csv");
  ASSERT_EQ(run({"stats", "-i", data, "-o", out, "--split", "20"}).code, 0);
  EXPECT_EQ(oracle::count_lines(oracle::slurp(out)), 9u);
  EXPECT_EQ(run({"stats", "-i", data, "--split", "nope"}).code, 2);
}

TEST_F(CliTest, MalformedInputExitsTwoMissingInputExitsOne) {
  const auto bad = dir.file("bad.csv");
  write_text(bad, "wafer_id,x\n1,2\n");
  EXPECT_EQ(run({"stats", "-i", bad}).code, 2);
  auto r = run({"stats", "-i", dir.file("absent.csv")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("absent.csv"), std::string::npos) << r.err;
}

TEST_F(CliTest, WindowSweepHasOneRowPerValue) {
  const auto data = make_data(24);
  const auto prefix = dir.file("rep/sweep");
  auto r = run({"evaluate", "-i", data, "-o", prefix, "--sweep", "window", "--folds", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(oracle::count_lines(r.out), 6u);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "model,x,mape_mean,mape_std");
  for (const char* ext : {".json", ".folds.csv", ".summary.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(prefix + ext)) << ext;
  }
  EXPECT_EQ(oracle::slurp(prefix + ".summary.csv"), r.out);
  EXPECT_EQ(oracle::count_lines(oracle::slurp(prefix + ".folds.csv")), 1u + 5 * 4);

  r = run({"evaluate", "-i", data, "-o", prefix, "--sweep", "k", "--values", "1,3", "--folds", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(oracle::count_lines(r.out), 3u);
}

TEST_F(CliTest, ComparisonCoversEveryChannelCountAndModel) {
  const auto data = make_data(22);
  auto r = run({"evaluate", "-i", data, "-o", dir.file("cmp"), "--channels-max", "11", "--folds", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(oracle::count_lines(r.out), 1u + 33);
  const auto doc = nlohmann::json::parse(oracle::slurp(dir.file("cmp") + ".json"));
  EXPECT_EQ(doc["kind"], "comparison");

  r = run({"evaluate", "-i", data, "-o", dir.file("one"), "--channels-max", "2", "--models", "knndtw,r4m", "--folds",
           "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(oracle::count_lines(r.out), 1u + 4);
}

TEST_F(CliTest, EvaluateRejectsBadOptions) {
  const auto data = make_data(12);
  const auto prefix = dir.file("x");
  EXPECT_EQ(run({"evaluate", "-i", data, "-o", prefix, "--models", "svm"}).code, 2);
  EXPECT_EQ(run({"evaluate", "-i", data, "-o", prefix, "--sweep", "depth"}).code, 2);
  EXPECT_EQ(run({"evaluate", "-i", data, "-o", prefix, "--weighting", "cubic"}).code, 2);
  EXPECT_EQ(run({"evaluate", "-i", data, "-o", prefix, "--jobs", "0"}).code, 2);
  EXPECT_EQ(run({"evaluate", "-i", data, "-o", prefix, "--values", "1"}).code, 2);
  EXPECT_EQ(run({"evaluate", "-i", data}).code, 2);
}

TEST_F(CliTest, ExplainNearestDuplicateHasZeroDistance) {
  const auto base = dtwreg::load_dataset(make_data(5));
  auto wafers = base.wafers();
  auto copy = wafers[2];
  copy.wafer_id = "W9999";
  wafers.push_back(copy);
  const auto path = dir.file("dup.csv");
  dtwreg::save_dataset(dtwreg::Dataset(wafers, base.channel_order()), path);

  const auto align = dir.file("out/align.csv");
  const auto report = dir.file("out/report.json");
  auto r = run({"explain", "-i", path, "--query", "W9999", "-o", align, "--report", report});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("against " + wafers[2].wafer_id), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("distance 0\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("region,begin,end,cost\n"), std::string::npos);

  const auto doc = nlohmann::json::parse(oracle::slurp(report));
  EXPECT_EQ(doc["nearest"]["distance"], 0.0);
  EXPECT_EQ(doc["ranked"].size(), 5u);
  // Identical series align on the diagonal: one row per tick plus two header lines.
  EXPECT_EQ(oracle::count_lines(oracle::slurp(align)), 57u + 2);
}

TEST_F(CliTest, ExplainAgainstFurthestAndById) {
  const auto data = make_data(6);
  const auto ds = dtwreg::load_dataset(data);
  const auto q = ds[0].wafer_id, other = ds[3].wafer_id;
  auto r = run({"explain", "-i", data, "--query", q, "--against", "furthest", "--window", "2", "--regions", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(oracle::count_lines(r.out), 5u + 3);

  r = run({"explain", "-i", data, "--query", q, "--against", other, "--channel",
           dtwreg::format_real(ds.channel_order()[4])});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("against " + other), std::string::npos);

  EXPECT_EQ(run({"explain", "-i", data, "--query", "nobody"}).code, 2);
  EXPECT_EQ(run({"explain", "-i", data, "--query", q, "--against", "nobody"}).code, 2);
  EXPECT_EQ(run({"explain", "-i", data, "--query", q, "--against", q}).code, 2);
  EXPECT_EQ(run({"explain", "-i", data, "--query", q, "--channel", "1.5"}).code, 2);
  EXPECT_EQ(run({"explain", "-i", data, "--query", q, "--regions", "0"}).code, 2);
}

TEST_F(CliTest, VersionAndHelp) {
  auto r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(dtwreg::library_version()), std::string::npos) << r.out;
  EXPECT_NE(r.out.find(dtwreg::kGeneratorVersion), std::string::npos) << r.out;
  r = run({"evaluate", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--window"), std::string::npos);
}

TEST_F(CliTest, ConfigFileFillsUnsetFlagsOnly) {
  const auto cfg = dir.file("gen.json");
  write_text(cfg, R"({"wafers": 9, "seed": 5, "channels": 3})");
  const auto path = dir.file("c.csv");
  auto r = run({"generate", "--config", cfg, "--channels", "4", "-o", path});
  ASSERT_EQ(r.code, 0) << r.err;
  auto ds = dtwreg::load_dataset(path);
  EXPECT_EQ(ds.size(), 9u);
  EXPECT_EQ(ds.channel_order().size(), 4u);

  write_text(cfg, R"({"wafers": 9, "colour": "red"})");
  r = run({"generate", "--config", cfg, "-o", path});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("colour"), std::string::npos);

  write_text(cfg, "{not json");
  EXPECT_EQ(run({"generate", "--config", cfg, "-o", path}).code, 2);
  EXPECT_EQ(run({"generate", "--config", dir.file("none.json"), "-o", path}).code, 1);
}

TEST_F(CliTest, ConfigFileAcceptsListValues) {
  const auto data = make_data(20);
  const auto cfg = dir.file("eval.json");
  write_text(cfg, R"({"sweep": "window", "values": [0, 2], "folds": 4})");
  auto r = run({"evaluate", "-i", data, "-o", dir.file("s"), "--config", cfg});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(oracle::count_lines(r.out), 3u);
}
