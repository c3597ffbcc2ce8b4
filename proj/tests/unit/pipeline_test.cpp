#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "support/fixtures.hpp"

namespace btm {
namespace {

using testing::slurp;
using testing::TempDir;

struct CliResult {
  int exit_code;
  std::string err;
  std::string out;
};

CliResult cli(const std::string& args, const TempDir& scratch) {
  const auto err = scratch / "stderr.txt";
  const auto out = scratch / "stdout.txt";
  const std::string cmd = std::string(BTM_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err), slurp(out)};
}

TEST(Cli, SynthThenAnalyze) {
  TempDir dir;
  ASSERT_EQ(cli("synth --seed 3 --out " + (dir / "pair").string(), dir).exit_code, 0);
  const auto r = cli("analyze --c1 " + (dir / "pair/corpus1").string() + " --c2 " + (dir / "pair/corpus2").string() +
                         " --out " + (dir / "out").string(),
                     dir);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  for (const char* f : {"report.json", "plot_data.csv", "assignments_table.csv", "strengths_1to2.csv", "strengths_2to1.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / f)) << f;
  const auto report = nlohmann::json::parse(slurp(dir / "out/report.json"));
  EXPECT_TRUE(validate_report_json(report).empty());
}

TEST(Cli, OtherSubcommands) {
  TempDir dir;
  const auto c1 = (dir / "pair/corpus1").string();
  const auto c2 = (dir / "pair/corpus2").string();
  ASSERT_EQ(cli("synth --seed 4 --out " + (dir / "pair").string(), dir).exit_code, 0);

  ASSERT_EQ(cli("match --c1 " + c1 + " --c2 " + c2 + " --out " + (dir / "m").string(), dir).exit_code, 0);
  EXPECT_TRUE(slurp(dir / "m/cross_assignments.csv").starts_with("doc_id,cross_topic,cross_similarity\n"));

  const auto v = cli("validate --c1 " + c1 + " --c2 " + c2 + " --cosine-outlier off --out " + (dir / "v").string(), dir);
  ASSERT_EQ(v.exit_code, 0) << v.err;
  EXPECT_NE(v.out.find("1to2 kappa=1"), std::string::npos) << v.out;
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "v/validation.json")).size(), 2u);

  ASSERT_EQ(cli("analyze --c1 " + c1 + " --c2 " + c2 + " --out " + (dir / "a").string(), dir).exit_code, 0);
  ASSERT_EQ(cli("plot-data --report " + (dir / "a/report.json").string() + " --out " + (dir / "p").string(), dir).exit_code,
            0);
  EXPECT_EQ(slurp(dir / "p/plot_data.csv"), slurp(dir / "a/plot_data.csv"));
  ASSERT_EQ(cli("plot-data --c1 " + c1 + " --c2 " + c2 + " --out " + (dir / "q").string(), dir).exit_code, 0);
  EXPECT_EQ(slurp(dir / "q/plot_data.csv"), slurp(dir / "a/plot_data.csv"));
}

TEST(Cli, SynthConfigFile) {
  TempDir dir;
  {
    std::ofstream cfg(dir / "synth.json");
    cfg << R"({"dim": 6, "clusters_shared": 2, "clusters_unique_1": 1, "docs_per_cluster": 7, "outlier_fraction": 0.3})";
  }
  ASSERT_EQ(cli("synth --config " + (dir / "synth.json").string() + " --out " + (dir / "pair").string(), dir).exit_code, 0);
  const auto b1 = load_bundle(dir / "pair/corpus1");
  EXPECT_EQ(b1.dim, 6u);
  EXPECT_EQ(b1.n_topics(), 4u);
  {
    std::ofstream cfg(dir / "bad.json");
    cfg << R"({"dims": 6})";
  }
  EXPECT_EQ(cli("synth --config " + (dir / "bad.json").string() + " --out " + (dir / "x").string(), dir).exit_code, 1);
}

TEST(Cli, MismatchedDimensionsAreInputErrors) {
  TempDir dir;
  write_bundle(generate_pair({.seed = 1, .dim = 8, .clusters_shared = 2, .docs_per_cluster = 4}).corpus_1, dir / "a");
  write_bundle(generate_pair({.seed = 1, .dim = 6, .clusters_shared = 2, .docs_per_cluster = 4}).corpus_2, dir / "b");
  const auto r = cli("analyze --c1 " + (dir / "a").string() + " --c2 " + (dir / "b").string() + " --out " +
                         (dir / "out").string(),
                     dir);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find('8'), std::string::npos) << r.err;
  EXPECT_NE(r.err.find('6'), std::string::npos) << r.err;
}

TEST(Cli, BadInvocationsExitWithOne) {
  TempDir dir;
  EXPECT_EQ(cli("analyze --c1 " + (dir / "nope1").string() + " --c2 " + (dir / "nope2").string(), dir).exit_code, 1);
  EXPECT_EQ(cli("analyze --c1 a", dir).exit_code, 1);
  EXPECT_EQ(cli("analyze --c1 a --c2 b --pool every", dir).exit_code, 1);
  EXPECT_EQ(cli("frobnicate", dir).exit_code, 1);
  {
    std::ofstream junk(dir / "junk.json");
    junk << "{ not json";
  }
  EXPECT_EQ(cli("plot-data --report " + (dir / "junk.json").string() + " --out " + (dir / "p").string(), dir).exit_code, 1);
  EXPECT_EQ(cli("--version", dir).exit_code, 0);
}

TEST(RunAnalyze, CorruptedCountsExitWithTwo) {
  TempDir dir;
  write_synth(generate_pair({.seed = 2, .dim = 6, .clusters_shared = 3, .docs_per_cluster = 8}), dir.path());
  RunConfig config;
  config.corpus_1 = dir / "corpus1";
  config.corpus_2 = dir / "corpus2";
  config.out_dir = dir / "out";
  PipelineHooks hooks;
  hooks.after_count = [](PairCounts& pc) { pc.counts(0, 0) += 1; };
  std::ostringstream err;
  EXPECT_EQ(run_analyze(config, hooks, err), kExitInternalError);
  EXPECT_NE(err.str().find("sum to"), std::string::npos) << err.str();
  EXPECT_EQ(run_analyze(config, {}, err), kExitOk);
}

TEST(RunAnalyze, ThreadCountDoesNotChangeOutput) {
  TempDir dir;
  write_synth(generate_pair({.seed = 5, .dim = 10, .clusters_shared = 3, .clusters_unique_1 = 2,
                             .clusters_unique_2 = 1, .docs_per_cluster = 30, .cluster_spread = 2,
                             .centroid_separation = 5, .outlier_fraction = 0.2}),
              dir.path());
  std::string reference;
  for (unsigned threads : {1u, 2u, 4u, 8u}) {
    RunConfig config;
    config.corpus_1 = dir / "corpus1";
    config.corpus_2 = dir / "corpus2";
    config.out_dir = dir / ("out" + std::to_string(threads));
    config.threads = threads;
    ASSERT_EQ(run_analyze(config), kExitOk);
    const std::string all = slurp(config.out_dir / "report.json") + slurp(config.out_dir / "plot_data.csv") +
                            slurp(config.out_dir / "assignments_table.csv");
    if (reference.empty()) reference = all;
    EXPECT_EQ(all, reference) << threads;
  }
}

TEST(RunConfig, Validation) {
  RunConfig c;
  c.corpus_1 = "a";
  c.corpus_2 = "b";
  EXPECT_NO_THROW(validate_run_config(c));
  c.unique_threshold = 0.0;
  EXPECT_THROW(validate_run_config(c), Error);
  c.unique_threshold = 1.0;
  c.top_k = 0;
  EXPECT_THROW(validate_run_config(c), Error);
  c.top_k = 3;
  c.corpus_2 = "a";
  EXPECT_THROW(validate_run_config(c), Error);
}

}  // namespace
}  // namespace btm
