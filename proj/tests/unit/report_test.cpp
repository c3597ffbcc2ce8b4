#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include "support/fixtures.hpp"

namespace btm {
namespace {

AnalysisResult analyze_synth(const SynthConfig& config) {
  const auto pair = generate_pair(config);
  RunConfig run;
  return analyze(pair.corpus_1, pair.corpus_2, run);
}

TopicMeasures topic_with(TopicId id, std::size_t size, const std::vector<std::pair<TopicId, double>>& row) {
  TopicMeasures t;
  t.id = id;
  t.label = "topic " + std::to_string(id);
  t.native_size = size;
  for (const auto& [cross, strength] : row) t.pairings.push_back({cross, "cross " + std::to_string(cross), 1, strength});
  return t;
}

AnalysisReport report_with(std::vector<TopicMeasures> forward, std::vector<TopicMeasures> backward = {}) {
  AnalysisReport r;
  r.forward.direction = Direction::one_to_two;
  r.backward.direction = Direction::two_to_one;
  r.forward.per_topic = std::move(forward);
  r.backward.per_topic = std::move(backward);
  return r;
}

TEST(Report, DiagonalFactorRows) {
  const auto r = analyze_synth({.seed = 2, .dim = 6, .clusters_shared = 4, .docs_per_cluster = 15,
                                .cluster_spread = 0.5, .centroid_separation = 20});
  const auto j = to_json(r.report);
  ASSERT_EQ(j["tables"]["factors"].size(), 2u);
  for (const auto& row : j["tables"]["factors"]) {
    EXPECT_EQ(row["c"], 1.0);
    EXPECT_EQ(row["u"], 0.0);
    EXPECT_EQ(row["a"], 1.0);
    EXPECT_EQ(row["display"]["c"], "1.00");
  }
}

TEST(Report, FactorTableColumns) {
  const auto r = analyze_synth({.seed = 3, .dim = 10, .clusters_shared = 3, .clusters_unique_1 = 2,
                                .clusters_unique_2 = 1, .docs_per_cluster = 20, .outlier_fraction = 0.2});
  const auto j = to_json(r.report);
  const auto& row = j["tables"]["factors"][0];
  std::vector<std::string> keys;
  for (const auto& [k, _] : row.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"native_corpus", "direction", "c", "c_w_minus_c", "u", "u_w_minus_u", "a",
                                            "a_w_minus_a", "display"}));
  EXPECT_EQ(row["native_corpus"], "synth1");
  EXPECT_NEAR(row["c_w_minus_c"].get<double>(), r.report.forward.c_w - r.report.forward.c, 1e-15);
  EXPECT_EQ(j["tables"]["factors"][1]["direction"], "2to1");
  EXPECT_EQ(j["tables"]["unique_topics"][0]["rows"].size(), r.report.forward.unique_topics.size());
}

TEST(Report, SerializationIsDeterministic) {
  const SynthConfig config{.seed = 4, .dim = 8, .clusters_shared = 2, .clusters_unique_1 = 1, .docs_per_cluster = 15,
                           .outlier_fraction = 0.3};
  EXPECT_EQ(to_json(analyze_synth(config).report).dump(2), to_json(analyze_synth(config).report).dump(2));
}

TEST(Report, TopicsSortedBySizeDescending) {
  const auto r = analyze_synth({.seed = 5, .dim = 8, .clusters_shared = 4, .docs_per_cluster = 10});
  const auto& topics = r.report.forward.per_topic;
  for (std::size_t k = 1; k < topics.size(); ++k) {
    EXPECT_GE(topics[k - 1].native_size, topics[k].native_size);
    if (topics[k - 1].native_size == topics[k].native_size) {
      EXPECT_LT(topics[k - 1].id, topics[k].id);
    }
  }
}

TEST(Report, MissingDirectionIsRejected) {
  auto r = analyze_synth({.seed = 6, .dim = 4, .clusters_shared = 2, .docs_per_cluster = 5}).report;
  EXPECT_THROW(build_report(r.metadata, r.forward, r.forward, r.validation_forward, r.validation_backward), Error);
}

TEST(Report, JsonValidatesAndRoundTrips) {
  const auto r = analyze_synth({.seed = 7, .dim = 10, .clusters_shared = 3, .clusters_unique_2 = 2,
                                .docs_per_cluster = 12, .outlier_fraction = 0.25});
  const auto j = nlohmann::json::parse(to_json(r.report).dump());
  EXPECT_TRUE(validate_report_json(j).empty());
  const auto back = report_from_json(j);
  EXPECT_EQ(to_json(back).dump(2), to_json(r.report).dump(2));

  auto broken = j;
  broken["directions"][0].erase("u");
  EXPECT_FALSE(validate_report_json(broken).empty());
  broken = j;
  broken["metadata"]["pool"] = 3;
  EXPECT_FALSE(validate_report_json(broken).empty());
  EXPECT_THROW(report_from_json(broken), Error);
}

TEST(Report, CreatedFollowsSourceDateEpoch) {
  ::setenv("SOURCE_DATE_EPOCH", "86400", 1);
  EXPECT_EQ(reproducible_timestamp(), "1970-01-02T00:00:00Z");
  ::unsetenv("SOURCE_DATE_EPOCH");
  EXPECT_FALSE(reproducible_timestamp());
}

TEST(PlotData, MergesSmallPairs) {
  const auto r = report_with({topic_with(0, 10, {{3, 0.6}, {1, 0.3}, {4, 0.06}, {0, 0.03}, {2, 0.01}})});
  const auto segs = plot_data(r);
  ASSERT_EQ(segs.size(), 4u);
  EXPECT_EQ(segs[0].strength, 0.6);
  EXPECT_EQ(segs[0].cross_topic, 3);
  EXPECT_EQ(segs[1].strength, 0.3);
  EXPECT_EQ(segs[2].strength, 0.06);
  EXPECT_TRUE(segs[3].is_remaining);
  EXPECT_FALSE(segs[3].cross_topic);
  EXPECT_NEAR(segs[3].strength, 0.04, 1e-15);
  EXPECT_EQ(segs[3].rank, 4u);
}

TEST(PlotData, OutlierOnlyRow) {
  const auto segs = plot_data(report_with({topic_with(0, 5, {{kOutlierTopic, 1.0}})}));
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_TRUE(segs[0].is_outlier);
  EXPECT_EQ(segs[0].cross_topic, kOutlierTopic);
  EXPECT_EQ(segs[0].strength, 1.0);
}

TEST(PlotData, SmallOutlierStaysSeparate) {
  const auto segs = plot_data(report_with({topic_with(0, 5, {{1, 0.97}, {kOutlierTopic, 0.02}, {0, 0.01}})}));
  ASSERT_EQ(segs.size(), 3u);
  EXPECT_TRUE(segs[1].is_remaining);
  EXPECT_TRUE(segs[2].is_outlier);
  EXPECT_EQ(segs[2].strength, 0.02);
}

TEST(PlotData, TopKClampsAndRejectsZero) {
  const auto r = report_with({topic_with(0, 9, {{0, 1.0}}), topic_with(1, 4, {{1, 1.0}})}, {topic_with(0, 3, {{0, 1.0}})});
  EXPECT_EQ(plot_data(r, 100).size(), 3u);
  const auto one = plot_data(r, 1);
  ASSERT_EQ(one.size(), 2u);
  EXPECT_EQ(one[0].native_topic, 0);
  EXPECT_EQ(one[1].direction, Direction::two_to_one);
  EXPECT_THROW(plot_data(r, 0), Error);
}

TEST(PlotData, SegmentsSumToOne) {
  const auto r = analyze_synth({.seed = 8, .dim = 12, .clusters_shared = 4, .clusters_unique_1 = 2,
                                .clusters_unique_2 = 2, .docs_per_cluster = 25, .cluster_spread = 3,
                                .centroid_separation = 6, .outlier_fraction = 0.3});
  std::map<std::pair<Direction, TopicId>, double> sums;
  for (const auto& s : plot_data(r.report, 25, 0.05)) sums[{s.direction, s.native_topic}] += s.strength;
  EXPECT_EQ(sums.size(), r.report.forward.per_topic.size() + r.report.backward.per_topic.size());
  for (const auto& [key, sum] : sums) EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(PlotData, CsvColumns) {
  std::ostringstream out;
  write_plot_csv(plot_data(report_with({topic_with(0, 5, {{1, 0.5}, {kOutlierTopic, 0.5}})})), out);
  EXPECT_EQ(out.str(),
            "direction,native_topic,native_label,rank,cross_topic,cross_label,strength,is_outlier,is_remaining\n"
            "1to2,0,topic 0,1,1,cross 1,0.5,0,0\n"
            "1to2,0,topic 0,2,-1,cross -1,0.5,1,0\n");
}

}  // namespace
}  // namespace btm
