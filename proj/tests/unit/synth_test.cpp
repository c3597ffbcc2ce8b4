#include <gtest/gtest.h>

#include <random>

#include "support/fixtures.hpp"

namespace btm {
namespace {

using testing::TempDir;

struct Directions {
  MeasureReport forward;
  MeasureReport backward;
};

Directions run(const SynthPair& p, Pool pool = Pool::both) {
  const auto table = build_assignment_table(p.corpus_1, p.corpus_2);
  const auto f = pairing_strengths(count_pairs(table, Direction::one_to_two, pool));
  const auto b = pairing_strengths(count_pairs(table, Direction::two_to_one, pool));
  return {compute_measures(f, p.corpus_1, p.corpus_2), compute_measures(b, p.corpus_2, p.corpus_1)};
}

TEST(Synth, SameSeedGivesIdenticalFiles) {
  const SynthConfig config{.seed = 12, .dim = 10, .clusters_shared = 3, .clusters_unique_1 = 1, .docs_per_cluster = 15,
                           .outlier_fraction = 0.2};
  TempDir a, b;
  write_synth(generate_pair(config), a.path());
  write_synth(generate_pair(config), b.path());
  for (const char* f : {"corpus1/manifest.json", "corpus1/doc_embeddings.f32le", "corpus1/topic_embeddings.f32le",
                        "corpus1/assignments.csv", "corpus2/manifest.json", "corpus2/doc_embeddings.f32le",
                        "corpus2/assignments.csv", "ground_truth.json"})
    EXPECT_EQ(testing::slurp(a / f), testing::slurp(b / f)) << f;
  auto other = config;
  other.seed = 13;
  TempDir c;
  write_synth(generate_pair(other), c.path());
  EXPECT_NE(testing::slurp(a / "corpus1/doc_embeddings.f32le"), testing::slurp(c / "corpus1/doc_embeddings.f32le"));
}

TEST(Synth, WrittenPairLoadsBack) {
  const auto pair = generate_pair({.seed = 2, .dim = 8, .clusters_shared = 2, .clusters_unique_2 = 2,
                                   .docs_per_cluster = 12, .outlier_fraction = 0.25});
  TempDir dir;
  write_synth(pair, dir.path());
  const auto b1 = load_bundle(dir / "corpus1");
  const auto b2 = load_bundle(dir / "corpus2");
  EXPECT_EQ(b1.n_docs(), pair.corpus_1.n_docs());
  EXPECT_EQ(b2.native_assignments, pair.corpus_2.native_assignments);
  EXPECT_EQ(b2.outlier, OutlierEmbedding::centroid);
}

TEST(Synth, GroundTruthStructure) {
  const auto plain = generate_pair({.seed = 1});
  EXPECT_TRUE(plain.truth.unique_1.empty());
  EXPECT_TRUE(plain.truth.unique_2.empty());
  EXPECT_EQ(plain.truth.shared.size(), 5u);
  EXPECT_FALSE(plain.corpus_1.has_outlier());

  const auto mixed = generate_pair({.seed = 9, .dim = 12, .clusters_shared = 2, .clusters_unique_1 = 3,
                                    .clusters_unique_2 = 1, .docs_per_cluster = 10, .outlier_fraction = 0.5});
  EXPECT_EQ(mixed.truth.unique_1, (std::vector<TopicId>{2, 3, 4}));
  EXPECT_EQ(mixed.truth.unique_2.size(), 1u);
  EXPECT_EQ(mixed.corpus_1.n_topics(), 6u);  // 5 clusters + outlier
  EXPECT_EQ(mixed.corpus_2.n_topics(), 4u);
  EXPECT_EQ(mixed.truth.outliers_1, 50u);
  EXPECT_EQ(mixed.corpus_1.topic(kOutlierTopic).native_size, 50u);
  for (const auto& c : mixed.truth.shared)
    EXPECT_EQ(mixed.corpus_1.topic(c.topic_1).label, mixed.corpus_2.topic(c.topic_2).label);
}

TEST(Synth, RejectsInvalidConfigs) {
  const auto rejects = [](SynthConfig c) {
    try {
      generate_pair(c);
      return false;
    } catch (const Error& e) {
      return e.kind() == ErrorKind::invalid_config;
    }
  };
  EXPECT_TRUE(rejects({.clusters_shared = 0, .clusters_unique_1 = 2}));
  EXPECT_TRUE(rejects({.dim = 3, .clusters_shared = 4}));
  EXPECT_TRUE(rejects({.cluster_spread = 2.0, .centroid_separation = 1.0}));
  EXPECT_TRUE(rejects({.outlier_fraction = 1.0}));
  EXPECT_TRUE(rejects({.docs_per_cluster = 0}));
  EXPECT_THROW(synth_config_from_json(nlohmann::json{{"seeds", 3}}), Error);
  EXPECT_EQ(synth_config_from_json(nlohmann::json{{"seed", 3}, {"dim", 9}}).dim, 9u);
}

TEST(Synth, SeparatedSharedClustersAreClose) {
  const auto m = run(generate_pair({.seed = 5, .dim = 16, .clusters_shared = 5}));
  EXPECT_GE(m.forward.c, 0.95);
  EXPECT_GE(m.backward.c, 0.95);
  EXPECT_GE(m.forward.a, 0.9);
  EXPECT_TRUE(m.forward.unique_topics.empty());
}

TEST(Synth, DiagonalInstanceGivesUnitCloseness) {
  const auto m = run(generate_pair({.seed = 6, .dim = 5, .clusters_shared = 4, .docs_per_cluster = 20,
                                    .cluster_spread = 0.5, .centroid_separation = 20}));
  for (const auto* d : {&m.forward, &m.backward}) {
    EXPECT_EQ(d->c, 1.0);
    EXPECT_EQ(d->u, 0.0);
    EXPECT_EQ(d->a, 1.0);
  }
}

TEST(Synth, DisjointThemesAreFullyUnique) {
  const SynthConfig config{.seed = 8, .dim = 8, .clusters_shared = 0, .clusters_unique_1 = 4, .clusters_unique_2 = 4,
                           .docs_per_cluster = 25, .centroid_separation = 20, .outlier_fraction = 0.3};
  const auto pair = generate_pair(config);
  const auto m = run(pair);
  EXPECT_EQ(m.forward.u, 1.0);
  EXPECT_EQ(m.backward.u, 1.0);
  EXPECT_EQ(m.forward.unique_topics.size(), 4u);
  EXPECT_EQ(m.backward.unique_topics.size(), 4u);
  EXPECT_EQ(m.forward.relationship, Relationship::independent);
}

TEST(Synth, MoreOutliersRaiseUniqueness) {
  SynthConfig config{.seed = 31, .dim = 10, .clusters_shared = 3, .clusters_unique_1 = 2, .clusters_unique_2 = 2,
                     .docs_per_cluster = 30};
  const double u0 = run(generate_pair(config)).forward.u;
  config.outlier_fraction = 0.4;
  const double u4 = run(generate_pair(config)).forward.u;
  EXPECT_GT(u4, u0);
}

TEST(Oracle, MatchesPipelineOnRandomConfigs) {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<std::size_t> shared(0, 3), unique(0, 3), docs(3, 15);
  std::uniform_real_distribution<double> spread(0.3, 4.0), fraction(0.0, 0.6);
  int checked = 0;
  while (checked < 120) {
    SynthConfig c;
    c.seed = rng();
    c.clusters_shared = shared(rng);
    c.clusters_unique_1 = unique(rng);
    c.clusters_unique_2 = unique(rng);
    if (c.clusters_shared + c.clusters_unique_1 == 0 || c.clusters_shared + c.clusters_unique_2 == 0) continue;
    c.dim = c.clusters_shared + c.clusters_unique_1 + c.clusters_unique_2 + 2;
    c.docs_per_cluster = docs(rng);
    c.cluster_spread = spread(rng);
    c.centroid_separation = 4.0;
    c.outlier_fraction = fraction(rng);
    const auto pair = generate_pair(c);
    if (pair.corpus_1.n_docs() + pair.corpus_2.n_docs() > 200) continue;
    ++checked;
    for (Pool pool : {Pool::both, Pool::native_only}) {
      Directions m;
      try {
        m = run(pair, pool);
      } catch (const Error& e) {
        // native-only pools can leave every topic of a direction undefined
        ASSERT_EQ(e.kind(), ErrorKind::no_native_topics);
        EXPECT_THROW(brute_force_report(pair.corpus_1, pair.corpus_2, pool), Error);
        continue;
      }
      const auto o = brute_force_report(pair.corpus_1, pair.corpus_2, pool);
      for (const auto& [got, want] : {std::pair{&m.forward, &o.forward.measures}, std::pair{&m.backward, &o.backward.measures}}) {
        EXPECT_NEAR(got->c, want->c, 1e-9);
        EXPECT_NEAR(got->c_w, want->c_w, 1e-9);
        EXPECT_NEAR(got->u, want->u, 1e-9);
        EXPECT_NEAR(got->u_w, want->u_w, 1e-9);
        EXPECT_NEAR(got->a, want->a, 1e-9);
        EXPECT_NEAR(got->a_w, want->a_w, 1e-9);
        ASSERT_EQ(got->unique_topics.size(), want->unique_topics.size());
        for (std::size_t k = 0; k < got->unique_topics.size(); ++k)
          EXPECT_EQ(got->unique_topics[k].id, want->unique_topics[k].id);
      }
    }
  }
}

TEST(Oracle, RefusesLargeInstances) {
  const auto pair = generate_pair({.seed = 1, .dim = 16, .clusters_shared = 5, .docs_per_cluster = 60});
  try {
    brute_force_report(pair.corpus_1, pair.corpus_2, Pool::both);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::instance_too_large);
  }
}

TEST(Oracle, DegenerateInstances) {
  const auto diag = generate_pair({.seed = 3, .dim = 4, .clusters_shared = 3, .docs_per_cluster = 10,
                                   .cluster_spread = 0.5, .centroid_separation = 20});
  const auto o = brute_force_report(diag.corpus_1, diag.corpus_2, Pool::both);
  EXPECT_EQ(o.forward.measures.c, 1.0);
  EXPECT_EQ(o.forward.measures.u, 0.0);
  EXPECT_EQ(o.forward.measures.a, 1.0);

  const auto disjoint = generate_pair({.seed = 3, .dim = 6, .clusters_shared = 0, .clusters_unique_1 = 3,
                                       .clusters_unique_2 = 3, .docs_per_cluster = 10, .centroid_separation = 20,
                                       .outlier_fraction = 0.3});
  const auto d = brute_force_report(disjoint.corpus_1, disjoint.corpus_2, Pool::both);
  EXPECT_EQ(d.forward.measures.u, 1.0);
  EXPECT_EQ(d.backward.measures.u, 1.0);
}

}  // namespace
}  // namespace btm
