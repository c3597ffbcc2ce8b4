#pragma once

// Synthetic corpus pairs with planted thematic structure.
//
// Cluster k sits at separation * e_k. Shared clusters feed both corpora,
// unique clusters feed one. Outlier documents come from a broad Gaussian
// around separation * (sum of cluster axes) / sqrt(K), so the outlier
// centroid has a positive projection on every cluster axis while clusters
// stay mutually orthogonal.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "btm/error.hpp"
#include "btm/interchange.hpp"

namespace btm {

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t dim = 16;
  std::size_t clusters_shared = 5;
  std::size_t clusters_unique_1 = 0;
  std::size_t clusters_unique_2 = 0;
  std::size_t docs_per_cluster = 40;
  double cluster_spread = 1.0;
  double centroid_separation = 10.0;
  double outlier_fraction = 0.0;
};

inline constexpr double kBackgroundSpreadFactor = 2.0;

inline void validate_config(const SynthConfig& c) {
  const auto fail = [](const std::string& what) { throw Error(ErrorKind::invalid_config, what); };
  if (c.clusters_shared + c.clusters_unique_1 == 0) fail("corpus 1 needs at least one cluster");
  if (c.clusters_shared + c.clusters_unique_2 == 0) fail("corpus 2 needs at least one cluster");
  const std::size_t k = c.clusters_shared + c.clusters_unique_1 + c.clusters_unique_2;
  if (c.dim < k) fail("dim " + std::to_string(c.dim) + " cannot hold " + std::to_string(k) + " orthogonal clusters");
  if (c.docs_per_cluster == 0) fail("docs_per_cluster must be positive");
  if (!(c.cluster_spread > 0.0)) fail("cluster_spread must be positive");
  if (!(c.centroid_separation > 0.0)) fail("centroid_separation must be positive");
  if (c.centroid_separation / c.cluster_spread < 1.0) fail("centroid_separation / cluster_spread must be >= 1");
  if (!(c.outlier_fraction >= 0.0 && c.outlier_fraction < 1.0)) fail("outlier_fraction must lie in [0,1)");
}

inline SynthConfig synth_config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known = {"seed",          "dim",
                                                 "clusters_shared", "clusters_unique_1",
                                                 "clusters_unique_2", "docs_per_cluster",
                                                 "cluster_spread", "centroid_separation",
                                                 "outlier_fraction"};
  if (!j.is_object()) throw Error(ErrorKind::invalid_config, "synth config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw Error(ErrorKind::invalid_config, "unknown synth config key '" + key + "'");
  SynthConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.dim = j.value("dim", c.dim);
    c.clusters_shared = j.value("clusters_shared", c.clusters_shared);
    c.clusters_unique_1 = j.value("clusters_unique_1", c.clusters_unique_1);
    c.clusters_unique_2 = j.value("clusters_unique_2", c.clusters_unique_2);
    c.docs_per_cluster = j.value("docs_per_cluster", c.docs_per_cluster);
    c.cluster_spread = j.value("cluster_spread", c.cluster_spread);
    c.centroid_separation = j.value("centroid_separation", c.centroid_separation);
    c.outlier_fraction = j.value("outlier_fraction", c.outlier_fraction);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_config, e.what());
  }
  validate_config(c);
  return c;
}

inline nlohmann::ordered_json to_json(const SynthConfig& c) {
  return {{"seed", c.seed},
          {"dim", c.dim},
          {"clusters_shared", c.clusters_shared},
          {"clusters_unique_1", c.clusters_unique_1},
          {"clusters_unique_2", c.clusters_unique_2},
          {"docs_per_cluster", c.docs_per_cluster},
          {"cluster_spread", c.cluster_spread},
          {"centroid_separation", c.centroid_separation},
          {"outlier_fraction", c.outlier_fraction}};
}

struct TopicCorrespondence {
  std::size_t cluster = 0;
  TopicId topic_1 = 0;
  TopicId topic_2 = 0;
};

struct GroundTruth {
  std::vector<TopicCorrespondence> shared;
  std::vector<TopicId> unique_1;
  std::vector<TopicId> unique_2;
  std::size_t outliers_1 = 0;
  std::size_t outliers_2 = 0;
};

inline nlohmann::ordered_json to_json(const GroundTruth& g) {
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& p : g.shared) pairs.push_back({{"cluster", p.cluster}, {"topic_1", p.topic_1}, {"topic_2", p.topic_2}});
  return {{"shared_pairs", pairs},
          {"unique_1", g.unique_1},
          {"unique_2", g.unique_2},
          {"outlier_docs_1", g.outliers_1},
          {"outlier_docs_2", g.outliers_2}};
}

struct SynthPair {
  CorpusBundle corpus_1;
  CorpusBundle corpus_2;
  GroundTruth truth;
};

namespace detail {

struct PlannedCluster {
  std::size_t axis = 0;
  std::string label;
  std::vector<std::string> keywords;
};

inline CorpusBundle synth_corpus(const SynthConfig& c, const std::string& corpus_id,
                                 const std::vector<PlannedCluster>& clusters, std::size_t n_outliers,
                                 std::mt19937_64& rng) {
  const std::size_t n_axes = c.clusters_shared + c.clusters_unique_1 + c.clusters_unique_2;
  std::normal_distribution<double> noise(0.0, 1.0);

  CorpusBundle b;
  b.corpus_id = corpus_id;
  b.dim = c.dim;
  if (n_outliers > 0) b.topics.push_back({kOutlierTopic, "outlier", {"outlier"}, 0});
  std::vector<float> topic_rows;
  for (std::size_t t = 0; t < clusters.size(); ++t) {
    b.topics.push_back({static_cast<TopicId>(t), clusters[t].label, clusters[t].keywords, 0});
    std::vector<float> centroid(c.dim, 0.0f);
    centroid[clusters[t].axis] = static_cast<float>(c.centroid_separation);
    topic_rows.insert(topic_rows.end(), centroid.begin(), centroid.end());
  }
  b.topic_embeddings = Matrix<float>(clusters.size(), c.dim, std::move(topic_rows));

  struct Doc {
    std::vector<float> embedding;
    TopicId topic;
  };
  std::vector<Doc> docs;
  const auto draw = [&](TopicId topic, const std::vector<double>& mean, double spread) {
    Doc d{std::vector<float>(c.dim), topic};
    bool nonzero = false;
    while (!nonzero) {
      for (std::size_t k = 0; k < c.dim; ++k) {
        d.embedding[k] = static_cast<float>(mean[k] + spread * noise(rng));
        nonzero = nonzero || d.embedding[k] != 0.0f;
      }
    }
    docs.push_back(std::move(d));
  };
  for (std::size_t t = 0; t < clusters.size(); ++t) {
    std::vector<double> mean(c.dim, 0.0);
    mean[clusters[t].axis] = c.centroid_separation;
    for (std::size_t n = 0; n < c.docs_per_cluster; ++n) draw(static_cast<TopicId>(t), mean, c.cluster_spread);
  }
  std::vector<double> background(c.dim, 0.0);
  for (std::size_t k = 0; k < n_axes; ++k) background[k] = c.centroid_separation / std::sqrt(static_cast<double>(n_axes));
  for (std::size_t n = 0; n < n_outliers; ++n)
    draw(kOutlierTopic, background, kBackgroundSpreadFactor * c.cluster_spread);

  std::shuffle(docs.begin(), docs.end(), rng);
  std::vector<float> doc_rows;
  doc_rows.reserve(docs.size() * c.dim);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    b.doc_ids.push_back(corpus_id + "-d" + std::to_string(d));
    b.native_assignments.push_back(docs[d].topic);
    doc_rows.insert(doc_rows.end(), docs[d].embedding.begin(), docs[d].embedding.end());
  }
  b.doc_embeddings = Matrix<float>(docs.size(), c.dim, std::move(doc_rows));
  finalize_topics(b, false);
  validate_bundle(b);
  return b;
}

}  // namespace detail

/// Deterministic in `config.seed`. Topic ids of corpus 2 are a seeded
/// permutation of its clusters so matching ids never line up by accident.
inline SynthPair generate_pair(const SynthConfig& config) {
  validate_config(config);
  std::mt19937_64 rng(config.seed);

  std::vector<detail::PlannedCluster> c1, c2;
  std::vector<std::size_t> c2_cluster_of;  // global cluster index per corpus-2 slot
  for (std::size_t k = 0; k < config.clusters_shared; ++k) {
    c1.push_back({k, "shared-" + std::to_string(k), {"shared", std::to_string(k)}});
    c2_cluster_of.push_back(k);
  }
  for (std::size_t k = 0; k < config.clusters_unique_1; ++k) {
    const std::size_t axis = config.clusters_shared + k;
    c1.push_back({axis, "only1-" + std::to_string(k), {"only1", std::to_string(k)}});
  }
  for (std::size_t k = 0; k < config.clusters_unique_2; ++k)
    c2_cluster_of.push_back(config.clusters_shared + config.clusters_unique_1 + k);
  std::shuffle(c2_cluster_of.begin(), c2_cluster_of.end(), rng);
  for (std::size_t axis : c2_cluster_of) {
    if (axis < config.clusters_shared)
      c2.push_back({axis, "shared-" + std::to_string(axis), {"shared", std::to_string(axis)}});
    else {
      const std::size_t k = axis - config.clusters_shared - config.clusters_unique_1;
      c2.push_back({axis, "only2-" + std::to_string(k), {"only2", std::to_string(k)}});
    }
  }

  const auto outliers_for = [&](std::size_t clusters) {
    const double cluster_docs = static_cast<double>(clusters * config.docs_per_cluster);
    return static_cast<std::size_t>(std::llround(config.outlier_fraction / (1.0 - config.outlier_fraction) * cluster_docs));
  };

  SynthPair pair;
  pair.truth.outliers_1 = outliers_for(c1.size());
  pair.truth.outliers_2 = outliers_for(c2.size());
  pair.corpus_1 = detail::synth_corpus(config, "synth1", c1, pair.truth.outliers_1, rng);
  pair.corpus_2 = detail::synth_corpus(config, "synth2", c2, pair.truth.outliers_2, rng);

  for (std::size_t t2 = 0; t2 < c2.size(); ++t2) {
    if (c2[t2].axis < config.clusters_shared)
      pair.truth.shared.push_back({c2[t2].axis, static_cast<TopicId>(c2[t2].axis), static_cast<TopicId>(t2)});
    else
      pair.truth.unique_2.push_back(static_cast<TopicId>(t2));
  }
  std::sort(pair.truth.shared.begin(), pair.truth.shared.end(),
            [](const auto& a, const auto& b) { return a.cluster < b.cluster; });
  std::sort(pair.truth.unique_2.begin(), pair.truth.unique_2.end());
  for (std::size_t k = 0; k < config.clusters_unique_1; ++k)
    pair.truth.unique_1.push_back(static_cast<TopicId>(config.clusters_shared + k));
  return pair;
}

inline void write_synth(const SynthPair& pair, const std::filesystem::path& dir) {
  write_bundle(pair.corpus_1, dir / "corpus1");
  write_bundle(pair.corpus_2, dir / "corpus2");
  std::ofstream out(dir / "ground_truth.json", std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + (dir / "ground_truth.json").string());
  out << to_json(pair.truth).dump(2) << '\n';
}

}  // namespace btm
