#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "btm/btm.hpp"

namespace btm::testing {

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("btm-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Builds a bundle from explicit coordinates. `topic_rows` holds the
/// non-outlier topic embeddings (ids 0..n-1); `outlier_row`, when non-empty,
/// is the provided outlier embedding. Otherwise an outlier topic is created
/// from the centroid whenever some document is assigned -1.
inline CorpusBundle make_bundle(const std::string& id, const std::vector<std::vector<float>>& docs,
                                const std::vector<TopicId>& assignments,
                                const std::vector<std::vector<float>>& topic_rows,
                                const std::vector<float>& outlier_row = {}) {
  CorpusBundle b;
  b.corpus_id = id;
  b.dim = !topic_rows.empty() ? topic_rows.front().size() : docs.front().size();
  for (std::size_t d = 0; d < docs.size(); ++d) {
    b.doc_ids.push_back(id + "-" + std::to_string(d));
    b.doc_embeddings.append_row(std::span<const float>(docs[d]));
  }
  if (docs.empty()) b.doc_embeddings = Matrix<float>(0, b.dim);
  b.native_assignments = assignments;
  bool any_outlier = !outlier_row.empty();
  for (TopicId t : assignments) any_outlier = any_outlier || t == kOutlierTopic;
  if (any_outlier) b.topics.push_back({kOutlierTopic, "outlier", {"misc"}, 0});
  if (!outlier_row.empty()) b.topic_embeddings.append_row(std::span<const float>(outlier_row));
  for (std::size_t t = 0; t < topic_rows.size(); ++t) {
    b.topics.push_back({static_cast<TopicId>(t), id + "-topic-" + std::to_string(t), {"kw" + std::to_string(t)}, 0});
    b.topic_embeddings.append_row(std::span<const float>(topic_rows[t]));
  }
  finalize_topics(b, !outlier_row.empty());
  validate_bundle(b);
  return b;
}

/// Random bundle pair for property tests: random topic embeddings, document
/// embeddings scattered around random topics, noisy native labels.
inline std::pair<CorpusBundle, CorpusBundle> random_pair(std::mt19937_64& rng, std::size_t max_docs = 100,
                                                         std::size_t max_topics = 8) {
  std::uniform_int_distribution<std::size_t> dim_dist(2, 8);
  const std::size_t dim = dim_dist(rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto one = [&](const std::string& id) {
    std::uniform_int_distribution<std::size_t> topics_dist(1, max_topics);
    std::uniform_int_distribution<std::size_t> docs_dist(2, max_docs);
    const std::size_t n_topics = topics_dist(rng);
    const std::size_t n_docs = docs_dist(rng);
    const bool with_outlier = unit(rng) < 0.7;
    std::vector<std::vector<float>> topic_rows(n_topics, std::vector<float>(dim));
    for (auto& row : topic_rows)
      for (auto& x : row) x = static_cast<float>(gauss(rng));
    std::vector<std::vector<float>> docs(n_docs, std::vector<float>(dim));
    std::vector<TopicId> assignments(n_docs);
    std::uniform_int_distribution<std::size_t> pick(0, n_topics - 1);
    for (std::size_t d = 0; d < n_docs; ++d) {
      const std::size_t generating = pick(rng);
      const auto& center = topic_rows[generating];
      for (std::size_t k = 0; k < dim; ++k) docs[d][k] = static_cast<float>(center[k] + 0.7 * gauss(rng));
      // noisy native labels: mostly the generating topic, sometimes outlier or random
      const double r = unit(rng);
      if (with_outlier && r < 0.15)
        assignments[d] = kOutlierTopic;
      else if (r < 0.85)
        assignments[d] = static_cast<TopicId>(generating);
      else
        assignments[d] = static_cast<TopicId>(pick(rng));
    }
    // make sure the outlier topic, when requested, has a document
    if (with_outlier) {
      assignments[0] = kOutlierTopic;
      if (assignments[1] == kOutlierTopic) assignments[1] = 0;
    }
    return make_bundle(id, docs, assignments, topic_rows);
  };
  auto a = one("rand1");
  auto b = one("rand2");
  return {std::move(a), std::move(b)};
}

/// Strength matrix from an explicit count table; ids ascending, -1 first.
inline StrengthMatrix strengths_from_counts(const std::vector<TopicId>& native_ids, const std::vector<TopicId>& cross_ids,
                                            const std::vector<std::vector<std::size_t>>& rows,
                                            Direction direction = Direction::one_to_two) {
  PairCounts pc;
  pc.direction = direction;
  pc.native_topics = native_ids;
  pc.cross_topics = cross_ids;
  pc.counts = Matrix<std::size_t>(native_ids.size(), cross_ids.size(), 0);
  pc.native_totals.assign(native_ids.size(), 0);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      pc.counts(i, j) = rows[i][j];
      pc.native_totals[i] += rows[i][j];
    }
  return pairing_strengths(pc);
}

/// Bundle whose topic `t` has `sizes[t]` native documents (plus `outliers`
/// documents on -1). Embeddings are arbitrary; useful for labels and sizes.
inline CorpusBundle stub_bundle(const std::string& id, const std::vector<std::size_t>& sizes, std::size_t outliers = 0) {
  std::vector<std::vector<float>> docs, topic_rows;
  std::vector<TopicId> assignments;
  for (std::size_t t = 0; t < sizes.size(); ++t) {
    topic_rows.push_back({1.0f, static_cast<float>(t) + 1.0f});
    for (std::size_t d = 0; d < sizes[t]; ++d) {
      docs.push_back({1.0f, static_cast<float>(t) + 1.0f});
      assignments.push_back(static_cast<TopicId>(t));
    }
  }
  for (std::size_t d = 0; d < outliers; ++d) {
    docs.push_back({-1.0f, 0.5f});
    assignments.push_back(kOutlierTopic);
  }
  return make_bundle(id, docs, assignments, topic_rows);
}

}  // namespace btm::testing
