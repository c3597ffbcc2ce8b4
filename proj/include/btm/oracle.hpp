#pragma once

// Brute-force reference for the whole pipeline. Written with plain nested
// loops and its own cosine so that it shares no code path with the matcher,
// co-occurrence or measures implementations it is used to check.

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "btm/cooccur.hpp"
#include "btm/error.hpp"
#include "btm/interchange.hpp"
#include "btm/measures.hpp"

namespace btm {

inline constexpr std::size_t kOracleMaxDocs = 500;
inline constexpr std::size_t kOracleMaxTopics = 16;

struct BruteForceDirection {
  MeasureReport measures;  // scalar factors, unique topic ids, per-topic SA/uniqueness
  std::map<std::pair<TopicId, TopicId>, std::size_t> counts;  // only non-zero cells
  std::map<TopicId, std::size_t> totals;
};

struct BruteForceReport {
  BruteForceDirection forward;
  BruteForceDirection backward;
  std::vector<TopicId> t21;  // cross topic per corpus-1 doc
  std::vector<TopicId> t12;  // cross topic per corpus-2 doc
};

namespace detail {

inline double naive_cosine(const CorpusBundle& a, std::size_t doc, const CorpusBundle& b, std::size_t topic_row) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.dim; ++k) {
    const double x = a.doc_embeddings(doc, k);
    const double y = b.topic_embeddings(topic_row, k);
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline TopicId naive_argmax_topic(const CorpusBundle& docs, std::size_t doc, const CorpusBundle& model) {
  TopicId best = 0;
  double best_sim = -10.0;
  for (TopicId t = -1; t < static_cast<TopicId>(model.n_topics()); ++t) {
    if (!model.contains_topic(t)) continue;
    double sim = naive_cosine(docs, doc, model, model.topic_index(t));
    if (sim > 1.0) sim = 1.0;
    if (sim < -1.0) sim = -1.0;
    if (sim > best_sim) {
      best_sim = sim;
      best = t;
    }
  }
  return best;
}

struct DocPair {
  int corpus;
  TopicId by_model1;
  TopicId by_model2;
};

inline BruteForceDirection naive_direction(const std::vector<DocPair>& docs, const CorpusBundle& native,
                                           const CorpusBundle& cross, bool forward, Pool pool, double threshold) {
  BruteForceDirection out;
  MeasureReport& m = out.measures;
  m.direction = forward ? Direction::one_to_two : Direction::two_to_one;
  m.pool = pool;
  const int native_corpus = forward ? 1 : 2;
  const auto in_pool = [&](const DocPair& d) { return pool == Pool::both || d.corpus == native_corpus; };
  const auto native_of = [&](const DocPair& d) { return forward ? d.by_model1 : d.by_model2; };
  const auto cross_of = [&](const DocPair& d) { return forward ? d.by_model2 : d.by_model1; };

  const auto native_ids = native.topic_ids();
  const auto cross_ids = cross.topic_ids();
  for (TopicId i : native_ids) {
    std::size_t n_i = 0;
    for (const auto& d : docs)
      if (in_pool(d) && native_of(d) == i) ++n_i;
    if (n_i > 0) out.totals[i] = n_i;
    for (TopicId j : cross_ids) {
      std::size_t n_ij = 0;
      for (const auto& d : docs)
        if (in_pool(d) && native_of(d) == i && cross_of(d) == j) ++n_ij;
      if (n_ij > 0) out.counts[{i, j}] = n_ij;
    }
  }

  double sum_close = 0.0, sum_close_w = 0.0, sum_uniq = 0.0, sum_uniq_w = 0.0, sum_sa = 0.0, sum_sa_w = 0.0;
  double sum_n = 0.0;
  std::size_t topics = 0;
  for (TopicId i : native_ids) {
    if (i == kOutlierTopic || !out.totals.contains(i)) continue;
    const double n_i = static_cast<double>(out.totals[i]);
    const auto strength = [&](TopicId j) {
      const auto it = out.counts.find({i, j});
      return it == out.counts.end() ? 0.0 : static_cast<double>(it->second) / n_i;
    };
    double close = 0.0, sa = 0.0;
    for (TopicId j : cross_ids) {
      if (j == kOutlierTopic) continue;
      close += strength(j);
      sa = std::max(sa, strength(j));
    }
    const double uniq = cross.has_outlier() ? strength(kOutlierTopic) : 0.0;
    ++topics;
    sum_n += n_i;
    sum_close += close;
    sum_close_w += n_i * close;
    sum_uniq += uniq;
    sum_uniq_w += n_i * uniq;
    sum_sa += sa;
    sum_sa_w += n_i * sa;

    TopicMeasures tm;
    tm.id = i;
    tm.pooled_size = out.totals[i];
    tm.closeness_total = close;
    tm.uniqueness = uniq;
    tm.alignment_strength = sa;
    m.per_topic.push_back(tm);
    if (cross.has_outlier() && uniq >= threshold) m.unique_topics.push_back({i, uniq, {}, {}});
  }
  if (topics == 0) throw Error(ErrorKind::no_native_topics, "oracle: no defined native topic");
  const double t = static_cast<double>(topics);
  m.c = sum_close / t;
  m.c_w = sum_close_w / sum_n;
  m.u = sum_uniq / t;
  m.u_w = sum_uniq_w / sum_n;
  m.a = sum_sa / t;
  m.a_w = sum_sa_w / sum_n;
  m.theta = m.c_w - m.c;
  m.u_skew = m.u_w - m.u;
  m.a_skew = m.a_w - m.a;
  // selection sort: uniqueness descending, id ascending
  auto& u = m.unique_topics;
  for (std::size_t x = 0; x < u.size(); ++x)
    for (std::size_t y = x + 1; y < u.size(); ++y)
      if (u[y].uniqueness > u[x].uniqueness || (u[y].uniqueness == u[x].uniqueness && u[y].id < u[x].id))
        std::swap(u[x], u[y]);
  return out;
}

}  // namespace detail

inline BruteForceReport brute_force_report(const CorpusBundle& bundle1, const CorpusBundle& bundle2, Pool pool,
                                           double unique_threshold = kDefaultUniqueThreshold) {
  if (bundle1.n_docs() + bundle2.n_docs() > kOracleMaxDocs)
    throw Error(ErrorKind::instance_too_large, "oracle handles at most " + std::to_string(kOracleMaxDocs) + " documents");
  const auto non_outlier = [](const CorpusBundle& b) { return b.n_topics() - (b.has_outlier() ? 1 : 0); };
  if (non_outlier(bundle1) > kOracleMaxTopics || non_outlier(bundle2) > kOracleMaxTopics)
    throw Error(ErrorKind::instance_too_large, "oracle handles at most " + std::to_string(kOracleMaxTopics) + " topics per model");
  if (bundle1.dim != bundle2.dim) throw Error(ErrorKind::dimension_mismatch, "oracle: bundle dims differ");

  BruteForceReport r;
  std::vector<detail::DocPair> docs;
  for (std::size_t d = 0; d < bundle1.n_docs(); ++d) {
    r.t21.push_back(detail::naive_argmax_topic(bundle1, d, bundle2));
    docs.push_back({1, bundle1.native_assignments[d], r.t21.back()});
  }
  for (std::size_t d = 0; d < bundle2.n_docs(); ++d) {
    r.t12.push_back(detail::naive_argmax_topic(bundle2, d, bundle1));
    docs.push_back({2, r.t12.back(), bundle2.native_assignments[d]});
  }
  r.forward = detail::naive_direction(docs, bundle1, bundle2, true, pool, unique_threshold);
  r.backward = detail::naive_direction(docs, bundle2, bundle1, false, pool, unique_threshold);
  return r;
}

}  // namespace btm
