#pragma once

// Agreement between the co-occurrence matching and a direct cosine matching
// of the two models' topic embeddings, measured with Cohen's kappa.

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "btm/cooccur.hpp"
#include "btm/error.hpp"
#include "btm/interchange.hpp"
#include "btm/linalg.hpp"

namespace btm {

enum class MatchMethod { btm, cosine };

constexpr std::string_view to_string(MatchMethod m) { return m == MatchMethod::btm ? "btm" : "cosine"; }

/// One rater: native topic -> best cross topic.
struct MatchLabeling {
  Direction direction = Direction::one_to_two;
  MatchMethod method = MatchMethod::btm;
  std::map<TopicId, TopicId> labels;
  std::map<TopicId, double> scores;

  std::set<TopicId> domain() const {
    std::set<TopicId> d;
    for (const auto& [k, v] : labels) d.insert(k);
    return d;
  }

  MatchLabeling restricted_to(const std::set<TopicId>& keep) const {
    MatchLabeling out{direction, method, {}, {}};
    for (const auto& [k, v] : labels)
      if (keep.contains(k)) {
        out.labels.emplace(k, v);
        out.scores.emplace(k, scores.at(k));
      }
    return out;
  }
};

/// Argmax of each defined non-outlier row over all cross topics, outlier
/// column included; smallest cross id on ties.
inline MatchLabeling btm_match(const StrengthMatrix& s) {
  MatchLabeling m{s.direction, MatchMethod::btm, {}, {}};
  for (std::size_t i = 0; i < s.native_topics.size(); ++i) {
    if (s.native_topics[i] == kOutlierTopic || !s.defined[i]) continue;
    const TopicId best = top_pairing(s, i);
    m.labels.emplace(s.native_topics[i], best);
    m.scores.emplace(s.native_topics[i], s.strengths(i, s.cross_index(best)));
  }
  return m;
}

/// Argmax of cosine similarity between each non-outlier native topic
/// embedding and the cross topic embeddings. The cross outlier row takes part
/// only when `include_outlier` is set and the row exists.
inline MatchLabeling cosine_match(const std::vector<TopicId>& native_ids, const Matrix<float>& native_embeddings,
                                  const std::vector<TopicId>& cross_ids, const Matrix<float>& cross_embeddings,
                                  bool include_outlier, Direction direction = Direction::one_to_two) {
  if (native_ids.size() != native_embeddings.rows() || cross_ids.size() != cross_embeddings.rows())
    throw Error(ErrorKind::dimension_mismatch, "topic id list and embedding rows differ in length");
  if (native_embeddings.cols() != cross_embeddings.cols())
    throw Error(ErrorKind::dimension_mismatch,
                "topic embedding dims differ: " + std::to_string(native_embeddings.cols()) + " vs " +
                    std::to_string(cross_embeddings.cols()));
  MatchLabeling m{direction, MatchMethod::cosine, {}, {}};
  for (std::size_t i = 0; i < native_ids.size(); ++i) {
    if (native_ids[i] == kOutlierTopic) continue;
    bool found = false;
    TopicId best = 0;
    double best_score = 0.0;
    for (std::size_t j = 0; j < cross_ids.size(); ++j) {
      if (cross_ids[j] == kOutlierTopic && !include_outlier) continue;
      const double score = cosine_similarity(native_embeddings.row(i), cross_embeddings.row(j));
      // cross ids ascend, strict '>' keeps the smallest on ties
      if (!found || score > best_score) {
        found = true;
        best = cross_ids[j];
        best_score = score;
      }
    }
    if (!found) throw Error(ErrorKind::invalid_bundle, "cross model has no eligible topic for cosine matching");
    m.labels.emplace(native_ids[i], best);
    m.scores.emplace(native_ids[i], best_score);
  }
  return m;
}

inline MatchLabeling cosine_match(const CorpusBundle& native, const CorpusBundle& cross, bool include_outlier,
                                  Direction direction = Direction::one_to_two) {
  return cosine_match(native.topic_ids(), native.topic_embeddings, cross.topic_ids(), cross.topic_embeddings,
                      include_outlier, direction);
}

/// kappa = (p_o - p_e) / (1 - p_e) over native topics, unweighted.
inline double cohens_kappa(const MatchLabeling& a, const MatchLabeling& b) {
  if (a.domain() != b.domain())
    throw Error(ErrorKind::domain_mismatch, "raters label different sets of native topics");
  const std::size_t n = a.labels.size();
  if (n == 0) throw Error(ErrorKind::domain_mismatch, "raters label no topics");

  std::map<TopicId, std::size_t> freq_a, freq_b;
  std::size_t agree = 0;
  for (const auto& [topic, label] : a.labels) {
    const TopicId other = b.labels.at(topic);
    if (label == other) ++agree;
    ++freq_a[label];
    ++freq_b[other];
  }
  const double total = static_cast<double>(n);
  const double p_o = static_cast<double>(agree) / total;
  double p_e = 0.0;
  for (const auto& [label, count] : freq_a) {
    const auto it = freq_b.find(label);
    if (it != freq_b.end()) p_e += (static_cast<double>(count) / total) * (static_cast<double>(it->second) / total);
  }
  if (p_e == 1.0) {
    if (p_o == 1.0) return 1.0;
    throw Error(ErrorKind::degenerate_kappa, "chance agreement is 1 but observed agreement is not");
  }
  return (p_o - p_e) / (1.0 - p_e);
}

struct Discrepancy {
  TopicId native_topic = 0;
  TopicId btm_label = 0;
  TopicId cosine_label = 0;
  double btm_strength = 0.0;
  double cosine_score = 0.0;
  bool outlier_involved = false;
};

inline std::vector<Discrepancy> discrepancy_report(const MatchLabeling& btm, const MatchLabeling& cosine,
                                                   const StrengthMatrix& s) {
  std::vector<Discrepancy> out;
  for (const auto& [topic, label] : btm.labels) {
    const auto it = cosine.labels.find(topic);
    if (it == cosine.labels.end() || it->second == label) continue;
    Discrepancy d;
    d.native_topic = topic;
    d.btm_label = label;
    d.cosine_label = it->second;
    d.btm_strength = s.at(topic, label);
    d.cosine_score = cosine.scores.at(topic);
    d.outlier_involved = label == kOutlierTopic || it->second == kOutlierTopic;
    out.push_back(d);
  }
  return out;
}

struct ValidationReport {
  Direction direction = Direction::one_to_two;
  bool cosine_outlier = true;
  double kappa = 0.0;
  std::size_t n_topics = 0;
  std::size_t n_agreements = 0;
  MatchLabeling btm;
  MatchLabeling cosine;
  std::vector<Discrepancy> discrepancies;
};

/// Both raters over the defined non-outlier native topics of one direction.
inline ValidationReport validate_direction(const StrengthMatrix& s, const CorpusBundle& native,
                                           const CorpusBundle& cross, bool cosine_outlier = true) {
  ValidationReport v;
  v.direction = s.direction;
  v.cosine_outlier = cosine_outlier;
  v.btm = btm_match(s);
  v.cosine = cosine_match(native, cross, cosine_outlier, s.direction).restricted_to(v.btm.domain());
  v.kappa = cohens_kappa(v.btm, v.cosine);
  v.n_topics = v.btm.labels.size();
  for (const auto& [topic, label] : v.btm.labels)
    if (v.cosine.labels.at(topic) == label) ++v.n_agreements;
  v.discrepancies = discrepancy_report(v.btm, v.cosine, s);
  return v;
}

inline nlohmann::ordered_json to_json(const ValidationReport& v) {
  nlohmann::ordered_json j;
  j["direction"] = to_string(v.direction);
  j["cosine_outlier"] = v.cosine_outlier;
  j["kappa"] = v.kappa;
  j["n_topics"] = v.n_topics;
  j["n_agreements"] = v.n_agreements;
  auto list = nlohmann::ordered_json::array();
  for (const auto& d : v.discrepancies)
    list.push_back({{"native_topic", d.native_topic},
                    {"btm_label", d.btm_label},
                    {"cosine_label", d.cosine_label},
                    {"btm_strength", d.btm_strength},
                    {"cosine_score", d.cosine_score},
                    {"outlier_involved", d.outlier_involved}});
  j["discrepancies"] = std::move(list);
  return j;
}

}  // namespace btm
