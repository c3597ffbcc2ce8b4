#pragma once

// Corpus- and topic-level measures over a strength matrix: closeness,
// uniqueness, alignment, their size-weighted variants and the U/A
// relationship class.
//
// Every corpus factor averages over the defined, non-outlier native topics.
// The native outlier row and the cross outlier column never enter closeness;
// the cross outlier column is the uniqueness.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "btm/cooccur.hpp"
#include "btm/error.hpp"
#include "btm/interchange.hpp"

namespace btm {

inline constexpr double kDefaultUniqueThreshold = 0.5;
inline constexpr double kSkewCutoff = 0.1;
inline constexpr double kRelationshipCutoff = 0.5;
inline constexpr double kIdentityTolerance = 1e-12;

struct Closeness {
  double c = 0.0;
  double c_w = 0.0;
};

struct Uniqueness {
  double u = 0.0;
  double u_w = 0.0;
};

struct Alignment {
  double a = 0.0;
  double a_w = 0.0;
};

namespace detail {

// Rows that count towards corpus factors.
inline std::vector<std::size_t> factor_rows(const StrengthMatrix& s) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < s.native_topics.size(); ++i)
    if (s.native_topics[i] != kOutlierTopic && s.defined[i]) rows.push_back(i);
  if (rows.empty())
    throw Error(ErrorKind::no_native_topics,
                "direction " + std::string(to_string(s.direction)) + " has no defined non-outlier native topic");
  return rows;
}

inline std::size_t first_non_outlier_column(const StrengthMatrix& s) { return s.has_cross_outlier() ? 1 : 0; }

}  // namespace detail

/// Topic closeness total: the non-outlier mass of one native row.
inline double topic_closeness_total(const StrengthMatrix& s, std::size_t row) {
  double sum = 0.0;
  for (std::size_t j = detail::first_non_outlier_column(s); j < s.cross_topics.size(); ++j) sum += s.strengths(row, j);
  return sum;
}

inline Closeness corpus_closeness(const StrengthMatrix& s) {
  double plain = 0.0, weighted = 0.0, weight = 0.0;
  const auto rows = detail::factor_rows(s);
  for (std::size_t i : rows) {
    const double total = topic_closeness_total(s, i);
    const auto n = static_cast<double>(s.native_sizes[i]);
    plain += total;
    weighted += n * total;
    weight += n;
  }
  return {plain / static_cast<double>(rows.size()), weighted / weight};
}

/// Identically zero when the cross model has no outlier topic.
inline Uniqueness corpus_uniqueness(const StrengthMatrix& s) {
  double plain = 0.0, weighted = 0.0, weight = 0.0;
  const auto rows = detail::factor_rows(s);
  for (std::size_t i : rows) {
    const double u = s.uniqueness(i);
    const auto n = static_cast<double>(s.native_sizes[i]);
    plain += u;
    weighted += n * u;
    weight += n;
  }
  return {plain / static_cast<double>(rows.size()), weighted / weight};
}

enum class SkewLabel { larger_topic_driven, size_independent, smaller_topic_driven };

constexpr std::string_view to_string(SkewLabel l) {
  switch (l) {
    case SkewLabel::larger_topic_driven: return "larger-topic-driven";
    case SkewLabel::size_independent: return "size-independent";
    case SkewLabel::smaller_topic_driven: return "smaller-topic-driven";
  }
  return "size-independent";
}

struct Skew {
  double theta = 0.0;
  SkewLabel label = SkewLabel::size_independent;
};

/// Difference between a weighted and an unweighted factor and its reading.
inline Skew skew_of(double plain, double weighted) {
  const double theta = weighted - plain;
  if (theta >= kSkewCutoff) return {theta, SkewLabel::larger_topic_driven};
  if (theta <= -kSkewCutoff) return {theta, SkewLabel::smaller_topic_driven};
  return {theta, SkewLabel::size_independent};
}

inline Skew closeness_skew(double c, double c_w) { return skew_of(c, c_w); }

struct TopicAlignment {
  TopicId native_topic = 0;
  std::size_t native_size = 0;  // n(D_i)
  double strength = 0.0;        // SA(t_i)
  std::optional<TopicId> cross_topic;  // empty when the cross model has only the outlier topic
};

/// SA(t_i) = max over non-outlier cross topics; smallest cross id on ties.
/// Undefined rows and the native outlier row are skipped.
inline std::vector<TopicAlignment> alignment_strength(const StrengthMatrix& s) {
  std::vector<TopicAlignment> out;
  const std::size_t first = detail::first_non_outlier_column(s);
  for (std::size_t i = 0; i < s.native_topics.size(); ++i) {
    if (s.native_topics[i] == kOutlierTopic || !s.defined[i]) continue;
    TopicAlignment ta{s.native_topics[i], s.native_sizes[i], 0.0, std::nullopt};
    for (std::size_t j = first; j < s.cross_topics.size(); ++j) {
      if (!ta.cross_topic || s.strengths(i, j) > ta.strength) {
        ta.strength = s.strengths(i, j);
        ta.cross_topic = s.cross_topics[j];
      }
    }
    out.push_back(ta);
  }
  return out;
}

inline Alignment corpus_alignment(std::span<const TopicAlignment> topics) {
  if (topics.empty()) throw Error(ErrorKind::no_native_topics, "no topic alignment strengths to average");
  double plain = 0.0, weighted = 0.0, weight = 0.0;
  for (const auto& t : topics) {
    const auto n = static_cast<double>(t.native_size);
    plain += t.strength;
    weighted += n * t.strength;
    weight += n;
  }
  return {plain / static_cast<double>(topics.size()), weight > 0.0 ? weighted / weight : 0.0};
}

struct UniqueTopic {
  TopicId id = 0;
  double uniqueness = 0.0;
  std::string label;
  std::vector<std::string> keywords;
};

/// Non-outlier native topics with S(t_i, t~_-1) >= threshold, by uniqueness
/// descending then id ascending. Empty in no-outlier mode.
inline std::vector<UniqueTopic> unique_topics(const StrengthMatrix& s, double threshold = kDefaultUniqueThreshold) {
  std::vector<UniqueTopic> out;
  if (!s.has_cross_outlier()) return out;
  for (std::size_t i = 0; i < s.native_topics.size(); ++i) {
    if (s.native_topics[i] == kOutlierTopic || !s.defined[i]) continue;
    if (s.uniqueness(i) >= threshold) out.push_back({s.native_topics[i], s.uniqueness(i), {}, {}});
  }
  std::stable_sort(out.begin(), out.end(), [](const UniqueTopic& a, const UniqueTopic& b) {
    return a.uniqueness != b.uniqueness ? a.uniqueness > b.uniqueness : a.id < b.id;
  });
  return out;
}

enum class Relationship { overlap_multifaceted, overlap_subset, independent, intermediate };

constexpr std::string_view to_string(Relationship r) {
  switch (r) {
    case Relationship::overlap_multifaceted: return "overlap-multifaceted";
    case Relationship::overlap_subset: return "overlap-subset";
    case Relationship::independent: return "independent";
    case Relationship::intermediate: return "intermediate";
  }
  return "intermediate";
}

/// U and A cannot both be high: A <= 1 - U. The only point with both at the
/// cutoff is U = A = 0.5, reported as intermediate.
inline Relationship classify_relationship(double u, double a) {
  if (u < -kRowSimplexTolerance || u > 1.0 + kRowSimplexTolerance || a < -kRowSimplexTolerance ||
      a > 1.0 + kRowSimplexTolerance || u + a > 1.0 + kRowSimplexTolerance)
    throw Error(ErrorKind::invariant_violation,
                "U=" + csv::format_double(u) + ", A=" + csv::format_double(a) + " violates 0 <= A <= 1 - U");
  const bool high_u = u >= kRelationshipCutoff;
  const bool high_a = a >= kRelationshipCutoff;
  if (!high_u && !high_a) return Relationship::overlap_multifaceted;
  if (!high_u && high_a) return Relationship::overlap_subset;
  if (high_u && !high_a) return Relationship::independent;
  return Relationship::intermediate;
}

struct CrossPairing {
  TopicId cross_topic = 0;
  std::string cross_label;
  std::size_t count = 0;
  double strength = 0.0;
};

struct TopicMeasures {
  TopicId id = 0;
  std::string label;
  std::size_t native_size = 0;  // documents natively assigned in its own corpus
  std::size_t pooled_size = 0;  // n(D_i)
  double closeness_total = 0.0;
  double uniqueness = 0.0;
  double alignment_strength = 0.0;
  std::optional<TopicId> aligned_cross_topic;
  std::string aligned_cross_label;
  std::vector<CrossPairing> pairings;  // non-zero cells, strength descending
};

struct MeasureReport {
  Direction direction = Direction::one_to_two;
  Pool pool = Pool::both;
  std::string native_corpus;
  std::string cross_corpus;
  double c = 0.0, c_w = 0.0, theta = 0.0;
  SkewLabel theta_label = SkewLabel::size_independent;
  double u = 0.0, u_w = 0.0, u_skew = 0.0;
  double a = 0.0, a_w = 0.0, a_skew = 0.0;
  double unique_threshold = kDefaultUniqueThreshold;
  std::vector<TopicMeasures> per_topic;  // native size descending, then id
  std::vector<UniqueTopic> unique_topics;
  Relationship relationship = Relationship::intermediate;
  OutlierDiagnostic diagnostic;
  std::vector<std::string> warnings;
};

/// Throws invariant_violation if any of the report's algebraic identities
/// fails.
inline void check_measure_invariants(const MeasureReport& r) {
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::invariant_violation, "direction " + std::string(to_string(r.direction)) + ": " + what);
  };
  for (double v : {r.c, r.c_w, r.u, r.u_w, r.a, r.a_w})
    if (!(v >= -kIdentityTolerance && v <= 1.0 + kIdentityTolerance)) fail("factor outside [0,1]");
  if (std::abs(r.c + r.u - 1.0) > kIdentityTolerance) fail("C + U != 1");
  if (std::abs(r.c_w + r.u_w - 1.0) > kIdentityTolerance) fail("C_w + U_w != 1");
  if (r.a > 1.0 - r.u + kIdentityTolerance) fail("A > 1 - U");
  if (r.a_w > 1.0 - r.u_w + kIdentityTolerance) fail("A_w > 1 - U_w");
  for (const auto& t : r.per_topic)
    if (t.alignment_strength > 1.0 - t.uniqueness + kIdentityTolerance)
      fail("SA > 1 - uniqueness for topic " + std::to_string(t.id));
}

/// All measures for one direction. `native` and `cross` supply labels and
/// native sizes only.
inline MeasureReport compute_measures(const StrengthMatrix& s, const CorpusBundle& native, const CorpusBundle& cross,
                                      double unique_threshold = kDefaultUniqueThreshold) {
  if (!(unique_threshold > 0.0 && unique_threshold <= 1.0))
    throw Error(ErrorKind::invalid_config, "unique threshold must lie in (0,1]");
  check_row_simplex(s);

  MeasureReport r;
  r.direction = s.direction;
  r.pool = s.pool;
  r.native_corpus = native.corpus_id;
  r.cross_corpus = cross.corpus_id;
  r.unique_threshold = unique_threshold;
  r.warnings = s.warnings;
  if (!s.has_cross_outlier())
    r.warnings.push_back("direction " + std::string(to_string(s.direction)) + ": cross model '" + cross.corpus_id +
                         "' has no outlier topic; uniqueness is reported as 0");

  const auto closeness = corpus_closeness(s);
  const auto uniqueness = corpus_uniqueness(s);
  const auto per_topic_alignment = alignment_strength(s);
  const auto alignment = corpus_alignment(per_topic_alignment);
  r.c = closeness.c;
  r.c_w = closeness.c_w;
  const auto theta = closeness_skew(r.c, r.c_w);
  r.theta = theta.theta;
  r.theta_label = theta.label;
  r.u = uniqueness.u;
  r.u_w = uniqueness.u_w;
  r.u_skew = r.u_w - r.u;
  r.a = alignment.a;
  r.a_w = alignment.a_w;
  r.a_skew = r.a_w - r.a;

  std::size_t k = 0;
  for (std::size_t i = 0; i < s.native_topics.size(); ++i) {
    if (s.native_topics[i] == kOutlierTopic || !s.defined[i]) continue;
    const TopicAlignment& ta = per_topic_alignment[k++];
    TopicMeasures t;
    t.id = s.native_topics[i];
    t.label = native.topic(t.id).label;
    t.native_size = native.topic(t.id).native_size;
    t.pooled_size = s.native_sizes[i];
    t.closeness_total = topic_closeness_total(s, i);
    t.uniqueness = s.uniqueness(i);
    t.alignment_strength = ta.strength;
    t.aligned_cross_topic = ta.cross_topic;
    if (ta.cross_topic) t.aligned_cross_label = cross.topic(*ta.cross_topic).label;
    for (std::size_t j = 0; j < s.cross_topics.size(); ++j) {
      if (s.counts(i, j) == 0) continue;
      t.pairings.push_back({s.cross_topics[j], cross.topic(s.cross_topics[j]).label, s.counts(i, j), s.strengths(i, j)});
    }
    std::stable_sort(t.pairings.begin(), t.pairings.end(), [](const CrossPairing& a, const CrossPairing& b) {
      return a.strength != b.strength ? a.strength > b.strength : a.cross_topic < b.cross_topic;
    });
    r.per_topic.push_back(std::move(t));
  }
  std::stable_sort(r.per_topic.begin(), r.per_topic.end(), [](const TopicMeasures& a, const TopicMeasures& b) {
    return a.native_size != b.native_size ? a.native_size > b.native_size : a.id < b.id;
  });

  r.unique_topics = unique_topics(s, unique_threshold);
  for (auto& u : r.unique_topics) {
    u.label = native.topic(u.id).label;
    u.keywords = native.topic(u.id).keywords;
  }
  r.relationship = classify_relationship(r.u, r.a);
  r.diagnostic = outlier_diagnostic(s);
  check_measure_invariants(r);
  return r;
}

}  // namespace btm
