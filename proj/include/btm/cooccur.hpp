#pragma once

// Topic-pair co-occurrence counts and row-normalised pairing strengths.

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "btm/csv.hpp"
#include "btm/error.hpp"
#include "btm/matcher.hpp"

namespace btm {

/// Which model supplies the native topics.
enum class Direction { one_to_two, two_to_one };

/// Which documents make up D_i.
enum class Pool { both, native_only };

constexpr std::string_view to_string(Direction d) { return d == Direction::one_to_two ? "1to2" : "2to1"; }
constexpr std::string_view to_string(Pool p) { return p == Pool::both ? "both" : "native"; }

inline Pool parse_pool(std::string_view text) {
  if (text == "both") return Pool::both;
  if (text == "native" || text == "native-only") return Pool::native_only;
  throw Error(ErrorKind::invalid_config, "pool must be 'both' or 'native', got '" + std::string(text) + "'");
}

inline constexpr double kRowSimplexTolerance = 1e-9;

namespace detail {

inline std::size_t id_index(const std::vector<TopicId>& ids, TopicId id, std::string_view what) {
  // ids are sorted and contiguous apart from a leading -1
  const TopicId first = ids.empty() ? 0 : ids.front();
  const auto pos = static_cast<std::int64_t>(id) - first;
  if (pos < 0 || pos >= static_cast<std::int64_t>(ids.size()) || ids[static_cast<std::size_t>(pos)] != id)
    throw Error(ErrorKind::unknown_topic_id, std::string(what) + " topic " + std::to_string(id));
  return static_cast<std::size_t>(pos);
}

}  // namespace detail

struct PairCounts {
  Direction direction = Direction::one_to_two;
  Pool pool = Pool::both;
  std::vector<TopicId> native_topics;
  std::vector<TopicId> cross_topics;
  Matrix<std::size_t> counts;  // native index x cross index
  std::vector<std::size_t> native_totals;

  std::size_t native_index(TopicId id) const { return detail::id_index(native_topics, id, "native"); }
  std::size_t cross_index(TopicId id) const { return detail::id_index(cross_topics, id, "cross"); }
  std::size_t at(TopicId native, TopicId cross) const { return counts(native_index(native), cross_index(cross)); }
};

/// Tallies (native topic, cross topic) pairs over the pooled documents.
inline PairCounts count_pairs(const AssignmentTable& table, Direction direction, Pool pool) {
  const bool forward = direction == Direction::one_to_two;
  PairCounts pc;
  pc.direction = direction;
  pc.pool = pool;
  pc.native_topics = forward ? table.model1_topics : table.model2_topics;
  pc.cross_topics = forward ? table.model2_topics : table.model1_topics;
  pc.counts = Matrix<std::size_t>(pc.native_topics.size(), pc.cross_topics.size(), 0);
  pc.native_totals.assign(pc.native_topics.size(), 0);

  const int native_corpus = forward ? 1 : 2;
  for (const auto& row : table.rows) {
    if (pool == Pool::native_only && row.source_corpus != native_corpus) continue;
    const TopicId native = forward ? row.model1_topic : row.model2_topic;
    const TopicId cross = forward ? row.model2_topic : row.model1_topic;
    const std::size_t i = pc.native_index(native);
    ++pc.counts(i, pc.cross_index(cross));
    ++pc.native_totals[i];
  }
  return pc;
}

struct StrengthMatrix {
  Direction direction = Direction::one_to_two;
  Pool pool = Pool::both;
  std::vector<TopicId> native_topics;
  std::vector<TopicId> cross_topics;
  Matrix<std::size_t> counts;
  Matrix<double> strengths;
  std::vector<std::size_t> native_sizes;  // n(D_i)
  std::vector<bool> defined;               // false when n(D_i) == 0
  std::vector<std::string> warnings;

  std::size_t native_index(TopicId id) const { return detail::id_index(native_topics, id, "native"); }
  std::size_t cross_index(TopicId id) const { return detail::id_index(cross_topics, id, "cross"); }

  bool has_native_outlier() const noexcept { return !native_topics.empty() && native_topics.front() == kOutlierTopic; }
  bool has_cross_outlier() const noexcept { return !cross_topics.empty() && cross_topics.front() == kOutlierTopic; }

  double at(TopicId native, TopicId cross) const { return strengths(native_index(native), cross_index(cross)); }

  /// S(t_i, t~_-1); zero when the cross model has no outlier topic.
  double uniqueness(std::size_t native_row) const {
    return has_cross_outlier() ? strengths(native_row, 0) : 0.0;
  }
};

/// Throws invariant_violation unless every defined row sums to 1.
inline void check_row_simplex(const StrengthMatrix& s) {
  for (std::size_t i = 0; i < s.native_topics.size(); ++i) {
    if (!s.defined[i]) continue;
    double sum = 0.0;
    for (double v : s.strengths.row(i)) {
      if (!(v >= 0.0 && v <= 1.0))
        throw Error(ErrorKind::invariant_violation,
                    "pairing strength outside [0,1] in row of native topic " + std::to_string(s.native_topics[i]));
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSimplexTolerance)
      throw Error(ErrorKind::invariant_violation, "strength row of native topic " +
                                                      std::to_string(s.native_topics[i]) + " sums to " +
                                                      csv::format_double(sum));
  }
}

/// S(t_i, t~_j) = n(D_ij) / n(D_i). Rows with n(D_i) = 0 stay undefined.
inline StrengthMatrix pairing_strengths(const PairCounts& pc) {
  StrengthMatrix s;
  s.direction = pc.direction;
  s.pool = pc.pool;
  s.native_topics = pc.native_topics;
  s.cross_topics = pc.cross_topics;
  s.counts = pc.counts;
  s.native_sizes = pc.native_totals;
  s.strengths = Matrix<double>(pc.native_topics.size(), pc.cross_topics.size(), 0.0);
  s.defined.assign(pc.native_topics.size(), false);

  for (std::size_t i = 0; i < pc.native_topics.size(); ++i) {
    std::size_t row_sum = 0;
    for (std::size_t c : pc.counts.row(i)) row_sum += c;
    if (row_sum != pc.native_totals[i])
      throw Error(ErrorKind::invariant_violation,
                  "counts of native topic " + std::to_string(pc.native_topics[i]) + " sum to " +
                      std::to_string(row_sum) + " but n(D_i) = " + std::to_string(pc.native_totals[i]));
    if (pc.native_totals[i] == 0) {
      s.warnings.push_back("direction " + std::string(to_string(pc.direction)) + ": native topic " +
                           std::to_string(pc.native_topics[i]) + " has no documents; row undefined");
      continue;
    }
    s.defined[i] = true;
    const double total = static_cast<double>(pc.native_totals[i]);
    for (std::size_t j = 0; j < pc.cross_topics.size(); ++j)
      s.strengths(i, j) = static_cast<double>(pc.counts(i, j)) / total;
  }
  check_row_simplex(s);
  return s;
}

inline void write_strengths_csv(const StrengthMatrix& s, std::ostream& out) {
  out << "native_topic,cross_topic,count,strength\n";
  for (std::size_t i = 0; i < s.native_topics.size(); ++i) {
    if (!s.defined[i]) continue;
    for (std::size_t j = 0; j < s.cross_topics.size(); ++j)
      out << s.native_topics[i] << ',' << s.cross_topics[j] << ',' << s.counts(i, j) << ','
          << csv::format_double(s.strengths(i, j)) << '\n';
  }
}

/// Argmax over all cross topics (outlier included), smallest id on ties.
inline TopicId top_pairing(const StrengthMatrix& s, std::size_t native_row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < s.cross_topics.size(); ++j)
    if (s.strengths(native_row, j) > s.strengths(native_row, best)) best = j;
  return s.cross_topics[best];
}

enum class OutlierFlag { expected, moderate, anomalous_low, not_applicable };

constexpr std::string_view to_string(OutlierFlag f) {
  switch (f) {
    case OutlierFlag::expected: return "expected";
    case OutlierFlag::moderate: return "moderate";
    case OutlierFlag::anomalous_low: return "anomalous-low";
    case OutlierFlag::not_applicable: return "not-applicable";
  }
  return "not-applicable";
}

inline constexpr double kOutlierExpectedAtLeast = 0.5;
inline constexpr double kOutlierAnomalousBelow = 0.1;

inline OutlierFlag classify_outlier_pairing(double strength) {
  if (strength >= kOutlierExpectedAtLeast) return OutlierFlag::expected;
  if (strength < kOutlierAnomalousBelow) return OutlierFlag::anomalous_low;
  return OutlierFlag::moderate;
}

struct OutlierDiagnostic {
  Direction direction = Direction::one_to_two;
  std::optional<double> outlier_outlier;  // S(t_-1, t~_-1)
  OutlierFlag flag = OutlierFlag::not_applicable;
  std::vector<TopicId> topics_topped_by_outlier;  // non-outlier native topics
};

struct OutlierDiagnostics {
  OutlierDiagnostic forward;   // 1 -> 2
  OutlierDiagnostic backward;  // 2 -> 1
};

inline OutlierDiagnostic outlier_diagnostic(const StrengthMatrix& s) {
  OutlierDiagnostic d;
  d.direction = s.direction;
  if (!s.has_native_outlier() || !s.has_cross_outlier()) return d;
  for (std::size_t i = 1; i < s.native_topics.size(); ++i)
    if (s.defined[i] && top_pairing(s, i) == kOutlierTopic) d.topics_topped_by_outlier.push_back(s.native_topics[i]);
  if (!s.defined[0]) return d;
  d.outlier_outlier = s.strengths(0, 0);
  d.flag = classify_outlier_pairing(*d.outlier_outlier);
  return d;
}

inline OutlierDiagnostics outlier_diagnostics(const StrengthMatrix& forward, const StrengthMatrix& backward) {
  return {outlier_diagnostic(forward), outlier_diagnostic(backward)};
}

}  // namespace btm
