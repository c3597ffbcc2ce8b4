#pragma once

// Final analysis report: both directions' measures, validation, outlier
// diagnostics and the derived tables, plus the pairing-strength composition
// used for stacked-bar plots.

#include <cstdio>
#include <ctime>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "btm/cooccur.hpp"
#include "btm/csv.hpp"
#include "btm/error.hpp"
#include "btm/measures.hpp"
#include "btm/validate.hpp"
#include "btm/version.hpp"

namespace btm {

using ojson = nlohmann::ordered_json;

inline constexpr std::size_t kDefaultTopK = 25;
inline constexpr double kDefaultMergeBelow = 0.05;

struct ReportMetadata {
  std::string corpus_1;
  std::string corpus_2;
  Pool pool = Pool::both;
  double unique_threshold = kDefaultUniqueThreshold;
  bool cosine_outlier = true;
  std::string tool_version = std::string(kVersion);
  std::optional<std::string> created;  // only set from SOURCE_DATE_EPOCH
};

struct AnalysisReport {
  ReportMetadata metadata;
  MeasureReport forward;   // corpus 1 native
  MeasureReport backward;  // corpus 2 native
  ValidationReport validation_forward;
  ValidationReport validation_backward;
};

/// Timestamp from SOURCE_DATE_EPOCH (reproducible builds convention), or
/// nothing. Wall-clock time would break byte-identical output.
inline std::optional<std::string> reproducible_timestamp() {
  const char* epoch = std::getenv("SOURCE_DATE_EPOCH");
  if (!epoch) return std::nullopt;
  const auto secs = csv::parse_int(epoch);
  if (!secs) return std::nullopt;
  const std::time_t t = static_cast<std::time_t>(*secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

inline AnalysisReport build_report(ReportMetadata metadata, MeasureReport forward, MeasureReport backward,
                                   ValidationReport validation_forward, ValidationReport validation_backward) {
  if (forward.direction != Direction::one_to_two || backward.direction != Direction::two_to_one)
    throw Error(ErrorKind::invariant_violation, "report needs the 1to2 and 2to1 directions");
  if (validation_forward.direction != Direction::one_to_two || validation_backward.direction != Direction::two_to_one)
    throw Error(ErrorKind::invariant_violation, "validation reports are missing a direction");
  for (const auto& pair : {std::pair{&forward, &validation_forward}, std::pair{&backward, &validation_backward}}) {
    std::set<TopicId> known;
    for (const auto& t : pair.first->per_topic) known.insert(t.id);
    for (const auto& d : pair.second->discrepancies)
      if (!known.contains(d.native_topic))
        throw Error(ErrorKind::invariant_violation,
                    "validation refers to native topic " + std::to_string(d.native_topic) + " absent from the measures");
  }
  return {std::move(metadata), std::move(forward), std::move(backward), std::move(validation_forward),
          std::move(validation_backward)};
}

namespace detail {

inline std::string fixed(double v, int decimals) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  std::string s(buf);
  if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

inline ojson measure_to_json(const MeasureReport& m) {
  ojson j;
  j["direction"] = to_string(m.direction);
  j["native_corpus"] = m.native_corpus;
  j["cross_corpus"] = m.cross_corpus;
  j["pool"] = to_string(m.pool);
  j["c"] = m.c;
  j["c_w"] = m.c_w;
  j["theta"] = m.theta;
  j["theta_label"] = to_string(m.theta_label);
  j["u"] = m.u;
  j["u_w"] = m.u_w;
  j["u_skew"] = m.u_skew;
  j["a"] = m.a;
  j["a_w"] = m.a_w;
  j["a_skew"] = m.a_skew;
  j["relationship"] = to_string(m.relationship);
  j["unique_threshold"] = m.unique_threshold;
  j["display"] = {{"c", fixed(m.c, 4)},         {"c_w", fixed(m.c_w, 4)}, {"theta", fixed(m.theta, 4)},
                  {"u", fixed(m.u, 4)},         {"u_w", fixed(m.u_w, 4)}, {"u_skew", fixed(m.u_skew, 4)},
                  {"a", fixed(m.a, 4)},         {"a_w", fixed(m.a_w, 4)}, {"a_skew", fixed(m.a_skew, 4)}};
  auto topics = ojson::array();
  for (const auto& t : m.per_topic) {
    auto pairings = ojson::array();
    for (const auto& p : t.pairings)
      pairings.push_back({{"cross_topic", p.cross_topic}, {"cross_label", p.cross_label}, {"count", p.count},
                          {"strength", p.strength}});
    topics.push_back({{"id", t.id},
                      {"label", t.label},
                      {"native_size", t.native_size},
                      {"pooled_size", t.pooled_size},
                      {"closeness_total", t.closeness_total},
                      {"uniqueness", t.uniqueness},
                      {"alignment_strength", t.alignment_strength},
                      {"aligned_cross_topic", t.aligned_cross_topic ? ojson(*t.aligned_cross_topic) : ojson(nullptr)},
                      {"aligned_cross_label", t.aligned_cross_label},
                      {"pairings", std::move(pairings)}});
  }
  j["per_topic"] = std::move(topics);
  auto unique = ojson::array();
  for (const auto& u : m.unique_topics)
    unique.push_back({{"id", u.id}, {"label", u.label}, {"keywords", u.keywords}, {"uniqueness", u.uniqueness}});
  j["unique_topics"] = std::move(unique);
  const auto& d = m.diagnostic;
  ojson topped = ojson::array();
  for (TopicId t : d.topics_topped_by_outlier) topped.push_back(t);
  j["diagnostics"] = {{"outlier_outlier", d.outlier_outlier ? ojson(*d.outlier_outlier) : ojson(nullptr)},
                      {"flag", to_string(d.flag)},
                      {"topics_topped_by_outlier", std::move(topped)}};
  j["warnings"] = m.warnings;
  return j;
}

template <typename E>
E parse_enum(const std::string& text, std::initializer_list<E> values) {
  for (E v : values)
    if (to_string(v) == text) return v;
  throw Error(ErrorKind::invalid_config, "unrecognised value '" + text + "' in report");
}

inline MeasureReport measure_from_json(const nlohmann::json& j) {
  MeasureReport m;
  m.direction = parse_enum(j.at("direction").get<std::string>(), {Direction::one_to_two, Direction::two_to_one});
  m.native_corpus = j.at("native_corpus").get<std::string>();
  m.cross_corpus = j.at("cross_corpus").get<std::string>();
  m.pool = parse_pool(j.at("pool").get<std::string>());
  m.c = j.at("c").get<double>();
  m.c_w = j.at("c_w").get<double>();
  m.theta = j.at("theta").get<double>();
  m.theta_label = parse_enum(j.at("theta_label").get<std::string>(),
                             {SkewLabel::larger_topic_driven, SkewLabel::size_independent, SkewLabel::smaller_topic_driven});
  m.u = j.at("u").get<double>();
  m.u_w = j.at("u_w").get<double>();
  m.u_skew = j.at("u_skew").get<double>();
  m.a = j.at("a").get<double>();
  m.a_w = j.at("a_w").get<double>();
  m.a_skew = j.at("a_skew").get<double>();
  m.relationship = parse_enum(j.at("relationship").get<std::string>(),
                              {Relationship::overlap_multifaceted, Relationship::overlap_subset,
                               Relationship::independent, Relationship::intermediate});
  m.unique_threshold = j.at("unique_threshold").get<double>();
  for (const auto& t : j.at("per_topic")) {
    TopicMeasures tm;
    tm.id = t.at("id").get<TopicId>();
    tm.label = t.at("label").get<std::string>();
    tm.native_size = t.at("native_size").get<std::size_t>();
    tm.pooled_size = t.at("pooled_size").get<std::size_t>();
    tm.closeness_total = t.at("closeness_total").get<double>();
    tm.uniqueness = t.at("uniqueness").get<double>();
    tm.alignment_strength = t.at("alignment_strength").get<double>();
    if (!t.at("aligned_cross_topic").is_null()) tm.aligned_cross_topic = t.at("aligned_cross_topic").get<TopicId>();
    tm.aligned_cross_label = t.at("aligned_cross_label").get<std::string>();
    for (const auto& p : t.at("pairings"))
      tm.pairings.push_back({p.at("cross_topic").get<TopicId>(), p.at("cross_label").get<std::string>(),
                             p.at("count").get<std::size_t>(), p.at("strength").get<double>()});
    m.per_topic.push_back(std::move(tm));
  }
  for (const auto& u : j.at("unique_topics"))
    m.unique_topics.push_back({u.at("id").get<TopicId>(), u.at("uniqueness").get<double>(),
                               u.at("label").get<std::string>(), u.at("keywords").get<std::vector<std::string>>()});
  const auto& d = j.at("diagnostics");
  m.diagnostic.direction = m.direction;
  if (!d.at("outlier_outlier").is_null()) m.diagnostic.outlier_outlier = d.at("outlier_outlier").get<double>();
  m.diagnostic.flag = parse_enum(d.at("flag").get<std::string>(),
                                 {OutlierFlag::expected, OutlierFlag::moderate, OutlierFlag::anomalous_low,
                                  OutlierFlag::not_applicable});
  m.diagnostic.topics_topped_by_outlier = d.at("topics_topped_by_outlier").get<std::vector<TopicId>>();
  m.warnings = j.at("warnings").get<std::vector<std::string>>();
  return m;
}

inline ValidationReport validation_from_json(const nlohmann::json& j) {
  ValidationReport v;
  v.direction = parse_enum(j.at("direction").get<std::string>(), {Direction::one_to_two, Direction::two_to_one});
  v.cosine_outlier = j.at("cosine_outlier").get<bool>();
  v.kappa = j.at("kappa").get<double>();
  v.n_topics = j.at("n_topics").get<std::size_t>();
  v.n_agreements = j.at("n_agreements").get<std::size_t>();
  for (const auto& d : j.at("discrepancies"))
    v.discrepancies.push_back({d.at("native_topic").get<TopicId>(), d.at("btm_label").get<TopicId>(),
                               d.at("cosine_label").get<TopicId>(), d.at("btm_strength").get<double>(),
                               d.at("cosine_score").get<double>(), d.at("outlier_involved").get<bool>()});
  return v;
}

inline ojson factor_row(const MeasureReport& m, const std::string& corpus) {
  return {{"native_corpus", corpus},
          {"direction", to_string(m.direction)},
          {"c", m.c},
          {"c_w_minus_c", m.theta},
          {"u", m.u},
          {"u_w_minus_u", m.u_skew},
          {"a", m.a},
          {"a_w_minus_a", m.a_skew},
          {"display",
           {{"c", fixed(m.c, 2)},
            {"c_w_minus_c", fixed(m.theta, 2)},
            {"u", fixed(m.u, 2)},
            {"u_w_minus_u", fixed(m.u_skew, 2)},
            {"a", fixed(m.a, 2)},
            {"a_w_minus_a", fixed(m.a_skew, 2)}}}};
}

inline ojson top_pair_table(const MeasureReport& m) {
  auto rows = ojson::array();
  for (const auto& t : m.per_topic)
    rows.push_back({{"native_topic", t.id},
                    {"native_label", t.label},
                    {"native_size", t.native_size},
                    {"cross_topic", t.aligned_cross_topic ? ojson(*t.aligned_cross_topic) : ojson(nullptr)},
                    {"cross_label", t.aligned_cross_label},
                    {"alignment_strength", t.alignment_strength},
                    {"alignment_strength_display", fixed(t.alignment_strength, 2)}});
  return {{"direction", to_string(m.direction)}, {"rows", std::move(rows)}};
}

inline ojson unique_table(const MeasureReport& m) {
  auto rows = ojson::array();
  for (const auto& u : m.unique_topics)
    rows.push_back({{"native_topic", u.id}, {"label", u.label}, {"keywords", u.keywords},
                    {"uniqueness", u.uniqueness}, {"uniqueness_display", fixed(u.uniqueness, 2)}});
  return {{"direction", to_string(m.direction)}, {"rows", std::move(rows)}};
}

}  // namespace detail

inline ojson to_json(const AnalysisReport& r) {
  ojson j;
  j["metadata"] = {{"tool", "btm"},
                   {"tool_version", r.metadata.tool_version},
                   {"corpus_1", r.metadata.corpus_1},
                   {"corpus_2", r.metadata.corpus_2},
                   {"pool", to_string(r.metadata.pool)},
                   {"unique_threshold", r.metadata.unique_threshold},
                   {"cosine_outlier", r.metadata.cosine_outlier},
                   {"created", r.metadata.created ? ojson(*r.metadata.created) : ojson(nullptr)}};
  j["directions"] = ojson::array({detail::measure_to_json(r.forward), detail::measure_to_json(r.backward)});
  j["validation"] = ojson::array({to_json(r.validation_forward), to_json(r.validation_backward)});
  j["tables"] = {
      {"top_pairs", ojson::array({detail::top_pair_table(r.forward), detail::top_pair_table(r.backward)})},
      {"unique_topics", ojson::array({detail::unique_table(r.forward), detail::unique_table(r.backward)})},
      {"factors", ojson::array({detail::factor_row(r.forward, r.metadata.corpus_1),
                                detail::factor_row(r.backward, r.metadata.corpus_2)})}};
  return j;
}

/// Structural check of a report document. Returns the list of problems;
/// empty means valid.
inline std::vector<std::string> validate_report_json(const nlohmann::json& j) {
  std::vector<std::string> problems;
  const auto need = [&](const nlohmann::json& obj, const std::string& path, const char* key,
                        nlohmann::json::value_t type) -> const nlohmann::json* {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(path + "." + key + " missing");
      return nullptr;
    }
    const auto& v = obj.at(key);
    const bool numeric_ok = type == nlohmann::json::value_t::number_float && v.is_number();
    const bool unsigned_ok = type == nlohmann::json::value_t::number_integer && v.is_number_integer();
    if (v.type() != type && !numeric_ok && !unsigned_ok) {
      problems.push_back(path + "." + key + " has type " + v.type_name());
      return nullptr;
    }
    return &v;
  };
  using vt = nlohmann::json::value_t;
  if (!j.is_object()) return {"report is not an object"};

  if (const auto* meta = need(j, "$", "metadata", vt::object)) {
    need(*meta, "$.metadata", "tool_version", vt::string);
    need(*meta, "$.metadata", "corpus_1", vt::string);
    need(*meta, "$.metadata", "corpus_2", vt::string);
    need(*meta, "$.metadata", "pool", vt::string);
    need(*meta, "$.metadata", "unique_threshold", vt::number_float);
    need(*meta, "$.metadata", "cosine_outlier", vt::boolean);
    if (!meta->contains("created")) problems.push_back("$.metadata.created missing");
  }
  if (const auto* dirs = need(j, "$", "directions", vt::array)) {
    if (dirs->size() != 2) problems.push_back("$.directions must hold exactly two entries");
    std::set<std::string> seen;
    for (std::size_t k = 0; k < dirs->size(); ++k) {
      const auto& d = (*dirs)[k];
      const std::string path = "$.directions[" + std::to_string(k) + "]";
      if (const auto* dir = need(d, path, "direction", vt::string)) seen.insert(dir->get<std::string>());
      for (const char* key : {"c", "c_w", "theta", "u", "u_w", "u_skew", "a", "a_w", "a_skew", "unique_threshold"})
        if (const auto* v = need(d, path, key, vt::number_float)) {
          const double x = v->get<double>();
          if (x < -1.0 - 1e-12 || x > 1.0 + 1e-12) problems.push_back(path + "." + key + " outside [-1,1]");
        }
      for (const char* key : {"relationship", "pool", "theta_label", "native_corpus", "cross_corpus"})
        need(d, path, key, vt::string);
      need(d, path, "display", vt::object);
      need(d, path, "diagnostics", vt::object);
      need(d, path, "warnings", vt::array);
      need(d, path, "unique_topics", vt::array);
      if (const auto* topics = need(d, path, "per_topic", vt::array))
        for (std::size_t t = 0; t < topics->size(); ++t) {
          const std::string tp = path + ".per_topic[" + std::to_string(t) + "]";
          need((*topics)[t], tp, "id", vt::number_integer);
          need((*topics)[t], tp, "label", vt::string);
          need((*topics)[t], tp, "pairings", vt::array);
          need((*topics)[t], tp, "alignment_strength", vt::number_float);
          need((*topics)[t], tp, "uniqueness", vt::number_float);
        }
    }
    if (seen != std::set<std::string>{"1to2", "2to1"}) problems.push_back("$.directions must cover 1to2 and 2to1");
  }
  if (const auto* val = need(j, "$", "validation", vt::array)) {
    if (val->size() != 2) problems.push_back("$.validation must hold exactly two entries");
    for (std::size_t k = 0; k < val->size(); ++k) {
      const std::string path = "$.validation[" + std::to_string(k) + "]";
      need((*val)[k], path, "direction", vt::string);
      need((*val)[k], path, "kappa", vt::number_float);
      need((*val)[k], path, "n_topics", vt::number_integer);
      need((*val)[k], path, "n_agreements", vt::number_integer);
      need((*val)[k], path, "discrepancies", vt::array);
    }
  }
  if (const auto* tables = need(j, "$", "tables", vt::object)) {
    need(*tables, "$.tables", "top_pairs", vt::array);
    need(*tables, "$.tables", "unique_topics", vt::array);
    need(*tables, "$.tables", "factors", vt::array);
  }
  return problems;
}

inline AnalysisReport report_from_json(const nlohmann::json& j) {
  if (const auto problems = validate_report_json(j); !problems.empty())
    throw Error(ErrorKind::invalid_config, "report.json: " + problems.front());
  try {
    AnalysisReport r;
    const auto& meta = j.at("metadata");
    r.metadata.tool_version = meta.at("tool_version").get<std::string>();
    r.metadata.corpus_1 = meta.at("corpus_1").get<std::string>();
    r.metadata.corpus_2 = meta.at("corpus_2").get<std::string>();
    r.metadata.pool = parse_pool(meta.at("pool").get<std::string>());
    r.metadata.unique_threshold = meta.at("unique_threshold").get<double>();
    r.metadata.cosine_outlier = meta.at("cosine_outlier").get<bool>();
    if (!meta.at("created").is_null()) r.metadata.created = meta.at("created").get<std::string>();
    for (const auto& d : j.at("directions")) {
      auto m = detail::measure_from_json(d);
      (m.direction == Direction::one_to_two ? r.forward : r.backward) = std::move(m);
    }
    for (const auto& v : j.at("validation")) {
      auto vr = detail::validation_from_json(v);
      (vr.direction == Direction::one_to_two ? r.validation_forward : r.validation_backward) = std::move(vr);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_config, std::string("report.json: ") + e.what());
  }
}

struct PlotSegment {
  Direction direction = Direction::one_to_two;
  TopicId native_topic = 0;
  std::string native_label;
  std::size_t rank = 0;  // 1-based within the topic
  std::optional<TopicId> cross_topic;  // empty for the merged remainder
  std::string cross_label;
  double strength = 0.0;
  bool is_outlier = false;
  bool is_remaining = false;
};

/// Pairing-strength composition of the `top_k` largest native topics per
/// direction. Non-outlier pairs below `merge_below` collapse into one
/// "remaining" segment; the outlier pair is always its own flagged segment.
inline std::vector<PlotSegment> plot_data(const AnalysisReport& report, std::size_t top_k = kDefaultTopK,
                                          double merge_below = kDefaultMergeBelow) {
  if (top_k == 0) throw Error(ErrorKind::invalid_config, "top_k must be positive");
  if (!(merge_below >= 0.0 && merge_below <= 1.0)) throw Error(ErrorKind::invalid_config, "merge_below must lie in [0,1]");
  std::vector<PlotSegment> out;
  for (const MeasureReport* m : {&report.forward, &report.backward}) {
    const std::size_t n = std::min(top_k, m->per_topic.size());
    for (std::size_t k = 0; k < n; ++k) {
      const auto& t = m->per_topic[k];
      std::size_t rank = 0;
      double remaining = 0.0;
      bool any_remaining = false;
      const CrossPairing* outlier = nullptr;
      for (const auto& p : t.pairings) {
        if (p.cross_topic == kOutlierTopic) {
          outlier = &p;
        } else if (p.strength < merge_below) {
          remaining += p.strength;
          any_remaining = true;
        } else {
          out.push_back({m->direction, t.id, t.label, ++rank, p.cross_topic, p.cross_label, p.strength, false, false});
        }
      }
      if (any_remaining)
        out.push_back({m->direction, t.id, t.label, ++rank, std::nullopt, "remaining", remaining, false, true});
      if (outlier)
        out.push_back({m->direction, t.id, t.label, ++rank, kOutlierTopic, outlier->cross_label, outlier->strength,
                       true, false});
    }
  }
  return out;
}

inline void write_plot_csv(const std::vector<PlotSegment>& segments, std::ostream& out) {
  out << "direction,native_topic,native_label,rank,cross_topic,cross_label,strength,is_outlier,is_remaining\n";
  for (const auto& s : segments)
    out << to_string(s.direction) << ',' << s.native_topic << ',' << csv::escape(s.native_label) << ',' << s.rank << ','
        << (s.cross_topic ? std::to_string(*s.cross_topic) : std::string()) << ',' << csv::escape(s.cross_label) << ','
        << csv::format_double(s.strength) << ',' << (s.is_outlier ? 1 : 0) << ',' << (s.is_remaining ? 1 : 0) << '\n';
}

}  // namespace btm
