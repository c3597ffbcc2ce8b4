#pragma once

// On-disk corpus bundle: manifest.json + two float32 little-endian payloads +
// assignments.csv. A bundle is everything the matching engine needs from one
// fitted topic model and the corpus it was fitted on.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "btm/csv.hpp"
#include "btm/error.hpp"
#include "btm/linalg.hpp"

namespace btm {

using TopicId = std::int32_t;
inline constexpr TopicId kOutlierTopic = -1;
inline constexpr int kBundleSchemaVersion = 1;

struct TopicMeta {
  TopicId id = 0;
  std::string label;
  std::vector<std::string> keywords;
  std::size_t native_size = 0;

  friend bool operator==(const TopicMeta&, const TopicMeta&) = default;
};

/// Where the outlier topic's embedding row came from.
enum class OutlierEmbedding {
  provided,  // exported alongside the other topic rows
  centroid,  // filled from the mean of natively-outlier documents
  absent,    // no outlier topic; the bundle runs in no-outlier mode
};

struct CorpusBundle {
  std::string corpus_id;
  std::size_t dim = 0;
  std::vector<std::string> doc_ids;
  Matrix<float> doc_embeddings;
  std::vector<TopicMeta> topics;  // ascending id, -1 first when present
  Matrix<float> topic_embeddings;  // row order matches `topics`
  std::vector<TopicId> native_assignments;  // indexed like doc_ids
  OutlierEmbedding outlier = OutlierEmbedding::absent;

  std::size_t n_docs() const noexcept { return doc_ids.size(); }
  std::size_t n_topics() const noexcept { return topics.size(); }
  bool has_outlier() const noexcept { return !topics.empty() && topics.front().id == kOutlierTopic; }

  std::vector<TopicId> topic_ids() const {
    std::vector<TopicId> ids;
    ids.reserve(topics.size());
    for (const auto& t : topics) ids.push_back(t.id);
    return ids;
  }

  bool contains_topic(TopicId id) const noexcept {
    if (id == kOutlierTopic) return has_outlier();
    return id >= 0 && static_cast<std::size_t>(id) < topics.size() - (has_outlier() ? 1 : 0);
  }

  /// Row index of a topic in `topics` / `topic_embeddings`.
  std::size_t topic_index(TopicId id) const {
    if (!contains_topic(id)) throw Error(ErrorKind::unknown_topic_id, std::to_string(id));
    return static_cast<std::size_t>(id + (has_outlier() ? 1 : 0));
  }

  const TopicMeta& topic(TopicId id) const { return topics[topic_index(id)]; }

  friend bool operator==(const CorpusBundle&, const CorpusBundle&) = default;
};

/// Mean of the embeddings of all natively-outlier documents.
inline std::vector<double> outlier_centroid(const CorpusBundle& b) {
  std::vector<double> mean(b.dim, 0.0);
  std::size_t n = 0;
  for (std::size_t r = 0; r < b.native_assignments.size(); ++r) {
    if (b.native_assignments[r] != kOutlierTopic) continue;
    const auto row = b.doc_embeddings.row(r);
    for (std::size_t k = 0; k < b.dim; ++k) mean[k] += static_cast<double>(row[k]);
    ++n;
  }
  if (n == 0)
    throw Error(ErrorKind::outlier_unavailable,
                "bundle '" + b.corpus_id + "' has no natively-outlier documents");
  for (double& x : mean) x /= static_cast<double>(n);
  return mean;
}

/// Throws the first invariant violation found; every message names the
/// offending record.
inline void validate_bundle(const CorpusBundle& b) {
  const std::string where = "bundle '" + b.corpus_id + "': ";
  if (b.dim == 0) throw Error(ErrorKind::invalid_bundle, where + "dim must be positive");

  if (b.doc_embeddings.rows() != b.n_docs() || (b.n_docs() > 0 && b.doc_embeddings.cols() != b.dim))
    throw Error(ErrorKind::dimension_mismatch,
                where + "doc embeddings are " + std::to_string(b.doc_embeddings.rows()) + "x" +
                    std::to_string(b.doc_embeddings.cols()) + ", expected " +
                    std::to_string(b.n_docs()) + "x" + std::to_string(b.dim));
  if (b.native_assignments.size() != b.n_docs())
    throw Error(ErrorKind::invalid_bundle, where + "assignment count " +
                                               std::to_string(b.native_assignments.size()) +
                                               " != document count " + std::to_string(b.n_docs()));

  std::unordered_set<std::string_view> seen;
  for (const auto& id : b.doc_ids)
    if (!seen.insert(id).second) throw Error(ErrorKind::duplicate_doc_id, where + "'" + id + "'");

  if (b.topics.empty()) throw Error(ErrorKind::invalid_bundle, where + "no topics");
  const TopicId first = b.has_outlier() ? 0 : b.topics.front().id;
  if (first != 0)
    throw Error(ErrorKind::invalid_bundle,
                where + "non-outlier topic ids must start at 0, found " + std::to_string(first));
  const std::size_t offset = b.has_outlier() ? 1 : 0;
  for (std::size_t k = offset; k < b.topics.size(); ++k) {
    const TopicId expected = static_cast<TopicId>(k - offset);
    if (b.topics[k].id != expected)
      throw Error(ErrorKind::invalid_bundle,
                  where + "topic ids must be sorted, unique and contiguous; expected " +
                      std::to_string(expected) + " but found " + std::to_string(b.topics[k].id));
  }

  if (b.topic_embeddings.rows() != b.n_topics() || b.topic_embeddings.cols() != b.dim)
    throw Error(ErrorKind::dimension_mismatch,
                where + "topic embeddings are " + std::to_string(b.topic_embeddings.rows()) + "x" +
                    std::to_string(b.topic_embeddings.cols()) + ", expected " +
                    std::to_string(b.n_topics()) + "x" + std::to_string(b.dim));
  if (b.has_outlier() == (b.outlier == OutlierEmbedding::absent))
    throw Error(ErrorKind::invalid_bundle, where + "outlier flag disagrees with topic list");

  for (std::size_t r = 0; r < b.n_docs(); ++r)
    if (is_zero_vector(b.doc_embeddings.row(r)))
      throw Error(ErrorKind::zero_vector, where + "document '" + b.doc_ids[r] + "'");
  for (std::size_t r = 0; r < b.n_topics(); ++r)
    if (is_zero_vector(b.topic_embeddings.row(r)))
      throw Error(ErrorKind::zero_vector, where + "topic " + std::to_string(b.topics[r].id));

  if (b.outlier == OutlierEmbedding::centroid) {
    const auto centroid = outlier_centroid(b);
    const auto row = b.topic_embeddings.row(0);
    for (std::size_t k = 0; k < b.dim; ++k)
      if (row[k] != static_cast<float>(centroid[k]))
        throw Error(ErrorKind::invalid_bundle, where + "outlier row is marked as centroid but differs from it");
  }

  std::vector<std::size_t> sizes(b.n_topics(), 0);
  for (std::size_t r = 0; r < b.n_docs(); ++r) {
    const TopicId t = b.native_assignments[r];
    if (!b.contains_topic(t))
      throw Error(ErrorKind::unknown_topic_id,
                  where + "document '" + b.doc_ids[r] + "' assigned topic " + std::to_string(t));
    ++sizes[b.topic_index(t)];
  }
  for (std::size_t k = 0; k < b.n_topics(); ++k)
    if (sizes[k] != b.topics[k].native_size)
      throw Error(ErrorKind::invalid_bundle,
                  where + "topic " + std::to_string(b.topics[k].id) + " declares native_size " +
                      std::to_string(b.topics[k].native_size) + " but has " +
                      std::to_string(sizes[k]) + " documents");
}

/// Recomputes native_size from the assignments and fills a missing outlier
/// row (centroid) or drops an empty embedding-less outlier topic. Used by the
/// loader and by in-memory builders such as the synthetic generator.
inline void finalize_topics(CorpusBundle& b, bool outlier_row_present) {
  for (auto& t : b.topics) t.native_size = 0;
  for (TopicId t : b.native_assignments)
    if (b.contains_topic(t)) ++b.topics[b.topic_index(t)].native_size;

  if (!b.has_outlier()) {
    b.outlier = OutlierEmbedding::absent;
    return;
  }
  if (outlier_row_present) {
    b.outlier = OutlierEmbedding::provided;
    return;
  }
  if (b.topics.front().native_size == 0) {
    // nothing to build a centroid from: run without an outlier topic
    b.topics.erase(b.topics.begin());
    b.outlier = OutlierEmbedding::absent;
    return;
  }
  const auto centroid = outlier_centroid(b);
  std::vector<float> rows;
  rows.reserve((b.topic_embeddings.rows() + 1) * b.dim);
  for (double x : centroid) rows.push_back(static_cast<float>(x));
  rows.insert(rows.end(), b.topic_embeddings.data().begin(), b.topic_embeddings.data().end());
  b.topic_embeddings = Matrix<float>(b.topic_embeddings.rows() + 1, b.dim, std::move(rows));
  b.outlier = OutlierEmbedding::centroid;
}

namespace detail {

inline std::vector<float> read_f32le(const std::filesystem::path& path, std::size_t expected_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::missing_file, path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != expected_count * sizeof(float))
    throw Error(ErrorKind::payload_size_mismatch,
                path.filename().string() + " holds " + std::to_string(bytes.size()) +
                    " bytes, manifest implies " + std::to_string(expected_count) + " floats (" +
                    std::to_string(expected_count * sizeof(float)) + " bytes)");
  std::vector<float> out(expected_count);
  for (std::size_t k = 0; k < expected_count; ++k) {
    std::uint32_t word = 0;
    for (int b = 3; b >= 0; --b)
      word = (word << 8) | static_cast<unsigned char>(bytes[k * 4 + static_cast<std::size_t>(b)]);
    out[k] = std::bit_cast<float>(word);
  }
  return out;
}

inline void write_f32le(const std::filesystem::path& path, const std::vector<float>& values) {
  std::string bytes(values.size() * 4, '\0');
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto word = std::bit_cast<std::uint32_t>(values[k]);
    for (int b = 0; b < 4; ++b) bytes[k * 4 + static_cast<std::size_t>(b)] = static_cast<char>((word >> (8 * b)) & 0xFFu);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io, "short write to " + path.string());
}

inline std::size_t payload_floats(const std::filesystem::path& path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw Error(ErrorKind::missing_file, path.string());
  return static_cast<std::size_t>(size / sizeof(float)) + (size % sizeof(float) ? 1 : 0);
}

template <typename Json>
Json require(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(ErrorKind::invalid_bundle, where + ": manifest lacks '" + key + "'");
  return j.at(key);
}

}  // namespace detail

inline CorpusBundle load_bundle(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream mf(manifest_path);
  if (!mf) throw Error(ErrorKind::missing_file, manifest_path.string());

  nlohmann::json m;
  try {
    m = nlohmann::json::parse(mf);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_bundle, manifest_path.string() + ": " + e.what());
  }
  const std::string where = manifest_path.string();

  CorpusBundle b;
  std::size_t n_docs = 0;
  nlohmann::json files;
  try {
    const int version = detail::require(m, "schema_version", where).get<int>();
    if (version != kBundleSchemaVersion)
      throw Error(ErrorKind::invalid_bundle, where + ": unsupported schema_version " + std::to_string(version));
    b.corpus_id = detail::require(m, "corpus_id", where).get<std::string>();
    const auto dim = detail::require(m, "dim", where).get<std::int64_t>();
    if (dim <= 0) throw Error(ErrorKind::invalid_bundle, where + ": dim must be positive");
    b.dim = static_cast<std::size_t>(dim);
    const auto docs = detail::require(m, "n_docs", where).get<std::int64_t>();
    if (docs < 0) throw Error(ErrorKind::invalid_bundle, where + ": n_docs must be non-negative");
    n_docs = static_cast<std::size_t>(docs);
    for (const auto& t : detail::require(m, "topics", where)) {
      TopicMeta meta;
      meta.id = t.at("id").get<TopicId>();
      if (meta.id < kOutlierTopic)
        throw Error(ErrorKind::invalid_bundle, where + ": topic id " + std::to_string(meta.id) + " < -1");
      meta.label = t.value("label", std::string{});
      meta.keywords = t.value("keywords", std::vector<std::string>{});
      meta.native_size = t.value("native_size", std::size_t{0});
      b.topics.push_back(std::move(meta));
    }
    files = detail::require(m, "files", where);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_bundle, where + ": " + e.what());
  }
  const auto file_of = [&](const char* key, const char* fallback) {
    return dir / files.value(key, std::string(fallback));
  };

  for (std::size_t k = 1; k < b.topics.size(); ++k)
    if (b.topics[k].id <= b.topics[k - 1].id)
      throw Error(ErrorKind::invalid_bundle,
                  where + ": topics must be sorted ascending without duplicates (id " +
                      std::to_string(b.topics[k].id) + ")");
  {
    const std::size_t offset = b.has_outlier() ? 1 : 0;
    for (std::size_t k = offset; k < b.topics.size(); ++k)
      if (b.topics[k].id != static_cast<TopicId>(k - offset))
        throw Error(ErrorKind::invalid_bundle, where + ": non-outlier topic ids must be contiguous from 0 (found " +
                                                   std::to_string(b.topics[k].id) + ")");
  }
  const std::vector<TopicMeta> declared = b.topics;

  b.doc_embeddings = Matrix<float>(n_docs, b.dim,
                                   detail::read_f32le(file_of("doc_embeddings", "doc_embeddings.f32le"), n_docs * b.dim));

  // The outlier row may be omitted; its presence is read off the payload size.
  const fs::path topic_path = file_of("topic_embeddings", "topic_embeddings.f32le");
  std::size_t topic_rows = b.topics.size();
  const bool lists_outlier = b.has_outlier();
  if (lists_outlier && detail::payload_floats(topic_path) == (topic_rows - 1) * b.dim) --topic_rows;
  b.topic_embeddings = Matrix<float>(topic_rows, b.dim, detail::read_f32le(topic_path, topic_rows * b.dim));

  const fs::path assign_path = file_of("assignments", "assignments.csv");
  std::ifstream af(assign_path);
  if (!af) throw Error(ErrorKind::missing_file, assign_path.string());
  std::string line;
  if (!std::getline(af, line) || csv::split_line(line) != std::vector<std::string>{"doc_id", "topic_id"})
    throw Error(ErrorKind::invalid_bundle, assign_path.string() + ": expected header 'doc_id,topic_id'");
  std::size_t line_no = 1;
  while (std::getline(af, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split_line(line);
    const auto topic = fields.size() == 2 ? csv::parse_int(fields[1]) : std::nullopt;
    if (!topic)
      throw Error(ErrorKind::invalid_bundle,
                  assign_path.string() + ":" + std::to_string(line_no) + ": malformed row '" + line + "'");
    b.doc_ids.push_back(fields[0]);
    b.native_assignments.push_back(static_cast<TopicId>(*topic));
  }
  if (b.doc_ids.size() != n_docs)
    throw Error(ErrorKind::invalid_bundle, assign_path.string() + ": " + std::to_string(b.doc_ids.size()) +
                                               " rows but manifest declares n_docs=" + std::to_string(n_docs));

  for (std::size_t r = 0; r < n_docs; ++r)
    if (!b.contains_topic(b.native_assignments[r]))
      throw Error(ErrorKind::unknown_topic_id, where + ": document '" + b.doc_ids[r] + "' assigned topic " +
                                                   std::to_string(b.native_assignments[r]));
  {
    std::unordered_set<std::string_view> seen;
    for (const auto& id : b.doc_ids)
      if (!seen.insert(id).second) throw Error(ErrorKind::duplicate_doc_id, where + ": '" + id + "'");
  }

  finalize_topics(b, topic_rows == b.topics.size());
  for (const auto& t : declared) {
    if (!b.contains_topic(t.id)) continue;  // dropped empty outlier
    if (b.topic(t.id).native_size != t.native_size)
      throw Error(ErrorKind::invalid_bundle,
                  where + ": topic " + std::to_string(t.id) + " declares native_size " +
                      std::to_string(t.native_size) + " but has " +
                      std::to_string(b.topic(t.id).native_size) + " documents");
  }
  validate_bundle(b);
  return b;
}

inline void write_bundle(const CorpusBundle& b, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  validate_bundle(b);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());

  nlohmann::ordered_json m;
  m["schema_version"] = kBundleSchemaVersion;
  m["corpus_id"] = b.corpus_id;
  m["dim"] = b.dim;
  m["n_docs"] = b.n_docs();
  auto topics = nlohmann::ordered_json::array();
  for (const auto& t : b.topics)
    topics.push_back({{"id", t.id}, {"label", t.label}, {"keywords", t.keywords}, {"native_size", t.native_size}});
  m["topics"] = std::move(topics);
  m["files"] = {{"doc_embeddings", "doc_embeddings.f32le"},
                {"topic_embeddings", "topic_embeddings.f32le"},
                {"assignments", "assignments.csv"}};
  {
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + (dir / "manifest.json").string());
    out << m.dump(2) << '\n';
  }

  detail::write_f32le(dir / "doc_embeddings.f32le", b.doc_embeddings.data());
  if (b.outlier == OutlierEmbedding::centroid) {
    // the loader regenerates the centroid row
    std::vector<float> rows(b.topic_embeddings.data().begin() + static_cast<std::ptrdiff_t>(b.dim),
                            b.topic_embeddings.data().end());
    detail::write_f32le(dir / "topic_embeddings.f32le", rows);
  } else {
    detail::write_f32le(dir / "topic_embeddings.f32le", b.topic_embeddings.data());
  }

  std::ofstream out(dir / "assignments.csv", std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + (dir / "assignments.csv").string());
  out << "doc_id,topic_id\n";
  for (std::size_t r = 0; r < b.n_docs(); ++r) out << csv::escape(b.doc_ids[r]) << ',' << b.native_assignments[r] << '\n';
  if (!out) throw Error(ErrorKind::io, "short write to " + (dir / "assignments.csv").string());
}

}  // namespace btm
