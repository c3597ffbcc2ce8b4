#pragma once

// Cross-corpus topic assignment: every document of one corpus is mapped to
// the most similar topic embedding of the other corpus's model.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "btm/csv.hpp"
#include "btm/error.hpp"
#include "btm/interchange.hpp"
#include "btm/linalg.hpp"

namespace btm {

struct CrossAssignment {
  std::string doc_id;
  TopicId topic = 0;
  double similarity = 0.0;

  friend bool operator==(const CrossAssignment&, const CrossAssignment&) = default;
};

/// Argmax of cosine similarity over all topics of `cross_model` (the outlier
/// topic included whenever it has an embedding). Ties go to the smaller id.
/// `threads` only partitions the document range; output is identical for any
/// value.
inline std::vector<CrossAssignment> assign_cross_topics(const CorpusBundle& docs,
                                                        const CorpusBundle& cross_model,
                                                        unsigned threads = 1) {
  if (docs.dim != cross_model.dim)
    throw Error(ErrorKind::dimension_mismatch,
                "corpus '" + docs.corpus_id + "' has dim " + std::to_string(docs.dim) + " but model '" +
                    cross_model.corpus_id + "' has dim " + std::to_string(cross_model.dim));
  if (docs.n_docs() == 0) throw Error(ErrorKind::empty_corpus, "corpus '" + docs.corpus_id + "' has no documents");
  if (cross_model.n_topics() == 0)
    throw Error(ErrorKind::invalid_bundle, "model '" + cross_model.corpus_id + "' has no topics");

  const std::size_t dim = docs.dim;
  const std::size_t n_topics = cross_model.n_topics();
  std::vector<double> topics(n_topics * dim);
  std::vector<double> topic_norm(n_topics);
  for (std::size_t t = 0; t < n_topics; ++t) {
    const auto row = cross_model.topic_embeddings.row(t);
    for (std::size_t k = 0; k < dim; ++k) topics[t * dim + k] = static_cast<double>(row[k]);
    topic_norm[t] = std::sqrt(squared_norm(row));
    if (topic_norm[t] == 0.0)
      throw Error(ErrorKind::zero_vector, "model '" + cross_model.corpus_id + "' topic " +
                                              std::to_string(cross_model.topics[t].id));
  }

  std::vector<CrossAssignment> out(docs.n_docs());
  const auto assign_range = [&](std::size_t begin, std::size_t end) {
    std::vector<double> doc(dim);
    for (std::size_t d = begin; d < end; ++d) {
      const auto row = docs.doc_embeddings.row(d);
      for (std::size_t k = 0; k < dim; ++k) doc[k] = static_cast<double>(row[k]);
      const double doc_norm = std::sqrt(squared_norm(std::span<const double>(doc)));
      if (doc_norm == 0.0) throw Error(ErrorKind::zero_vector, "document '" + docs.doc_ids[d] + "'");

      // topics are sorted by id, so a strict '>' keeps the smallest id on ties
      std::size_t best = 0;
      double best_sim = -2.0;
      for (std::size_t t = 0; t < n_topics; ++t) {
        double dot = 0.0;
        for (std::size_t k = 0; k < dim; ++k) dot += doc[k] * topics[t * dim + k];
        double sim = dot / (doc_norm * topic_norm[t]);
        sim = std::clamp(sim, -1.0, 1.0);
        if (sim > best_sim) {
          best_sim = sim;
          best = t;
        }
      }
      out[d] = {docs.doc_ids[d], cross_model.topics[best].id, best_sim};
    }
  };

  const std::size_t n = docs.n_docs();
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, n);
  if (workers == 1) {
    assign_range(0, n);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          assign_range(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

struct AssignmentRow {
  std::string doc_id;
  int source_corpus = 1;  // 1 or 2
  TopicId model1_topic = 0;
  TopicId model2_topic = 0;
  double cross_similarity = 0.0;

  friend bool operator==(const AssignmentRow&, const AssignmentRow&) = default;
};

/// T11/T21 for corpus-1 documents followed by T12/T22 for corpus-2
/// documents, in document order.
struct AssignmentTable {
  std::vector<AssignmentRow> rows;
  std::vector<TopicId> model1_topics;
  std::vector<TopicId> model2_topics;
  std::size_t n_docs_1 = 0;
  std::size_t n_docs_2 = 0;

  friend bool operator==(const AssignmentTable&, const AssignmentTable&) = default;
};

inline AssignmentTable build_assignment_table(const CorpusBundle& bundle1, const CorpusBundle& bundle2,
                                              unsigned threads = 1) {
  if (bundle1.dim != bundle2.dim)
    throw Error(ErrorKind::dimension_mismatch,
                "embedding dims differ: '" + bundle1.corpus_id + "' has " + std::to_string(bundle1.dim) +
                    ", '" + bundle2.corpus_id + "' has " + std::to_string(bundle2.dim));
  AssignmentTable table;
  table.model1_topics = bundle1.topic_ids();
  table.model2_topics = bundle2.topic_ids();
  table.n_docs_1 = bundle1.n_docs();
  table.n_docs_2 = bundle2.n_docs();
  table.rows.reserve(table.n_docs_1 + table.n_docs_2);

  if (bundle1.n_docs() > 0) {
    const auto t21 = assign_cross_topics(bundle1, bundle2, threads);
    for (std::size_t d = 0; d < bundle1.n_docs(); ++d)
      table.rows.push_back({bundle1.doc_ids[d], 1, bundle1.native_assignments[d], t21[d].topic, t21[d].similarity});
  }
  if (bundle2.n_docs() > 0) {
    const auto t12 = assign_cross_topics(bundle2, bundle1, threads);
    for (std::size_t d = 0; d < bundle2.n_docs(); ++d)
      table.rows.push_back({bundle2.doc_ids[d], 2, t12[d].topic, bundle2.native_assignments[d], t12[d].similarity});
  }
  return table;
}

inline void write_assignment_table_csv(const AssignmentTable& table, std::ostream& out) {
  out << "doc_id,source_corpus,model1_topic,model2_topic,cross_similarity\n";
  for (const auto& r : table.rows)
    out << csv::escape(r.doc_id) << ',' << r.source_corpus << ',' << r.model1_topic << ',' << r.model2_topic << ','
        << csv::format_double(r.cross_similarity) << '\n';
}

inline void write_cross_assignments_csv(const std::vector<CrossAssignment>& assignments, std::ostream& out) {
  out << "doc_id,cross_topic,cross_similarity\n";
  for (const auto& a : assignments)
    out << csv::escape(a.doc_id) << ',' << a.topic << ',' << csv::format_double(a.similarity) << '\n';
}

}  // namespace btm
