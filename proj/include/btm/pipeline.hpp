#pragma once

// load -> cross-assign (both directions) -> count -> strengths -> measures
// -> validation -> report. Shared by the `btm` tool and the test suites.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include "btm/cooccur.hpp"
#include "btm/error.hpp"
#include "btm/interchange.hpp"
#include "btm/matcher.hpp"
#include "btm/measures.hpp"
#include "btm/report.hpp"
#include "btm/validate.hpp"

namespace btm {

struct RunConfig {
  std::filesystem::path corpus_1;
  std::filesystem::path corpus_2;
  Pool pool = Pool::both;
  double unique_threshold = kDefaultUniqueThreshold;
  bool cosine_outlier = true;
  std::size_t top_k = kDefaultTopK;
  double merge_below = kDefaultMergeBelow;
  std::filesystem::path out_dir = "btm-out";
  unsigned threads = 1;  // hint only; never changes results
};

inline void validate_run_config(const RunConfig& c) {
  if (!(c.unique_threshold > 0.0 && c.unique_threshold <= 1.0))
    throw Error(ErrorKind::invalid_config, "--unique-threshold must lie in (0,1]");
  if (!(c.merge_below > 0.0 && c.merge_below <= 1.0))
    throw Error(ErrorKind::invalid_config, "--merge-below must lie in (0,1]");
  if (c.top_k == 0) throw Error(ErrorKind::invalid_config, "--top-k must be positive");
  if (c.corpus_1.empty() || c.corpus_2.empty()) throw Error(ErrorKind::invalid_config, "--c1 and --c2 are required");
  std::error_code ec;
  if (std::filesystem::equivalent(c.corpus_1, c.corpus_2, ec) || c.corpus_1 == c.corpus_2)
    throw Error(ErrorKind::invalid_config, "--c1 and --c2 must name different bundles");
}

/// Test seam: lets a harness tamper with intermediate results.
struct PipelineHooks {
  std::function<void(PairCounts&)> after_count;
};

struct AnalysisResult {
  AssignmentTable table;
  StrengthMatrix forward;
  StrengthMatrix backward;
  AnalysisReport report;
};

inline AnalysisResult analyze(const CorpusBundle& bundle1, const CorpusBundle& bundle2, const RunConfig& config,
                              const PipelineHooks& hooks = {}) {
  AnalysisResult r;
  r.table = build_assignment_table(bundle1, bundle2, config.threads);

  const auto strengths_for = [&](Direction direction) {
    PairCounts counts = count_pairs(r.table, direction, config.pool);
    if (hooks.after_count) hooks.after_count(counts);
    return pairing_strengths(counts);
  };
  r.forward = strengths_for(Direction::one_to_two);
  r.backward = strengths_for(Direction::two_to_one);

  auto forward = compute_measures(r.forward, bundle1, bundle2, config.unique_threshold);
  auto backward = compute_measures(r.backward, bundle2, bundle1, config.unique_threshold);
  auto v_forward = validate_direction(r.forward, bundle1, bundle2, config.cosine_outlier);
  auto v_backward = validate_direction(r.backward, bundle2, bundle1, config.cosine_outlier);

  ReportMetadata meta;
  meta.corpus_1 = bundle1.corpus_id;
  meta.corpus_2 = bundle2.corpus_id;
  meta.pool = config.pool;
  meta.unique_threshold = config.unique_threshold;
  meta.cosine_outlier = config.cosine_outlier;
  meta.created = reproducible_timestamp();
  r.report = build_report(std::move(meta), std::move(forward), std::move(backward), std::move(v_forward),
                          std::move(v_backward));
  return r;
}

namespace detail {

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  writer(out);
  if (!out) throw Error(ErrorKind::io, "short write to " + path.string());
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace detail

inline void write_analysis(const AnalysisResult& r, const RunConfig& config) {
  detail::ensure_dir(config.out_dir);
  detail::write_file(config.out_dir / "report.json", [&](std::ostream& o) { o << to_json(r.report).dump(2) << '\n'; });
  detail::write_file(config.out_dir / "plot_data.csv",
                     [&](std::ostream& o) { write_plot_csv(plot_data(r.report, config.top_k, config.merge_below), o); });
  detail::write_file(config.out_dir / "assignments_table.csv", [&](std::ostream& o) { write_assignment_table_csv(r.table, o); });
  detail::write_file(config.out_dir / "strengths_1to2.csv", [&](std::ostream& o) { write_strengths_csv(r.forward, o); });
  detail::write_file(config.out_dir / "strengths_2to1.csv", [&](std::ostream& o) { write_strengths_csv(r.backward, o); });
}

enum ExitCode : int { kExitOk = 0, kExitInputError = 1, kExitInternalError = 2 };

inline int exit_code_for(const Error& e) {
  return e.kind() == ErrorKind::invariant_violation ? kExitInternalError : kExitInputError;
}

/// Runs `body`, maps failures to exit codes and reports them on `err`.
template <typename Body>
int guarded(Body&& body, std::ostream& err = std::cerr) {
  try {
    body();
    return kExitOk;
  } catch (const Error& e) {
    err << "btm: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "btm: internal error: " << e.what() << '\n';
    return kExitInternalError;
  }
}

inline int run_analyze(const RunConfig& config, const PipelineHooks& hooks = {}, std::ostream& err = std::cerr) {
  return guarded(
      [&] {
        validate_run_config(config);
        const auto b1 = load_bundle(config.corpus_1);
        const auto b2 = load_bundle(config.corpus_2);
        write_analysis(analyze(b1, b2, config, hooks), config);
      },
      err);
}

}  // namespace btm
