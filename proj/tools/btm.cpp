// btm: command-line front end for bidirectional topic matching.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "btm/btm.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("btm");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("BTM_LOG")) spdlog::set_level(spdlog::level::from_str(level));
}

void log_warnings(const btm::AnalysisReport& report) {
  for (const auto* m : {&report.forward, &report.backward})
    for (const auto& w : m->warnings) spdlog::warn("{}", w);
}

void log_summary(const btm::AnalysisReport& report) {
  for (const auto* m : {&report.forward, &report.backward})
    spdlog::info("{} ({} native): C={:.4f} U={:.4f} A={:.4f} theta={:+.4f} relationship={} unique={}",
                 btm::to_string(m->direction), m->native_corpus, m->c, m->u, m->a, m->theta,
                 btm::to_string(m->relationship), m->unique_topics.size());
  for (const auto* v : {&report.validation_forward, &report.validation_backward})
    spdlog::info("{} kappa={:.4f} ({}/{} agree)", btm::to_string(v->direction), v->kappa, v->n_agreements,
                 v->n_topics);
}

struct Flags {
  std::string c1, c2, pool = "both", cosine_outlier = "on", out = "btm-out", config, report;
  double unique_threshold = btm::kDefaultUniqueThreshold;
  double merge_below = btm::kDefaultMergeBelow;
  std::size_t top_k = btm::kDefaultTopK;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

btm::RunConfig to_run_config(const Flags& f) {
  btm::RunConfig c;
  c.corpus_1 = f.c1;
  c.corpus_2 = f.c2;
  c.pool = btm::parse_pool(f.pool);
  c.unique_threshold = f.unique_threshold;
  c.cosine_outlier = f.cosine_outlier == "on";
  c.top_k = f.top_k;
  c.merge_below = f.merge_below;
  c.out_dir = f.out;
  c.threads = f.threads == 0 ? 1 : f.threads;
  return c;
}

void add_pair_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--c1", f.c1, "bundle directory of corpus 1")->required();
  cmd->add_option("--c2", f.c2, "bundle directory of corpus 2")->required();
  cmd->add_option("--threads", f.threads, "worker threads for cross assignment (never changes results)");
  cmd->add_option("--out", f.out, "output directory");
}

void add_analysis_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--pool", f.pool, "documents forming D_i")->check(CLI::IsMember({"both", "native"}));
  cmd->add_option("--unique-threshold", f.unique_threshold, "uniqueness cutoff for unique topics");
  cmd->add_option("--cosine-outlier", f.cosine_outlier, "let the cosine rater pick the outlier topic")
      ->check(CLI::IsMember({"on", "off"}));
}

void add_plot_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--top-k", f.top_k, "largest native topics per direction");
  cmd->add_option("--merge-below", f.merge_below, "pairs below this strength merge into 'remaining'");
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Bidirectional topic matching between two topic-modelled corpora"};
  app.set_version_flag("--version", std::string(btm::kVersion));
  app.require_subcommand(1);
  Flags f;

  auto* match = app.add_subcommand("match", "assign the documents of --c1 to the topics of --c2");
  add_pair_flags(match, f);

  auto* analyze = app.add_subcommand("analyze", "full pipeline: measures, validation, report, plot data");
  add_pair_flags(analyze, f);
  add_analysis_flags(analyze, f);
  add_plot_flags(analyze, f);

  auto* validate = app.add_subcommand("validate", "cosine-vs-co-occurrence agreement (Cohen's kappa) only");
  add_pair_flags(validate, f);
  add_analysis_flags(validate, f);

  auto* plot = app.add_subcommand("plot-data", "pairing-strength composition table");
  plot->add_option("--c1", f.c1, "bundle directory of corpus 1");
  plot->add_option("--c2", f.c2, "bundle directory of corpus 2");
  plot->add_option("--report", f.report, "existing report.json instead of --c1/--c2");
  plot->add_option("--threads", f.threads, "worker threads for cross assignment");
  plot->add_option("--out", f.out, "output directory");
  add_analysis_flags(plot, f);
  add_plot_flags(plot, f);

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus pair with planted structure");
  synth->add_option("--config", f.config, "synth.json (fields of SynthConfig; defaults apply)");
  synth->add_option("--seed", f.seed, "overrides the config seed")->each([&](const std::string&) { f.seed_given = true; });
  synth->add_option("--out", f.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : btm::kExitInputError;
  }

  return btm::guarded([&] {
    if (*match) {
      const auto config = to_run_config(f);
      const auto docs = btm::load_bundle(config.corpus_1);
      const auto model = btm::load_bundle(config.corpus_2);
      const auto assignments = btm::assign_cross_topics(docs, model, config.threads);
      btm::detail::ensure_dir(config.out_dir);
      btm::detail::write_file(config.out_dir / "cross_assignments.csv",
                              [&](std::ostream& o) { btm::write_cross_assignments_csv(assignments, o); });
      spdlog::info("assigned {} documents of '{}' to topics of '{}'", assignments.size(), docs.corpus_id,
                   model.corpus_id);
    } else if (*analyze) {
      const auto config = to_run_config(f);
      btm::validate_run_config(config);
      const auto result = btm::analyze(btm::load_bundle(config.corpus_1), btm::load_bundle(config.corpus_2), config);
      btm::write_analysis(result, config);
      log_warnings(result.report);
      log_summary(result.report);
    } else if (*validate) {
      const auto config = to_run_config(f);
      btm::validate_run_config(config);
      const auto result = btm::analyze(btm::load_bundle(config.corpus_1), btm::load_bundle(config.corpus_2), config);
      btm::detail::ensure_dir(config.out_dir);
      const auto doc = btm::ojson::array({btm::to_json(result.report.validation_forward),
                                          btm::to_json(result.report.validation_backward)});
      btm::detail::write_file(config.out_dir / "validation.json", [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
      for (const auto* v : {&result.report.validation_forward, &result.report.validation_backward})
        std::cout << btm::to_string(v->direction) << " kappa=" << v->kappa << " agreements=" << v->n_agreements << "/"
                  << v->n_topics << '\n';
    } else if (*plot) {
      auto config = to_run_config(f);
      btm::AnalysisReport report;
      if (!f.report.empty()) {
        std::ifstream in(f.report);
        if (!in) throw btm::Error(btm::ErrorKind::missing_file, f.report);
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
          throw btm::Error(btm::ErrorKind::invalid_config, f.report + ": " + e.what());
        }
        report = btm::report_from_json(j);
      } else {
        if (f.c1.empty() || f.c2.empty())
          throw btm::Error(btm::ErrorKind::invalid_config, "plot-data needs --report or both --c1 and --c2");
        btm::validate_run_config(config);
        report = btm::analyze(btm::load_bundle(config.corpus_1), btm::load_bundle(config.corpus_2), config).report;
      }
      btm::detail::ensure_dir(config.out_dir);
      btm::detail::write_file(config.out_dir / "plot_data.csv", [&](std::ostream& o) {
        btm::write_plot_csv(btm::plot_data(report, config.top_k, config.merge_below), o);
      });
    } else if (*synth) {
      btm::SynthConfig config;
      if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw btm::Error(btm::ErrorKind::missing_file, f.config);
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
          throw btm::Error(btm::ErrorKind::invalid_config, f.config + ": " + e.what());
        }
        config = btm::synth_config_from_json(j);
      }
      if (f.seed_given) config.seed = f.seed;
      const auto pair = btm::generate_pair(config);
      btm::write_synth(pair, f.out);
      spdlog::info("wrote synthetic pair ({} + {} documents) to {}", pair.corpus_1.n_docs(), pair.corpus_2.n_docs(),
                   f.out);
    }
  });
}
