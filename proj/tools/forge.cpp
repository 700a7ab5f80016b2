#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "geoforge/common/error.hpp"
#include "geoforge/eval/runner.hpp"
#include "geoforge/kernel/catalog.hpp"
#include "geoforge/pipeline/pipeline.hpp"

using namespace geoforge;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
  bool quiet = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "pipeline config (JSON)")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "global seed");
  app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "output directory");
  app->add_flag("--quiet", c.quiet, "no progress output");
}

PipelineConfig resolve(const Common& c) {
  PipelineConfig cfg = c.config.empty() ? parse_pipeline_config(Json::object()) : load_pipeline_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.jobs) cfg.jobs = *c.jobs;
  if (!c.out.empty()) cfg.out = c.out;
  return cfg;
}

Progress progress_for(const Common& c) {
  if (c.quiet) return {};
  return [](const std::string& stage, std::size_t done, std::size_t total) {
    if (done == total || done % 50 == 0) std::fprintf(stderr, "\r[%s] %zu/%zu%s", stage.c_str(), done, total, done == total ? "\n" : "");
  };
}

void report(const StageReport& r) {
  std::fprintf(stderr, "%-9s in %6zu  out %6zu  rejected %5zu  %8.2fs\n", r.stage.c_str(), r.input, r.output, r.rejected,
               r.seconds);
}

fs::path data_dir() {
  if (const char* env = std::getenv("GEOFORGE_DATA")) return env;
  return GEOFORGE_DATA_DIR;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "cannot write " + p.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forge: synthetic geometry problem generation and evaluation"};
  app.require_subcommand(1);

  Common common;
  std::string stage;
  auto stage_cmd = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, common);
    sub->callback([&, name] { stage = name; });
    return sub;
  };
  stage_cmd("sample", "sample the premise pool -> pool.jsonl");
  stage_cmd("saturate", "saturate every pooled premise -> closures.jsonl");
  stage_cmd("assemble", "saturate, assemble and check problems -> problems.jsonl");
  stage_cmd("render", "draw and verify figures -> rendered.jsonl, figures/");
  stage_cmd("split", "band difficulty 3:5:2 -> corpus.jsonl");
  stage_cmd("stats", "corpus statistics -> stats.json");
  stage_cmd("pipeline", "every stage end to end");

  auto* baseline = app.add_subcommand("baseline", "random-subset baseline");
  add_common(baseline, common);
  std::string base_corpus, base_report, base_law = "uniform_nonempty";
  std::size_t base_trials = 100000;
  baseline->add_option("--corpus", base_corpus, "corpus JSONL (default: <out>/corpus.jsonl)");
  baseline->add_option("--law", base_law, "uniform16, uniform_nonempty or empty");
  baseline->add_option("--trials", base_trials)->check(CLI::PositiveNumber);
  baseline->add_option("--report", base_report, "JSON report path");

  auto* eval = app.add_subcommand("eval", "score predictions against a corpus");
  std::string eval_corpus, eval_preds, eval_report;
  MetricsConfig metrics;
  eval->add_option("--corpus", eval_corpus)->required()->check(CLI::ExistingFile);
  eval->add_option("--preds", eval_preds)->required()->check(CLI::ExistingFile);
  eval->add_option("--report", eval_report, "JSON report path");
  eval->add_flag("--micro", metrics.micro, "micro-averaged P/R/F1");
  eval->add_flag("--count-no-answer", metrics.avg_selected_counts_no_answer, "count NO_ANSWER as 0 selected");

  auto* run = app.add_subcommand("run", "query a chat-completions endpoint");
  EndpointConfig endpoint;
  std::string run_corpus, run_preds, prompt = "en", modality = "text_only";
  std::optional<std::size_t> max_requests;
  run->add_option("--endpoint", endpoint.base_url, "base URL, e.g. http://localhost:8000/v1")->required();
  run->add_option("--model", endpoint.model)->required();
  run->add_option("--modality", modality)->check(CLI::IsMember({"text_only", "text_image"}));
  run->add_option("--prompt", prompt, "en, zh or a template file");
  run->add_option("--corpus", run_corpus)->required()->check(CLI::ExistingFile);
  run->add_option("--preds", run_preds, "prediction ledger (default: preds.jsonl next to the corpus)");
  run->add_option("--api-key-env", endpoint.api_key_env, "environment variable holding the API key");
  run->add_option("--auth-header", endpoint.auth_header);
  run->add_option("--max-tokens", endpoint.max_tokens);
  run->add_option("--jobs", endpoint.jobs, "concurrent requests")->check(CLI::PositiveNumber);
  run->add_option("--max-requests", max_requests, "stop after this many new requests");

  auto* catalog_cmd = app.add_subcommand("catalog", "list construction templates");

  CLI11_PARSE(app, argc, argv);

  const std::string where = app.get_subcommands().front()->get_name();
  try {
    if (!stage.empty()) {
      const PipelineConfig cfg = resolve(common);
      const auto progress = progress_for(common);
      fs::create_directories(cfg.out);
      if (stage == "pipeline") {
        for (const auto& r : run_pipeline(cfg, progress)) report(r);
      } else if (stage == "sample") {
        report(stage_sample(cfg, progress));
      } else if (stage == "saturate") {
        report(stage_saturate(cfg, progress));
      } else if (stage == "assemble") {
        report(stage_assemble(cfg, progress));
      } else if (stage == "render") {
        report(stage_render(cfg, progress));
      } else if (stage == "split") {
        report(stage_split(cfg));
      } else if (stage == "stats") {
        report(stage_stats(cfg));
        std::cout << read_text(cfg.out / artifact::stats);
      }
    } else if (baseline->parsed()) {
      const PipelineConfig cfg = resolve(common);
      const auto law = subset_law_from_name(base_law);
      if (!law) throw Error(ErrorCode::InvalidConfig, "unknown law " + base_law);
      const auto records = read_corpus(base_corpus.empty() ? cfg.out / artifact::corpus : fs::path(base_corpus));
      const auto r = random_baseline(gold_items(records), base_trials, cfg.baseline_seed, *law, cfg.metrics);
      std::cout << format_table({{"Random (" + base_law + ")", r}});
      if (!base_report.empty()) write_text(base_report, to_json(r).dump(2) + "\n");
    } else if (eval->parsed()) {
      const auto records = read_corpus(eval_corpus);
      const auto preds = read_predictions(eval_preds);
      const auto r = compute_metrics(preds, gold_items(records), metrics);
      std::cout << format_table({{fs::path(eval_preds).stem().string(), r}});
      std::cout << "outcomes:";
      for (int i = 0; i < 4; ++i) std::cout << ' ' << kOutcomeNames[i] << '=' << r.outcome_counts[i];
      std::cout << '\n';
      if (!eval_report.empty()) write_text(eval_report, to_json(r).dump(2) + "\n");
    } else if (run->parsed()) {
      RunOptions opt;
      opt.modality = modality == "text_image" ? Modality::text_image : Modality::text_only;
      opt.lang = prompt == "zh" ? Lang::zh : Lang::en;
      opt.prompt_template =
          read_text(prompt == "en" || prompt == "zh" ? data_dir() / "prompts" / (prompt + ".txt") : fs::path(prompt));
      opt.corpus_dir = fs::path(run_corpus).parent_path();
      opt.ledger = run_preds.empty() ? opt.corpus_dir / "preds.jsonl" : fs::path(run_preds);
      opt.max_requests = max_requests;
      const auto records = read_corpus(run_corpus);
      const auto preds = run_model(endpoint, records, opt);
      std::size_t failed = 0;
      for (const auto& p : preds) failed += !p.error.empty();
      std::fprintf(stderr, "%zu predictions in %s, %zu failed\n", preds.size(), opt.ledger.c_str(), failed);
    } else if (catalog_cmd->parsed()) {
      for (const auto& t : catalog())
        std::printf("%-18s new %d  args %d  params %d  %.*s\n", std::string(t.name).c_str(), t.new_points, t.arity,
                    t.params, static_cast<int>(t.doc.size()), t.doc.data());
    }
  } catch (const StageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s: %s\n", where.c_str(), e.what());
    return 1;
  }
  return 0;
}
