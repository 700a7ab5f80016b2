#include <fstream>
#include <set>

#include "geoforge/common/error.hpp"
#include "geoforge/pipeline/pipeline.hpp"

namespace geoforge {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

// Reads the keys of one object, rejecting any not listed.
class Section {
public:
  Section(const Json& j, std::string path, std::set<std::string> keys) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad((path_.empty() ? std::string("config") : path_) + " must be an object");
    for (const auto& [k, v] : j_.items())
      if (!keys.count(k)) bad("unknown key '" + where(k) + "'");
  }

  template <typename T>
  void get(const std::string& key, T& out) const {
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception&) {
      bad("bad value for '" + where(key) + "': " + j_.at(key).dump());
    }
  }

  std::optional<Section> sub(const std::string& key, std::set<std::string> keys) const {
    if (!j_.contains(key)) return std::nullopt;
    return Section(j_.at(key), where(key), std::move(keys));
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const Json& at(const std::string& key) const { return j_.at(key); }
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
  const Json& j_;
  std::string path_;
};

}  // namespace

PipelineConfig parse_pipeline_config(const Json& j) {
  PipelineConfig c;
  const Section root(j, "", {"seed", "seeds", "out", "jobs", "max_problems", "sampler", "engine", "forge", "renderer",
                             "split", "eval"});
  root.get("seed", c.seed);
  root.get("seeds", c.seeds);
  std::string out = c.out.string();
  root.get("out", out);
  c.out = out;
  root.get("jobs", c.jobs);
  if (root.has("max_problems") && !root.at("max_problems").is_null()) {
    std::size_t m = 0;
    root.get("max_problems", m);
    c.max_problems = m;
  }
  if (auto s = root.sub("sampler", {"max_depth", "branching_schedule", "templates_per_layer", "rejection_budget",
                                    "max_points"})) {
    s->get("max_depth", c.sampler.max_depth);
    s->get("branching_schedule", c.sampler.branching_schedule);
    s->get("templates_per_layer", c.sampler.templates_per_layer);
    s->get("rejection_budget", c.sampler.rejection_budget);
    s->get("max_points", c.sampler.max_points);
  }
  if (auto s = root.sub("engine", {"max_level", "algebra", "max_facts"})) {
    s->get("max_level", c.engine.max_level);
    s->get("algebra", c.engine.algebra);
    s->get("max_facts", c.engine.max_facts);
  }
  if (auto s = root.sub("forge", {"weights", "zscore", "key_dist", "max_attempts", "distractor_bases", "check"})) {
    s->get("weights", c.forge.difficulty.weights);
    s->get("zscore", c.forge.difficulty.zscore);
    s->get("key_dist", c.forge.key_dist);
    s->get("max_attempts", c.forge.max_attempts);
    s->get("distractor_bases", c.forge.distractor_bases);
    s->get("check", c.check_problems);
  }
  if (auto s = root.sub("renderer", {"size", "margin", "font", "label_passes", "figure_retries"})) {
    s->get("size", c.renderer.size);
    s->get("margin", c.renderer.margin);
    s->get("font", c.renderer.font);
    s->get("label_passes", c.renderer.label_passes);
    s->get("figure_retries", c.figure_retries);
  }
  if (auto s = root.sub("split", {"ratios"})) s->get("ratios", c.split.ratios);
  if (auto s = root.sub("eval", {"baseline_trials", "baseline_law", "baseline_seed", "micro",
                                 "avg_selected_counts_no_answer"})) {
    s->get("baseline_trials", c.baseline_trials);
    std::string law(subset_law_name(c.baseline_law));
    s->get("baseline_law", law);
    const auto parsed = subset_law_from_name(law);
    if (!parsed) bad("bad value for 'eval.baseline_law': " + law);
    c.baseline_law = *parsed;
    s->get("baseline_seed", c.baseline_seed);
    s->get("micro", c.metrics.micro);
    s->get("avg_selected_counts_no_answer", c.metrics.avg_selected_counts_no_answer);
  }
  c.forge.engine = c.engine;

  if (c.seeds < 1) bad("seeds must be >= 1");
  if (c.jobs < 1) bad("jobs must be >= 1");
  if (c.figure_retries < 0) bad("renderer.figure_retries must be >= 0");
  if (c.engine.max_level < 1) bad("engine.max_level must be >= 1");
  if (!(c.renderer.size > 2 * c.renderer.margin) || !(c.renderer.font > 0) || c.renderer.label_passes < 0)
    bad("renderer: size must exceed twice the margin and font must be positive");
  validate(c.sampler);
  validate(c.forge);
  validate(c.split);
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  try {
    return parse_pipeline_config(Json::parse(in, nullptr, true, true));
  } catch (const Json::parse_error& e) {
    bad(path.string() + ": " + e.what());
  }
}

Json to_json(const PipelineConfig& c) {
  return {{"seed", c.seed},
          {"seeds", c.seeds},
          {"out", c.out.string()},
          {"jobs", c.jobs},
          {"max_problems", c.max_problems ? Json(*c.max_problems) : Json(nullptr)},
          {"sampler",
           {{"max_depth", c.sampler.max_depth},
            {"branching_schedule", c.sampler.branching_schedule},
            {"templates_per_layer", c.sampler.templates_per_layer},
            {"rejection_budget", c.sampler.rejection_budget},
            {"max_points", c.sampler.max_points}}},
          {"engine", {{"max_level", c.engine.max_level}, {"algebra", c.engine.algebra}, {"max_facts", c.engine.max_facts}}},
          {"forge",
           {{"weights", c.forge.difficulty.weights},
            {"zscore", c.forge.difficulty.zscore},
            {"key_dist", c.forge.key_dist},
            {"max_attempts", c.forge.max_attempts},
            {"distractor_bases", c.forge.distractor_bases},
            {"check", c.check_problems}}},
          {"renderer",
           {{"size", c.renderer.size},
            {"margin", c.renderer.margin},
            {"font", c.renderer.font},
            {"label_passes", c.renderer.label_passes},
            {"figure_retries", c.figure_retries}}},
          {"split", {{"ratios", c.split.ratios}}},
          {"eval",
           {{"baseline_trials", c.baseline_trials},
            {"baseline_law", subset_law_name(c.baseline_law)},
            {"baseline_seed", c.baseline_seed},
            {"micro", c.metrics.micro},
            {"avg_selected_counts_no_answer", c.metrics.avg_selected_counts_no_answer}}}};
}

}  // namespace geoforge
