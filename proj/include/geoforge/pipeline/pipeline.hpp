#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geoforge/dataset/corpus.hpp"
#include "geoforge/eval/metrics.hpp"
#include "geoforge/forge/forge.hpp"
#include "geoforge/renderer/render.hpp"
#include "geoforge/sampler/sampler.hpp"

namespace geoforge {

struct PipelineConfig {
  std::uint64_t seed = 1;  // sampler seeds are seed, seed+1, ..., seed+seeds-1
  int seeds = 20;
  std::filesystem::path out = "out";
  int jobs = 1;
  SamplerConfig sampler;  // its seed field is ignored
  EngineConfig engine;
  ForgeConfig forge;      // forge.engine mirrors engine
  bool check_problems = true;
  std::optional<std::size_t> max_problems;  // cap on rendered problems, in pool order
  RenderConfig renderer;
  int figure_retries = 3;
  SplitSpec split;
  std::size_t baseline_trials = 100000;
  SubsetLaw baseline_law = SubsetLaw::uniform_nonempty;
  std::uint64_t baseline_seed = 0;
  MetricsConfig metrics;
};

// Sections: seed, seeds, out, jobs, sampler, engine, forge, renderer, split,
// eval. Throws Error(InvalidConfig) naming any unknown key or bad value.
PipelineConfig parse_pipeline_config(const Json& j);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
Json to_json(const PipelineConfig& c);

// Artifact names inside the output directory.
namespace artifact {
inline constexpr const char* pool = "pool.jsonl";
inline constexpr const char* closures = "closures.jsonl";
inline constexpr const char* problems = "problems.jsonl";
inline constexpr const char* rendered = "rendered.jsonl";
inline constexpr const char* corpus = "corpus.jsonl";
inline constexpr const char* rejects_dir = "rejects";
inline constexpr const char* figures_dir = "figures";
inline constexpr const char* stats = "stats.json";
inline constexpr const char* baseline = "baseline.json";
inline constexpr const char* config = "config.json";
}  // namespace artifact

// Stage failure that is not a per-item rejection.
class StageError : public Error {
public:
  StageError(ErrorCode code, std::string stage, std::string id, const std::string& what)
      : Error(code, "stage " + stage + (id.empty() ? "" : ", id " + id) + ": " + what),
        stage_(std::move(stage)),
        id_(std::move(id)) {}
  const std::string& stage() const { return stage_; }
  const std::string& id() const { return id_; }

private:
  std::string stage_, id_;
};

struct StageReport {
  std::string stage;
  std::size_t input = 0;
  std::size_t output = 0;
  std::size_t rejected = 0;
  double seconds = 0.0;
};

using Progress = std::function<void(const std::string& stage, std::size_t done, std::size_t total)>;

// Each stage reads its input artifact from config.out and writes its own, so
// any stage can be rerun alone.
StageReport stage_sample(const PipelineConfig& config, const Progress& progress = {});
StageReport stage_saturate(const PipelineConfig& config, const Progress& progress = {});
// Saturates, assembles, refines and (with check_problems) re-checks every
// problem, then scores the batch. Also writes the closure summaries.
StageReport stage_assemble(const PipelineConfig& config, const Progress& progress = {});
// Draws and verifies figures, retrying figure seeds; drops problems whose
// figures all fail.
StageReport stage_render(const PipelineConfig& config, const Progress& progress = {});
StageReport stage_split(const PipelineConfig& config);
StageReport stage_stats(const PipelineConfig& config);
StageReport stage_baseline(const PipelineConfig& config);

std::vector<StageReport> run_pipeline(const PipelineConfig& config, const Progress& progress = {});

// Pool entries stored in pool.jsonl.
Json to_json(const PoolEntry& e);
PoolEntry pool_entry_from_json(const Json& j);
std::vector<PoolEntry> read_pool(const std::filesystem::path& path);

// Figure seed candidates for a problem: diagram_seed, then derive_seed(diagram_seed, k).
std::vector<std::uint64_t> figure_seeds(std::uint64_t diagram_seed, int retries);

}  // namespace geoforge
