#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "geoforge/common/error.hpp"
#include "geoforge/pipeline/pipeline.hpp"

namespace geoforge {

namespace {

namespace fs = std::filesystem;

constexpr int kPoolSchemaVersion = 1;
constexpr const char* kPoolSchema = "geoforge-pool";
constexpr const char* kClosureSchema = "geoforge-closure";
constexpr const char* kRejectSchema = "geoforge-reject";

class Timer {
public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// Runs f(i) for i in [begin, end) on up to `jobs` threads. The first exception
// is rethrown after all workers stop.
template <typename F>
void parallel_for(std::size_t begin, std::size_t end, int jobs, F&& f) {
  if (jobs <= 1 || end - begin <= 1) {
    for (std::size_t i = begin; i < end; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{begin};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i; !stop && (i = next.fetch_add(1)) < end;) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  const auto width = std::min<std::size_t>(static_cast<std::size_t>(jobs), end - begin);
  for (std::size_t t = 0; t < width; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

class Ticker {
public:
  Ticker(const Progress& p, std::string stage, std::size_t total) : p_(p), stage_(std::move(stage)), total_(total) {}
  void tick() {
    if (!p_) return;
    std::lock_guard lock(mu_);
    p_(stage_, ++done_, total_);
  }

private:
  const Progress& p_;
  std::string stage_;
  std::size_t total_;
  std::size_t done_ = 0;
  std::mutex mu_;
};

struct Reject {
  std::string id;
  std::string reason;
};

void write_rejects(const PipelineConfig& c, const std::string& stage, const std::vector<Reject>& rejects) {
  JsonlWriter w(c.out / artifact::rejects_dir / (stage + ".jsonl"), kRejectSchema, 1);
  for (const auto& r : rejects) w.write({{"id", r.id}, {"stage", stage}, {"reason", r.reason}});
  w.close();
}

// Data-dependent failures become rejections; anything else stops the stage.
bool is_rejection(const Error& e) {
  switch (e.code()) {
    case ErrorCode::UnsoundDerivation:
    case ErrorCode::InvalidRule:
    case ErrorCode::InvalidConfig:
    case ErrorCode::Io:
    case ErrorCode::MissingTemplate:
      return false;
    default:
      return true;
  }
}

template <typename F>
std::optional<std::string> guarded(const std::string& stage, const std::string& id, F&& f) {
  try {
    f();
    return std::nullopt;
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    if (is_rejection(e)) return std::string(e.what());
    throw StageError(e.code(), stage, id, e.what());
  } catch (const std::overflow_error& e) {
    return std::string("overflow: ") + e.what();
  } catch (const std::exception& e) {
    throw StageError(ErrorCode::Io, stage, id, e.what());
  }
}

Json closure_row(const std::string& id, const SaturationState& st) {
  return {{"id", id},
          {"facts", st.facts.size()},
          {"derived", st.facts.size() - st.premise_count()},
          {"level", st.level},
          {"fixpoint", st.fixpoint},
          {"truncated", st.truncated}};
}

std::vector<CorpusRecord> read_records(const fs::path& path, const std::string& stage) {
  try {
    return read_corpus(path);
  } catch (const Error& e) {
    throw StageError(e.code(), stage, "", e.what());
  }
}

}  // namespace

Json to_json(const PoolEntry& e) {
  return {{"id", e.id},
          {"premise_dsl", serialize(e.premise)},
          {"depth", e.depth},
          {"seed", e.seed},
          {"complete", e.complete},
          {"path", e.path}};
}

PoolEntry pool_entry_from_json(const Json& j) {
  PoolEntry e;
  e.id = j.at("id").get<std::string>();
  e.premise = parse_premise(j.at("premise_dsl").get<std::string>());
  e.depth = j.at("depth").get<int>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.complete = j.at("complete").get<bool>();
  e.path = j.at("path").get<std::vector<int>>();
  return e;
}

std::vector<PoolEntry> read_pool(const fs::path& path) {
  std::vector<PoolEntry> out;
  read_jsonl(path, kPoolSchema, kPoolSchemaVersion, [&](const Json& j, int) { out.push_back(pool_entry_from_json(j)); });
  return out;
}

std::vector<std::uint64_t> figure_seeds(std::uint64_t diagram_seed, int retries) {
  std::vector<std::uint64_t> out{diagram_seed};
  for (int k = 1; k <= retries; ++k) out.push_back(derive_seed(diagram_seed, static_cast<std::uint64_t>(k)));
  return out;
}

StageReport stage_sample(const PipelineConfig& c, const Progress& progress) {
  Timer timer;
  const auto n = static_cast<std::size_t>(c.seeds);
  std::vector<std::vector<PoolEntry>> pools(n);
  std::vector<std::optional<std::string>> failed(n);
  Ticker ticker(progress, "sample", n);
  parallel_for(0, n, c.jobs, [&](std::size_t i) {
    SamplerConfig sc = c.sampler;
    sc.seed = c.seed + i;
    failed[i] = guarded("sample", "seed " + std::to_string(sc.seed), [&] { pools[i] = sample_pool(sc).premises; });
    ticker.tick();
  });
  StageReport r{"sample", n, 0, 0, 0};
  std::vector<Reject> rejects;
  JsonlWriter w(c.out / artifact::pool, kPoolSchema, kPoolSchemaVersion);
  for (std::size_t i = 0; i < n; ++i) {
    if (failed[i]) rejects.push_back({"seed-" + std::to_string(c.seed + i), *failed[i]});
    for (const auto& e : pools[i]) w.write(to_json(e)), ++r.output;
  }
  w.close();
  write_rejects(c, "sample", rejects);
  r.rejected = rejects.size();
  r.seconds = timer.seconds();
  return r;
}

StageReport stage_saturate(const PipelineConfig& c, const Progress& progress) {
  Timer timer;
  const auto pool = read_pool(c.out / artifact::pool);
  std::vector<std::optional<Json>> rows(pool.size());
  std::vector<std::optional<std::string>> failed(pool.size());
  Ticker ticker(progress, "saturate", pool.size());
  parallel_for(0, pool.size(), c.jobs, [&](std::size_t i) {
    const auto& e = pool[i];
    failed[i] = guarded("saturate", e.id, [&] {
      const Diagram d = instantiate(e.premise, e.seed);
      rows[i] = closure_row(e.id, saturate(e.premise, d, default_rules(), c.engine));
    });
    ticker.tick();
  });
  StageReport r{"saturate", pool.size(), 0, 0, 0};
  std::vector<Reject> rejects;
  JsonlWriter w(c.out / artifact::closures, kClosureSchema, 1);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (failed[i]) rejects.push_back({pool[i].id, *failed[i]});
    if (rows[i]) w.write(*rows[i]), ++r.output;
  }
  w.close();
  write_rejects(c, "saturate", rejects);
  r.rejected = rejects.size();
  r.seconds = timer.seconds();
  return r;
}

StageReport stage_assemble(const PipelineConfig& c, const Progress& progress) {
  Timer timer;
  const auto pool = read_pool(c.out / artifact::pool);
  const RuleSet& rules = default_rules();
  std::vector<std::optional<Json>> closures(pool.size());
  std::vector<std::optional<Problem>> problems(pool.size());
  std::vector<std::optional<std::string>> failed(pool.size());
  Ticker ticker(progress, "assemble", pool.size());
  parallel_for(0, pool.size(), c.jobs, [&](std::size_t i) {
    const auto& e = pool[i];
    failed[i] = guarded("assemble", e.id, [&] {
      const Diagram d = instantiate(e.premise, e.seed);
      const SaturationState st = saturate(e.premise, d, rules, c.engine);
      closures[i] = closure_row(e.id, st);
      Problem p = assemble_problem(e.id, e.premise, d, st, rules, c.forge);
      if (c.check_problems) {
        const std::string why = check_problem(p, rules, c.engine);
        if (!why.empty()) throw Error(ErrorCode::NoFalsifiableVariant, "check failed: " + why);
      }
      problems[i] = std::move(p);
    });
    ticker.tick();
  });

  std::vector<Problem> kept;
  std::vector<Reject> rejects;
  JsonlWriter cw(c.out / artifact::closures, kClosureSchema, 1);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (closures[i]) cw.write(*closures[i]);
    if (failed[i]) rejects.push_back({pool[i].id, *failed[i]});
    if (problems[i]) kept.push_back(std::move(*problems[i]));
  }
  cw.close();
  score_batch(kept, c.forge.difficulty);

  std::vector<CorpusRecord> records(kept.size());
  parallel_for(0, kept.size(), c.jobs, [&](std::size_t i) {
    try {
      records[i] = make_record(kept[i], "", 0);
    } catch (const Error& e) {
      throw StageError(e.code(), "assemble", kept[i].id, e.what());
    }
  });
  write_corpus(records, c.out / artifact::problems);
  write_rejects(c, "assemble", rejects);
  StageReport r{"assemble", pool.size(), records.size(), rejects.size(), timer.seconds()};
  return r;
}

StageReport stage_render(const PipelineConfig& c, const Progress& progress) {
  Timer timer;
  auto records = read_records(c.out / artifact::problems, "render");
  const fs::path figures = c.out / artifact::figures_dir;
  fs::remove_all(figures);
  fs::create_directories(figures);

  const std::size_t cap = c.max_problems.value_or(records.size());
  std::vector<std::optional<std::string>> svgs(records.size());
  std::vector<std::string> failures(records.size());
  Ticker ticker(progress, "render", std::min(cap, records.size()));
  std::size_t kept = 0, next = 0;
  const std::size_t batch = static_cast<std::size_t>(c.jobs) * 8;
  // Batches keep the cap deterministic under parallel rendering.
  while (next < records.size() && kept < cap) {
    const std::size_t end = std::min(records.size(), next + batch);
    parallel_for(next, end, c.jobs, [&](std::size_t i) {
      auto& rec = records[i];
      const auto why = guarded("render", rec.id, [&] {
        const Problem p = problem_from_record(rec);
        std::string last;
        for (std::uint64_t seed : figure_seeds(rec.diagram_seed, c.figure_retries)) {
          Diagram d;
          try {
            d = instantiate(p.premise, seed);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateAfterRetries) throw;
            last = e.what();
            continue;
          }
          std::string svg = render_diagram(p, d, c.renderer);
          const auto report = verify_render(p, d, svg, c.renderer);
          if (report.ok()) {
            rec.figure_seed = seed;
            rec.figure_path = std::string(artifact::figures_dir) + "/" + rec.id + ".svg";
            svgs[i] = std::move(svg);
            return;
          }
          last = report.violations.empty() ? "verification failed"
                                           : report.violations.front().check + ": " + report.violations.front().detail;
        }
        failures[i] = "no figure passed verification (" + last + ")";
      });
      if (why) failures[i] = *why;
    });
    for (std::size_t i = next; i < end; ++i) {
      if (svgs[i] && kept < cap) {
        ++kept;
        ticker.tick();
      } else {
        svgs[i].reset();
      }
    }
    next = end;
  }

  std::vector<CorpusRecord> out;
  std::vector<Reject> rejects;
  for (std::size_t i = 0; i < next; ++i) {
    if (!svgs[i]) {
      if (!failures[i].empty()) rejects.push_back({records[i].id, failures[i]});
      continue;
    }
    std::ofstream f(c.out / records[i].figure_path, std::ios::binary | std::ios::trunc);
    f << *svgs[i];
    if (!f) throw StageError(ErrorCode::Io, "render", records[i].id, "cannot write figure");
    out.push_back(std::move(records[i]));
  }
  write_corpus(out, c.out / artifact::rendered);
  write_rejects(c, "render", rejects);
  return {"render", next, out.size(), rejects.size(), timer.seconds()};
}

StageReport stage_split(const PipelineConfig& c) {
  Timer timer;
  auto records = read_records(c.out / artifact::rendered, "split");
  stratify(records, c.split);
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  write_corpus(records, c.out / artifact::corpus);
  return {"split", records.size(), records.size(), 0, timer.seconds()};
}

StageReport stage_stats(const PipelineConfig& c) {
  Timer timer;
  const auto records = read_records(c.out / artifact::corpus, "stats");
  std::ofstream f(c.out / artifact::stats, std::ios::binary | std::ios::trunc);
  f << to_json(corpus_stats(records)).dump(2) << '\n';
  if (!f) throw StageError(ErrorCode::Io, "stats", "", "cannot write " + (c.out / artifact::stats).string());
  return {"stats", records.size(), 1, 0, timer.seconds()};
}

StageReport stage_baseline(const PipelineConfig& c) {
  Timer timer;
  const auto records = read_records(c.out / artifact::corpus, "baseline");
  Json j{{"trials", c.baseline_trials}, {"seed", c.baseline_seed}, {"default_law", subset_law_name(c.baseline_law)}};
  if (c.baseline_trials > 0 && !records.empty()) {
    const auto gold = gold_items(records);
    for (SubsetLaw law : {SubsetLaw::uniform16, SubsetLaw::uniform_nonempty, SubsetLaw::empty})
      j["laws"][std::string(subset_law_name(law))] =
          to_json(random_baseline(gold, c.baseline_trials, c.baseline_seed, law, c.metrics));
  }
  std::ofstream f(c.out / artifact::baseline, std::ios::binary | std::ios::trunc);
  f << j.dump(2) << '\n';
  if (!f) throw StageError(ErrorCode::Io, "baseline", "", "cannot write baseline report");
  return {"baseline", records.size(), 1, 0, timer.seconds()};
}

std::vector<StageReport> run_pipeline(const PipelineConfig& c, const Progress& progress) {
  fs::create_directories(c.out);
  {
    std::ofstream f(c.out / artifact::config, std::ios::binary | std::ios::trunc);
    Json j = to_json(c);
    j.erase("out");
    f << j.dump(2) << '\n';
  }
  std::vector<StageReport> reports;
  reports.push_back(stage_sample(c, progress));
  reports.push_back(stage_assemble(c, progress));
  reports.push_back(stage_render(c, progress));
  reports.push_back(stage_split(c));
  reports.push_back(stage_stats(c));
  reports.push_back(stage_baseline(c));
  return reports;
}

}  // namespace geoforge
