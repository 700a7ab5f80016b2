#include "geoforge/sampler/sampler.hpp"

#include <algorithm>
#include <set>

#include "geoforge/common/error.hpp"
#include "geoforge/common/rng.hpp"
#include "geoforge/kernel/catalog.hpp"
#include "geoforge/kernel/diagram.hpp"

namespace geoforge {

namespace {

std::vector<const TemplateInfo*> templates_of(TemplateKind kind) {
  std::vector<const TemplateInfo*> out;
  for (const auto& t : catalog())
    if (t.kind == kind) out.push_back(&t);
  return out;
}

const std::vector<const TemplateInfo*>& seeds() {
  static const auto v = templates_of(TemplateKind::Seed);
  return v;
}

Clause draw_clause(const TemplateInfo& t, const std::vector<std::string>& names, Rng& rng) {
  Clause c;
  c.relation = std::string(t.name);
  c.explicit_target = true;
  std::vector<std::size_t> idx(names.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (int k = 0; k < t.arity; ++k) {
    const std::size_t j = static_cast<std::size_t>(k) + rng.below(idx.size() - static_cast<std::size_t>(k));
    std::swap(idx[static_cast<std::size_t>(k)], idx[j]);
    c.args.push_back({names[idx[static_cast<std::size_t>(k)]]});
  }
  for (int k = 0; k < t.params; ++k) c.params.push_back(static_cast<double>(15 * (1 + rng.below(11))));
  return c;
}

std::optional<Construction> draw_construction(const Premise& p, const SamplerConfig& cfg, int layer, Rng& rng) {
  std::vector<std::string> names = p.point_names();
  // Leave one point of room for every later layer.
  const int room = cfg.max_points - static_cast<int>(names.size()) - (cfg.max_depth - layer - 1);
  if (static_cast<int>(names.size()) >= cfg.max_points) return std::nullopt;
  std::vector<const TemplateInfo*> pool;
  for (const auto& t : catalog()) {
    if (t.kind == TemplateKind::Seed) continue;
    if (t.arity > static_cast<int>(names.size())) continue;
    if (t.new_points > std::max(room, 1)) continue;
    pool.push_back(&t);
  }
  if (pool.empty()) return std::nullopt;
  const TemplateInfo& first = *pool[rng.below(pool.size())];
  Construction c;
  auto used = names;
  for (int k = 0; k < first.new_points; ++k) {
    c.new_points.push_back({fresh_point_name(used)});
    used.push_back(c.new_points.back().name);
  }
  c.clauses.push_back(draw_clause(first, names, rng));
  if (first.kind == TemplateKind::Locus && cfg.templates_per_layer >= 2 && rng.coin(0.85)) {
    std::vector<const TemplateInfo*> loci;
    for (const auto* t : pool)
      if (t->kind == TemplateKind::Locus) loci.push_back(t);
    c.clauses.push_back(draw_clause(*loci[rng.below(loci.size())], names, rng));
    if (c.clauses[0] == c.clauses[1]) c.clauses.pop_back();
  }
  return c;
}

bool instantiable(const Premise& p, std::uint64_t seed) {
  try {
    validate_premise(p);
    instantiate(p, seed);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::uint64_t path_stream(std::uint64_t seed, const std::vector<int>& path) {
  std::uint64_t h = derive_seed(seed, 0x5a3b1);
  for (int b : path) h = derive_seed(h, static_cast<std::uint64_t>(b) + 1);
  return h;
}

}  // namespace

std::vector<int> default_schedule(int max_depth) {
  std::vector<int> s;
  int b = 8;
  for (int i = 0; i < max_depth; ++i) {
    s.push_back(b);
    b = std::max(1, b / 2);
  }
  return s;
}

void validate(const SamplerConfig& c) {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, "sampler: " + m); };
  if (c.max_depth < 1) bad("max_depth must be >= 1");
  if (!c.branching_schedule.empty()) {
    if (static_cast<int>(c.branching_schedule.size()) != c.max_depth) bad("schedule length must equal max_depth");
    for (std::size_t i = 0; i < c.branching_schedule.size(); ++i) {
      if (c.branching_schedule[i] < 1) bad("schedule entries must be positive");
      if (i && c.branching_schedule[i] > c.branching_schedule[i - 1]) bad("schedule must be non-increasing");
    }
  }
  if (c.templates_per_layer != 1 && c.templates_per_layer != 2) bad("templates_per_layer must be 1 or 2");
  if (c.rejection_budget < 1) bad("rejection_budget must be >= 1");
  if (c.max_points < 3 || c.max_points > 64) bad("max_points must be in [3, 64]");
}

std::vector<Premise> sample_layer(const Premise& partial, const SamplerConfig& config, int layer,
                                  std::uint64_t stream) {
  const auto schedule = config.branching_schedule.empty() ? default_schedule(config.max_depth)
                                                          : config.branching_schedule;
  if (layer < 0 || layer >= static_cast<int>(schedule.size()))
    throw Error(ErrorCode::InvalidConfig, "layer " + std::to_string(layer) + " outside the schedule");
  const auto want = static_cast<std::size_t>(schedule[static_cast<std::size_t>(layer)]);
  Rng rng(stream);
  std::vector<Premise> out;
  std::set<std::string> seen;
  for (int attempt = 0; attempt < config.rejection_budget && out.size() < want; ++attempt) {
    auto c = draw_construction(partial, config, layer, rng);
    if (!c) break;
    Premise p = partial;
    p.constructions.push_back(std::move(*c));
    std::string key = serialize(p);
    if (seen.count(key) || !instantiable(p, config.seed)) continue;
    seen.insert(std::move(key));
    out.push_back(std::move(p));
  }
  if (out.empty())
    throw Error(ErrorCode::NoValidExtension,
                "no valid extension of '" + serialize(partial) + "' at layer " + std::to_string(layer));
  return out;
}

Premise seed_premise(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x5eed));
  const TemplateInfo& t = *seeds()[rng.below(seeds().size())];
  Construction c;
  std::vector<std::string> used;
  for (int k = 0; k < t.new_points; ++k) {
    c.new_points.push_back({fresh_point_name(used)});
    used.push_back(c.new_points.back().name);
  }
  Clause cl;
  cl.relation = std::string(t.name);
  c.clauses.push_back(cl);
  Premise p;
  p.constructions.push_back(std::move(c));
  return p;
}

std::string pool_id(std::uint64_t seed, const std::vector<int>& path) {
  std::string id = "s" + std::to_string(seed);
  for (std::size_t i = 0; i < path.size(); ++i) id += (i ? "." : "-") + std::to_string(path[i]);
  return id;
}

PremisePool sample_pool(const SamplerConfig& config) {
  validate(config);
  PremisePool pool;
  PoolEntry root;
  root.premise = seed_premise(config.seed);
  root.seed = config.seed;
  if (!instantiable(root.premise, config.seed))
    throw Error(ErrorCode::EmptyPool, "seed construction '" + serialize(root.premise) + "' does not instantiate");
  std::vector<PoolEntry> frontier{root};
  for (int layer = 0; layer < config.max_depth && !frontier.empty(); ++layer) {
    std::vector<PoolEntry> next;
    for (auto& e : frontier) {
      std::vector<Premise> kids;
      try {
        kids = sample_layer(e.premise, config, layer, path_stream(config.seed, e.path));
      } catch (const Error& err) {
        if (err.code() != ErrorCode::NoValidExtension) throw;
        e.complete = false;
        e.id = pool_id(config.seed, e.path);
        pool.premises.push_back(std::move(e));
        continue;
      }
      for (std::size_t i = 0; i < kids.size(); ++i) {
        PoolEntry k;
        k.premise = std::move(kids[i]);
        k.depth = layer + 1;
        k.seed = config.seed;
        k.path = e.path;
        k.path.push_back(static_cast<int>(i));
        next.push_back(std::move(k));
      }
    }
    frontier = std::move(next);
  }
  for (auto& e : frontier) {
    e.id = pool_id(config.seed, e.path);
    pool.premises.push_back(std::move(e));
  }
  std::sort(pool.premises.begin(), pool.premises.end(),
            [](const PoolEntry& a, const PoolEntry& b) { return a.path < b.path; });
  return pool;
}

}  // namespace geoforge
