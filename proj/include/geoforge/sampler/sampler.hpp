#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoforge/kernel/premise.hpp"

namespace geoforge {

struct SamplerConfig {
  int max_depth = 8;
  std::vector<int> branching_schedule;  // per layer, non-increasing; empty means default_schedule(max_depth)
  std::uint64_t seed = 0;
  int templates_per_layer = 2;  // 2 allows a layer to intersect two locus clauses
  int rejection_budget = 48;    // candidates tried per layer before giving up
  int max_points = 14;          // templates that would exceed this are not drawn
};

// Halving from 8 with floor 1: 8, 4, 2, 1, 1, ...
std::vector<int> default_schedule(int max_depth);

// Throws Error(InvalidConfig) naming the violated invariant.
void validate(const SamplerConfig& config);

// Extensions of `partial` by one construction; at most schedule[layer] of them,
// all distinct and all instantiable with `config.seed`. The random stream is
// fixed by `stream`. Throws Error(NoValidExtension).
std::vector<Premise> sample_layer(const Premise& partial, const SamplerConfig& config, int layer,
                                  std::uint64_t stream);

struct PoolEntry {
  std::string id;
  Premise premise;
  int depth = 0;          // layers added after the seed construction
  std::uint64_t seed = 0;  // instantiation seed
  bool complete = true;   // false when extension stopped before max_depth
  std::vector<int> path;  // branch index taken at each layer
};

struct PremisePool {
  std::vector<PoolEntry> premises;  // ordered by path
};

// A random polygon/segment seed construction.
Premise seed_premise(std::uint64_t seed);

// Breadth-first expansion for one seed. Throws Error(EmptyPool) if the seed
// construction cannot be instantiated.
PremisePool sample_pool(const SamplerConfig& config);

std::string pool_id(std::uint64_t seed, const std::vector<int>& path);

}  // namespace geoforge
