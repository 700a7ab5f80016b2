#include <gtest/gtest.h>

#include <set>

#include "geoforge/common/error.hpp"
#include "geoforge/kernel/diagram.hpp"
#include "geoforge/sampler/sampler.hpp"

using namespace geoforge;

namespace {

SamplerConfig config(std::vector<int> schedule, std::uint64_t seed = 0) {
  SamplerConfig c;
  c.max_depth = static_cast<int>(schedule.size());
  c.branching_schedule = std::move(schedule);
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Sampler, DefaultScheduleHalves) {
  EXPECT_EQ(default_schedule(8), (std::vector<int>{8, 4, 2, 1, 1, 1, 1, 1}));
  EXPECT_EQ(default_schedule(2), (std::vector<int>{8, 4}));
}

TEST(Sampler, RejectsBadConfig) {
  EXPECT_THROW(validate(config({2, 3})), Error);  // increasing
  EXPECT_THROW(validate(config({2, 0})), Error);
  auto c = config({2, 1});
  c.max_depth = 3;
  EXPECT_THROW(validate(c), Error);
  c = config({1});
  c.templates_per_layer = 3;
  EXPECT_THROW(validate(c), Error);
}

TEST(Sampler, LayerGivesDistinctValidExtensions) {
  const auto base = parse_premise("a b c = triangle");
  const auto kids = sample_layer(base, config({2, 1}), 0, 11);
  ASSERT_EQ(kids.size(), 2u);
  EXPECT_NE(serialize(kids[0]), serialize(kids[1]));
  for (const auto& k : kids) {
    ASSERT_EQ(k.constructions.size(), 2u);
    EXPECT_EQ(k.constructions[0], base.constructions[0]);
    EXPECT_NO_THROW(instantiate(k, 0));
  }
}

TEST(Sampler, InvalidPairIsNeverEmitted) {
  EXPECT_THROW(validate_premise(parse_premise("a b c = triangle; x = midpoint a b, midpoint a c")), Error);
}

TEST(Sampler, SingleChainSchedule) {
  const auto pool = sample_pool(config({1, 1, 1}, 5));
  EXPECT_EQ(pool.premises.size(), 1u);
}

TEST(Sampler, DepthOneIsSeedPlusOneLayer) {
  const auto pool = sample_pool(config({1}, 2));
  ASSERT_EQ(pool.premises.size(), 1u);
  EXPECT_EQ(pool.premises[0].premise.constructions.size(), 2u);
  EXPECT_EQ(pool.premises[0].depth, 1);
}

TEST(Sampler, PoolBoundAndValidity) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto pool = sample_pool(config({3, 2}, seed));
    EXPECT_LE(pool.premises.size(), 6u);
    EXPECT_FALSE(pool.premises.empty());
    std::set<std::string> ids;
    for (const auto& e : pool.premises) {
      EXPECT_TRUE(ids.insert(e.id).second);
      EXPECT_NO_THROW(instantiate(e.premise, e.seed));
    }
  }
}

TEST(Sampler, Deterministic) {
  const auto a = sample_pool(config({4, 2, 1}, 9));
  const auto b = sample_pool(config({4, 2, 1}, 9));
  ASSERT_EQ(a.premises.size(), b.premises.size());
  for (std::size_t i = 0; i < a.premises.size(); ++i) {
    EXPECT_EQ(a.premises[i].id, b.premises[i].id);
    EXPECT_EQ(serialize(a.premises[i].premise), serialize(b.premises[i].premise));
  }
}

TEST(Sampler, PrefixesValidAndGrowing) {
  SamplerConfig c;
  c.seed = 3;
  for (const auto& e : sample_pool(c).premises) {
    std::set<std::string> names;
    Premise prefix;
    std::size_t prev = 0;
    for (const auto& con : e.premise.constructions) {
      for (const auto& p : con.new_points) EXPECT_TRUE(names.insert(p.name).second) << e.id;
      prefix.constructions.push_back(con);
      EXPECT_NO_THROW(validate_premise(prefix));
      EXPECT_NO_THROW(instantiate(prefix, e.seed)) << serialize(prefix);
      EXPECT_EQ(prefix.point_count(), prev + con.new_points.size());
      prev = prefix.point_count();
    }
    EXPECT_LE(e.premise.point_count(), static_cast<std::size_t>(c.max_points));
  }
}

TEST(Sampler, DefaultScheduleReachesFullDepth) {
  std::size_t total = 0, full = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SamplerConfig c;
    c.seed = seed;
    for (const auto& e : sample_pool(c).premises) {
      ++total;
      full += e.depth == 8 && e.complete;
    }
  }
  EXPECT_GE(static_cast<double>(full), 0.95 * static_cast<double>(total));
}
