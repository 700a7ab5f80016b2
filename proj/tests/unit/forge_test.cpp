#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "geoforge/common/error.hpp"
#include "geoforge/forge/forge.hpp"
#include "geoforge/kernel/check.hpp"
#include "geoforge/kernel/premise_facts.hpp"
#include "geoforge/sampler/sampler.hpp"

using namespace geoforge;

namespace {

struct Setup {
  Premise premise;
  Diagram diagram;
  SaturationState closure;
};

Setup saturated(const std::string& text, std::uint64_t seed = 1) {
  Setup s{parse_premise(text), {}, {}};
  s.diagram = instantiate(s.premise, seed);
  s.closure = saturate(s.premise, s.diagram, default_rules());
  return s;
}

Fact fact_of(const Premise& p, const std::string& text) {
  return canonical(parse_fact(text, [&](std::string_view n) { return p.index_of(n); }));
}

std::vector<Diagram> diagrams_of(const Premise& p, std::uint64_t seed) {
  std::vector<Diagram> out;
  for (std::uint64_t k = 1; out.size() < 3; ++k) out.push_back(instantiate(p, derive_seed(seed, k)));
  return out;
}

Diagram diagram_at(std::vector<Vec2> coords) {
  Diagram d;
  d.coords = std::move(coords);
  return d;
}

// Mean / population sd ranking recomputed from raw indicators.
std::vector<double> reference_scores(const std::vector<DifficultyIndicators>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::vector<double>> cols(5, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    cols[0][i] = xs[i].x1;
    cols[1][i] = xs[i].x2;
    cols[2][i] = xs[i].x3;
    cols[3][i] = xs[i].x4;
    cols[4][i] = xs[i].x5;
  }
  std::vector<double> out(n, 0.0);
  for (const auto& col : cols) {
    double m = 0;
    for (double v : col) m += v;
    m /= static_cast<double>(n);
    double var = 0;
    for (double v : col) var += (v - m) * (v - m);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) out[i] += sd > 0 ? 0.2 * (col[i] - m) / sd : 0.0;
  }
  return out;
}

const char* kMidline = "a b c = triangle a b c; e = midpoint e a b; f = midpoint f a c";

}  // namespace

TEST(Difficulty, ZeroWeightsScoreZero) {
  DifficultyConfig c;
  c.weights = {0, 0, 0, 0, 0};
  c.zscore = false;
  EXPECT_EQ(score_difficulty({40, 6, 9, 5, 17}, c), 0.0);
}

TEST(Difficulty, SingleIndicatorProjection) {
  DifficultyConfig c;
  c.weights = {0, 0, 0, 0, 1};
  c.zscore = false;
  EXPECT_DOUBLE_EQ(score_difficulty({40, 6, 9, 5, 16}, c), 16.0);
}

TEST(Difficulty, RejectsNegativeWeight) {
  DifficultyConfig c;
  c.weights = {0.2, -0.1, 0.3, 0.3, 0.3};
  EXPECT_THROW(validate(c), Error);
}

TEST(Difficulty, MonotoneInEachIndicator) {
  Rng rng(5);
  DifficultyConfig c;
  c.zscore = false;
  for (int t = 0; t < 500; ++t) {
    for (auto& w : c.weights) w = rng.uniform();
    DifficultyIndicators x{int(rng.below(60)), int(rng.below(12)), int(rng.below(15)), int(rng.below(9)),
                           int(rng.below(40))};
    const double base = score_difficulty(x, c);
    for (int i = 0; i < 5; ++i) {
      auto y = x;
      int* f[] = {&y.x1, &y.x2, &y.x3, &y.x4, &y.x5};
      *f[i] += 1 + static_cast<int>(rng.below(5));
      EXPECT_GE(score_difficulty(y, c), base);
    }
  }
}

TEST(Difficulty, BatchRanksMatchRecomputation) {
  Rng rng(9);
  std::vector<DifficultyIndicators> xs;
  for (int i = 0; i < 1000; ++i)
    xs.push_back({int(rng.below(80)), int(1 + rng.below(10)), int(3 + rng.below(12)), int(1 + rng.below(8)),
                  int(1 + rng.below(30))});
  const auto stats = indicator_stats(xs);
  const auto ref = reference_scores(xs);
  std::vector<std::size_t> a(xs.size()), b(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    a[i] = b[i] = i;
    EXPECT_NEAR(score_difficulty(xs[i], DifficultyConfig{}, &stats), ref[i], 1e-9);
  }
  std::stable_sort(a.begin(), a.end(), [&](auto i, auto j) {
    return score_difficulty(xs[i], DifficultyConfig{}, &stats) > score_difficulty(xs[j], DifficultyConfig{}, &stats);
  });
  std::stable_sort(b.begin(), b.end(), [&](auto i, auto j) { return ref[i] > ref[j]; });
  EXPECT_EQ(a, b);
}

TEST(Select, SingleConclusionClosure) {
  const Premise p = parse_premise(kMidline);
  SaturationState st;
  auto add = [&](const Fact& f, Dependency dep, int level) {
    st.index.emplace(f, static_cast<FactId>(st.facts.size()));
    st.facts.push_back({f, level, std::move(dep)});
  };
  add(fact_of(p, "midp e a b"), {}, 0);
  add(fact_of(p, "midp f a c"), {}, 0);
  add(fact_of(p, "para e f b c"), {DepKind::rule, 0, {0, 1}}, 1);
  const auto one = select_true_options(st, p, 1, DifficultyConfig{});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].statement.fact, fact_of(p, "para e f b c"));
  EXPECT_TRUE(one[0].truth);
  ASSERT_TRUE(one[0].trace);
  EXPECT_EQ(one[0].trace->proof_length, 1);
  EXPECT_THROW(select_true_options(st, p, 2, DifficultyConfig{}), Error);
}

TEST(Select, SingleConstructionFactsAreIneligible) {
  const Premise p = parse_premise(kMidline);
  SaturationState st;
  st.facts.push_back({fact_of(p, "midp e a b"), 0, {}});
  st.facts.push_back({fact_of(p, "coll a b e"), 1, {DepKind::rule, 0, {0}}});
  for (FactId i = 0; i < st.facts.size(); ++i) st.index.emplace(st.facts[i].fact, i);
  try {
    select_true_options(st, p, 1, DifficultyConfig{});
    FAIL() << "expected InsufficientConclusions";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientConclusions);
  }
}

TEST(Select, MidlineGivesDistinctNonEquivalentFacts) {
  const auto s = saturated(kMidline);
  const auto opts = select_true_options(s.closure, s.premise, 2, DifficultyConfig{});
  ASSERT_EQ(opts.size(), 2u);
  const auto va = variants(opts[0].statement.fact);
  for (const auto& t : variants(opts[1].statement.fact))
    EXPECT_TRUE(opts[0].statement.fact.pred != opts[1].statement.fact.pred ||
                std::find(va.begin(), va.end(), t) == va.end());
  for (const auto& o : opts) {
    EXPECT_TRUE(s.closure.contains(o.statement.fact));
    EXPECT_GE(o.trace->proof_length, 1);
  }
}

TEST(Select, TooFewEligibleThrows) {
  const auto s = saturated(kMidline);
  const auto ranked = rank_conclusions(s.closure, s.premise, DifficultyConfig{});
  ASSERT_GE(ranked.size(), 1u);
  for (std::size_t i = 1; i < ranked.size(); ++i) EXPECT_GE(ranked[i - 1].score, ranked[i].score);
  const auto p = parse_premise("a b c = triangle a b c; d = on_line d a b");
  const auto st = saturate(p, instantiate(p, 3), default_rules());
  EXPECT_THROW(select_true_options(st, p, 3, DifficultyConfig{}), Error);
}

TEST(Distractor, RatioPerturbationOfCong) {
  const auto s = saturated("a b = segment a b; m = midpoint m a b; c = on_bline c a b");
  const Fact base = fact_of(s.premise, "cong c a c b");
  ASSERT_TRUE(s.closure.contains(base));
  const auto ds = diagrams_of(s.premise, 17);
  const Option o = make_distractor(base, s.premise, s.closure, ds, Origin::ratio_perturbation);
  EXPECT_FALSE(o.truth);
  EXPECT_EQ(o.origin, Origin::ratio_perturbation);
  EXPECT_EQ(o.statement.fact.pred, Pred::cong);
  EXPECT_NE(o.statement.ratio, Rational(1));
  const auto& a = o.statement.fact.args;
  for (const auto& d : ds) {
    const double measured = dist(d.coords[a[0]], d.coords[a[1]]) / dist(d.coords[a[2]], d.coords[a[3]]);
    EXPECT_NEAR(measured, 1.0, 1e-9);
    EXPECT_GT(std::abs(std::log(measured) - std::log(o.statement.ratio.to_double())), kTolFalse);
    EXPECT_GT(statement_residual(o.statement, d), kTolFalse);
  }
}

TEST(Distractor, NegationOfParallelIsPerpendicular) {
  const auto s = saturated(kMidline);
  const Fact base = fact_of(s.premise, "para e f b c");
  const auto ds = diagrams_of(s.premise, 4);
  const Option o = make_distractor(base, s.premise, s.closure, ds, Origin::negation);
  EXPECT_EQ(o.statement.fact, fact_of(s.premise, "perp e f b c"));
  for (const auto& d : ds) EXPECT_GT(residual(o.statement.fact, d), kTolFalse);
}

TEST(Distractor, AccidentallyTrueNegationIsRejected) {
  const auto s = saturated("a b c d = trapezoid a b c d");
  const Fact base = fact_of(s.premise, "para a b c d");
  // AB perpendicular to CD on every supplied figure
  const std::vector<Diagram> ds(3, diagram_at({{0, 0}, {1, 0}, {0.5, 0.2}, {0.5, 1}}));
  try {
    make_distractor(base, s.premise, s.closure, ds, Origin::negation);
    FAIL() << "expected NoFalsifiableVariant";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoFalsifiableVariant);
  }
}

TEST(Distractor, SingleSubstitutionDetected) {
  EXPECT_TRUE(is_single_substitution(Fact(Pred::perp, {0, 1, 2, 3}), Fact(Pred::perp, {0, 1, 2, 4})));
  EXPECT_TRUE(is_single_substitution(Fact(Pred::perp, {0, 1, 2, 3}), Fact(Pred::perp, {2, 4, 0, 1})));
  EXPECT_FALSE(is_single_substitution(Fact(Pred::perp, {0, 1, 2, 3}), Fact(Pred::para, {0, 1, 2, 3})));
  EXPECT_FALSE(is_single_substitution(Fact(Pred::perp, {0, 1, 2, 3}), Fact(Pred::perp, {0, 1, 4, 5})));
}

TEST(Distractor, NeverSingleSubstitutionAndAlwaysFalsifiable) {
  SamplerConfig sc;
  sc.seed = 3;
  sc.max_depth = 4;
  int made = 0;
  for (const auto& e : sample_pool(sc).premises) {
    const Diagram d = instantiate(e.premise, e.seed);
    const auto st = saturate(e.premise, d, default_rules());
    const auto ds = diagrams_of(e.premise, e.seed + 100);
    const auto ranked = rank_conclusions(st, e.premise, DifficultyConfig{});
    for (std::size_t i = 0; i < std::min<std::size_t>(ranked.size(), 5); ++i)
      for (Strategy s : {Origin::negation, Origin::ratio_perturbation, Origin::rewrite}) {
        try {
          const Option o = make_distractor(ranked[i].fact, e.premise, st, ds, s);
          ++made;
          EXPECT_FALSE(is_single_substitution(ranked[i].fact, o.statement.fact));
          if (o.statement.ratio == Rational(1)) EXPECT_FALSE(st.contains(o.statement.fact));
          for (const auto& x : ds) EXPECT_GT(statement_residual(o.statement, x), kTolFalse);
        } catch (const Error& err) {
          EXPECT_EQ(err.code(), ErrorCode::NoFalsifiableVariant);
        }
      }
  }
  EXPECT_GT(made, 50);
}

TEST(Refine, AllPointsMentionedKeepsPremise) {
  const Premise p = parse_premise("a b c = triangle a b c; d = midpoint d b c; e = foot e a b c");
  Option o;
  o.statement.fact = Fact(Pred::cyclic, {1, 2, 3, 4});
  Option o2;
  o2.statement.fact = Fact(Pred::coll, {0, 3, 4});
  const std::vector<Option> opts{o, o2};
  EXPECT_EQ(refine_symbols(p, opts), p);
}

TEST(Refine, KeepsOnlyNeededPrefix) {
  // Name-level dependency closure over the construction text.
  auto oracle = [](const Premise& p, const std::set<std::string>& points) {
    std::map<std::string, std::size_t> defined;
    for (std::size_t i = 0; i < p.constructions.size(); ++i)
      for (const auto& n : p.constructions[i].new_points) defined[n.name] = i;
    std::set<std::size_t> keep;
    std::function<void(const std::string&)> need = [&](const std::string& name) {
      const std::size_t c = defined.at(name);
      if (!keep.insert(c).second) return;
      for (const auto& cl : p.constructions[c].clauses)
        for (const auto& a : cl.args) need(a.name);
    };
    for (const auto& n : points) need(n);
    return keep;
  };
  SamplerConfig sc;
  sc.seed = 11;
  int checked = 0;
  for (const auto& e : sample_pool(sc).premises) {
    if (e.depth != 8) continue;
    const auto names = e.premise.point_names();
    std::set<std::string> first3;
    for (std::size_t c = 0; c < 3; ++c)
      for (const auto& n : e.premise.constructions[c].new_points) first3.insert(n.name);
    const auto ids = construction_point_ids(e.premise, 2);
    Option o;
    o.statement.fact = Fact(Pred::coll, {0, 1, ids.front()});
    const std::vector<Option> opts{o};
    const Premise refined = refine_symbols(e.premise, opts);
    const auto keep = oracle(e.premise, {names[0], names[1], names[ids.front()]});
    ASSERT_EQ(refined.constructions.size(), keep.size());
    std::size_t j = 0;
    for (std::size_t c : keep) EXPECT_EQ(refined.constructions[j++], e.premise.constructions[c]);
    EXPECT_LE(refined.constructions.size(), 3u);
    EXPECT_NO_THROW(validate_premise(refined));
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(Assemble, KeySizeLawMean) {
  Rng rng(123);
  double sum = 0;
  std::map<int, int> h;
  for (int i = 0; i < 10000; ++i) {
    const int k = draw_key_size({0.45, 0.45, 0.10}, rng);
    ++h[k];
    sum += k;
  }
  EXPECT_GE(sum / 10000, 1.55);
  EXPECT_LE(sum / 10000, 1.75);
  EXPECT_EQ(h.size(), 3u);
}

TEST(Assemble, FixedCardinalities) {
  SamplerConfig sc;
  sc.seed = 2;
  const auto pool = sample_pool(sc);
  for (int k = 1; k <= 3; ++k) {
    ForgeConfig fc;
    fc.key_dist = {k == 1 ? 1.0 : 0.0, k == 2 ? 1.0 : 0.0, k == 3 ? 1.0 : 0.0};
    int built = 0;
    for (std::size_t i = 0; i < pool.premises.size() && built < 5; i += 7) {
      const auto& e = pool.premises[i];
      const Diagram d = instantiate(e.premise, e.seed);
      const auto st = saturate(e.premise, d, default_rules());
      try {
        const Problem p = assemble_problem(e.id, e.premise, d, st, default_rules(), fc);
        ++built;
        EXPECT_EQ(static_cast<int>(p.answer_key.size()), k);
        int truths = 0;
        for (const auto& o : p.options) truths += o.truth;
        EXPECT_EQ(truths, k);
      } catch (const Error& err) {
        EXPECT_TRUE(err.code() == ErrorCode::InsufficientConclusions ||
                    err.code() == ErrorCode::NoFalsifiableVariant);
      }
    }
    EXPECT_EQ(built, 5) << "key size " << k;
  }
}

TEST(Assemble, ProblemsAreConsistentAndDeterministic) {
  SamplerConfig sc;
  sc.seed = 5;
  int built = 0;
  for (const auto& e : sample_pool(sc).premises) {
    const Diagram d = instantiate(e.premise, e.seed);
    const auto st = saturate(e.premise, d, default_rules());
    Problem p;
    try {
      p = assemble_problem(e.id, e.premise, d, st, default_rules(), ForgeConfig{});
    } catch (const Error&) {
      continue;
    }
    ++built;
    EXPECT_EQ(check_problem(p, default_rules(), EngineConfig{}, 0), "") << e.id;
    EXPECT_FALSE(p.answer_key.empty());
    EXPECT_EQ(p.indicators.x2, static_cast<int>(p.premise.constructions.size()));
    EXPECT_EQ(p.indicators.x3, static_cast<int>(p.premise.point_count()));
    for (const auto& o : p.options)
      if (o.truth) {
        ASSERT_TRUE(o.trace);
        EXPECT_FALSE(o.proof.empty());
        EXPECT_LE(o.trace->search_depth, EngineConfig{}.max_level);
      }
    const Problem again = assemble_problem(e.id, e.premise, d, st, default_rules(), ForgeConfig{});
    EXPECT_EQ(again.premise, p.premise);
    EXPECT_EQ(again.answer_key, p.answer_key);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(again.options[i].statement, p.options[i].statement);
  }
  EXPECT_GT(built, 50);
}
