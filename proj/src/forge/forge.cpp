#include "geoforge/forge/forge.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "geoforge/common/error.hpp"
#include "geoforge/kernel/check.hpp"
#include "geoforge/kernel/premise_facts.hpp"
#include "geoforge/renderer/text.hpp"

namespace geoforge {

namespace {

constexpr std::uint64_t kAssembleSalt = 0xa55e3b1e;
constexpr std::uint64_t kFullDiagramSalt = 0xd1a6;
constexpr std::uint64_t kRefinedDiagramSalt = 0x5eed;
constexpr int kCheckDiagrams = 3;
constexpr int kRefinedDiagrams = 12;
constexpr double kDistractorMargin = 1e-2;

double length(const Diagram& d, PointId a, PointId b) { return dist(d.coords.at(a), d.coords.at(b)); }

// Constructions needed for the given points and constructions, closed under
// the points their clauses refer to.
std::vector<char> needed_constructions(const Premise& premise, const std::vector<PointId>& points,
                                       const std::vector<std::size_t>& constructions) {
  const auto defining = premise.defining_construction();
  std::vector<char> keep(premise.constructions.size(), 0);
  std::vector<std::size_t> stack(constructions);
  for (PointId p : points) stack.push_back(defining.at(p));
  while (!stack.empty()) {
    const std::size_t c = stack.back();
    stack.pop_back();
    if (keep[c]) continue;
    keep[c] = 1;
    for (const auto& cl : premise.constructions[c].clauses)
      for (PointId a : clause_arg_ids(premise, cl)) stack.push_back(defining.at(a));
  }
  return keep;
}

Premise subset(const Premise& premise, const std::vector<char>& keep) {
  Premise out;
  for (std::size_t i = 0; i < keep.size(); ++i)
    if (keep[i]) out.constructions.push_back(premise.constructions[i]);
  return out;
}

using FactOrigin = std::unordered_map<Fact, std::size_t, FactHash>;

FactOrigin premise_fact_origin(const Premise& premise) {
  FactOrigin out;
  for (const auto& pf : premise_facts(premise)) out.emplace(pf.fact, pf.construction);
  return out;
}

std::vector<Fact> trace_support(const ProofTrace& trace, const SaturationState& closure) {
  std::set<FactId> leaves;
  for (const auto& step : trace.steps)
    for (FactId p : step.dep.premises)
      if (closure.facts[p].dep.kind == DepKind::premise) leaves.insert(p);
  std::vector<Fact> out;
  for (FactId id : leaves) out.push_back(closure.facts[id].fact);
  return out;
}

struct Needs {
  std::vector<PointId> points;
  std::vector<std::size_t> constructions;

  void add(const Fact& f, const FactOrigin& origin) {
    for (PointId p : f.view()) points.push_back(p);
    auto it = origin.find(f);
    if (it != origin.end()) constructions.push_back(it->second);
  }
};

Fact remap(const Fact& f, const std::vector<std::optional<PointId>>& map) {
  std::vector<PointId> args;
  for (PointId p : f.view()) {
    if (!map.at(p)) throw Error(ErrorCode::UndefinedPoint, "option point dropped by refinement");
    args.push_back(*map.at(p));
  }
  return canonical(Fact(f.pred, std::span<const PointId>(args)));
}

std::vector<Diagram> diagrams_for(const Premise& premise, std::uint64_t seed, int count) {
  std::vector<Diagram> out;
  for (std::uint64_t k = 0; static_cast<int>(out.size()) < count && k < static_cast<std::uint64_t>(4 * count); ++k) {
    try {
      out.push_back(instantiate(premise, derive_seed(seed, k + 1)));
    } catch (const Error&) {
    }
  }
  if (static_cast<int>(out.size()) < count)
    throw Error(ErrorCode::DegenerateAfterRetries, "could not instantiate independent diagrams");
  return out;
}

bool falsifiable(const Statement& s, const SaturationState& closure, std::span<const Diagram> diagrams,
                 double margin = kTolFalse) {
  if (!is_meaningful(s.fact)) return false;
  if (s.ratio == Rational(1) && closure.contains(s.fact)) return false;
  for (const auto& d : diagrams)
    if (!(statement_residual(s, d) > margin)) return false;
  return true;
}

const Rational kRatios[] = {Rational(2), Rational(3, 2), Rational(1, 2), Rational(2, 3), Rational(3)};

std::vector<Statement> candidates(const Fact& base, Strategy strategy) {
  const auto& a = base.args;
  std::vector<Statement> out;
  auto fact = [&](Pred p, std::initializer_list<PointId> args) { out.push_back({Fact(p, args), Rational(1)}); };
  auto scaled = [&](Pred p, std::initializer_list<PointId> args) {
    for (const auto& k : kRatios) out.push_back({Fact(p, args), k});
  };
  switch (strategy) {
    case Origin::negation:
      switch (base.pred) {
        case Pred::para: fact(Pred::perp, {a[0], a[1], a[2], a[3]}); break;
        case Pred::perp: fact(Pred::para, {a[0], a[1], a[2], a[3]}); break;
        case Pred::coll:
          fact(Pred::perp, {a[0], a[1], a[1], a[2]});
          fact(Pred::perp, {a[1], a[0], a[0], a[2]});
          break;
        case Pred::cyclic:
          fact(Pred::coll, {a[0], a[1], a[2]});
          fact(Pred::coll, {a[0], a[1], a[3]});
          fact(Pred::coll, {a[1], a[2], a[3]});
          break;
        case Pred::eqangle: fact(Pred::eqangle, {a[0], a[1], a[2], a[3], a[6], a[7], a[4], a[5]}); break;
        case Pred::eqratio: fact(Pred::eqratio, {a[0], a[1], a[2], a[3], a[6], a[7], a[4], a[5]}); break;
        case Pred::midp:
          fact(Pred::midp, {a[1], a[0], a[2]});
          fact(Pred::midp, {a[2], a[0], a[1]});
          break;
        case Pred::circle:
          fact(Pred::circle, {a[1], a[0], a[2], a[3]});
          fact(Pred::circle, {a[2], a[0], a[1], a[3]});
          break;
        default: break;
      }
      break;
    case Origin::ratio_perturbation:
      switch (base.pred) {
        case Pred::cong: scaled(Pred::cong, {a[0], a[1], a[2], a[3]}); break;
        case Pred::eqratio: scaled(Pred::eqratio, {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]}); break;
        case Pred::midp: scaled(Pred::cong, {a[0], a[1], a[0], a[2]}); break;
        case Pred::circle: scaled(Pred::cong, {a[0], a[1], a[0], a[2]}); break;
        default: break;
      }
      break;
    case Origin::rewrite:
      switch (base.pred) {
        case Pred::para:
        case Pred::perp: fact(Pred::cong, {a[0], a[1], a[2], a[3]}); break;
        case Pred::eqangle: {
          // vertex angles: the sides of each angle meet at a shared point
          auto vertex = [&](int i, PointId& p, PointId& q) {
            const PointId u = a[i], v = a[i + 1], w = a[i + 2], x = a[i + 3];
            if (u == w) p = v, q = x;
            else if (u == x) p = v, q = w;
            else if (v == w) p = u, q = x;
            else if (v == x) p = u, q = w;
            else return false;
            return true;
          };
          PointId p, q, r, s;
          if (vertex(0, p, q) && vertex(4, r, s)) fact(Pred::cong, {p, q, r, s});
          break;
        }
        case Pred::coll:
          fact(Pred::midp, {a[0], a[1], a[2]});
          fact(Pred::midp, {a[1], a[0], a[2]});
          fact(Pred::midp, {a[2], a[0], a[1]});
          break;
        case Pred::eqratio: fact(Pred::cong, {a[0], a[1], a[2], a[3]}); break;
        case Pred::cong: fact(Pred::para, {a[0], a[1], a[2], a[3]}); break;
        case Pred::cyclic:
          fact(Pred::cong, {a[0], a[1], a[2], a[3]});
          fact(Pred::cong, {a[0], a[2], a[1], a[3]});
          break;
        case Pred::circle: fact(Pred::cyclic, {a[0], a[1], a[2], a[3]}); break;
        default: break;
      }
      break;
    case Origin::provable: break;
  }
  for (auto& s : out)
    if (is_meaningful(s.fact)) s.fact = canonical(s.fact);
  return out;
}

Option true_option(const Fact& f, const SaturationState& closure) {
  Option o;
  o.statement = {f, Rational(1)};
  o.truth = true;
  o.origin = Origin::provable;
  o.trace = extract_proof(closure, f);
  o.support = trace_support(*o.trace, closure);
  return o;
}

}  // namespace

int draw_key_size(const std::array<double, 3>& dist, Rng& rng) {
  const double total = dist[0] + dist[1] + dist[2];
  double u = rng.uniform() * total;
  for (int k = 0; k < 3; ++k) {
    if (u < dist[k]) return k + 1;
    u -= dist[k];
  }
  return 3;
}

namespace {

bool same_statement(const Statement& a, const Statement& b) { return a.fact == b.fact && a.ratio == b.ratio; }

}  // namespace

double statement_residual(const Statement& s, const Diagram& d) {
  if (s.ratio == Rational(1)) return residual(s.fact, d);
  const auto& a = s.fact.args;
  const double k = std::log(s.ratio.to_double());
  if (s.fact.pred == Pred::cong) {
    const double l0 = length(d, a[0], a[1]), l1 = length(d, a[2], a[3]);
    if (l0 == 0 || l1 == 0) return 1.0;
    return std::abs(std::log(l0) - std::log(l1) - k);
  }
  if (s.fact.pred == Pred::eqratio) {
    double l[4];
    for (int i = 0; i < 4; ++i) {
      l[i] = length(d, a[2 * i], a[2 * i + 1]);
      if (l[i] == 0) return 1.0;
    }
    return std::abs(std::log(l[0]) - std::log(l[1]) - k - std::log(l[2]) + std::log(l[3]));
  }
  throw Error(ErrorCode::UnknownPredicate, "ratio statement on " + std::string(pred_name(s.fact.pred)));
}

std::string_view origin_name(Origin o) {
  switch (o) {
    case Origin::provable: return "provable";
    case Origin::negation: return "negation";
    case Origin::ratio_perturbation: return "ratio_perturbation";
    case Origin::rewrite: return "rewrite";
  }
  return "";
}

std::optional<Origin> origin_from_name(std::string_view name) {
  for (Origin o : {Origin::provable, Origin::negation, Origin::ratio_perturbation, Origin::rewrite})
    if (origin_name(o) == name) return o;
  return std::nullopt;
}

std::vector<Candidate> rank_conclusions(const SaturationState& closure, const Premise& premise,
                                        const DifficultyConfig& config) {
  validate(config);
  const auto origin = premise_fact_origin(premise);
  std::map<std::vector<char>, std::array<int, 3>> shape_cache;
  std::vector<Candidate> out;
  for (const auto& rec : closure.facts) {
    if (rec.dep.kind == DepKind::premise) continue;
    Candidate c;
    c.fact = rec.fact;
    c.trace = extract_proof(closure, rec.fact);
    c.support = trace_support(c.trace, closure);
    std::set<std::size_t> sources;
    Needs needs;
    needs.add(c.fact, origin);
    for (const auto& f : c.support) {
      auto it = origin.find(f);
      if (it != origin.end()) sources.insert(it->second);
      needs.add(f, origin);
    }
    if (sources.size() < 2) continue;
    const auto keep = needed_constructions(premise, needs.points, needs.constructions);
    auto [it, fresh] = shape_cache.try_emplace(keep);
    if (fresh) {
      const Premise refined = subset(premise, keep);
      it->second = {token_count(statement_text(refined, Lang::en)), static_cast<int>(refined.constructions.size()),
                    static_cast<int>(refined.point_count())};
    }
    c.indicators = {it->second[0], it->second[1], it->second[2], c.trace.search_depth, c.trace.proof_length};
    out.push_back(std::move(c));
  }
  std::vector<DifficultyIndicators> xs;
  for (const auto& c : out) xs.push_back(c.indicators);
  const auto stats = indicator_stats(xs);
  for (auto& c : out) c.score = score_difficulty(c.indicators, config, &stats);
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.fact < b.fact;
  });
  return out;
}

std::vector<Option> select_true_options(const SaturationState& closure, const Premise& premise, int count,
                                        const DifficultyConfig& config) {
  if (count < 1 || count > 3) throw Error(ErrorCode::InvalidConfig, "true option count must be in 1..3");
  const auto ranked = rank_conclusions(closure, premise, config);
  if (static_cast<int>(ranked.size()) < count)
    throw Error(ErrorCode::InsufficientConclusions, "closure has " + std::to_string(ranked.size()) +
                                                        " eligible conclusions, " + std::to_string(count) + " requested");
  std::vector<Option> out;
  for (int i = 0; i < count; ++i) out.push_back(true_option(ranked[i].fact, closure));
  return out;
}

bool is_single_substitution(const Fact& base, const Fact& candidate) {
  if (base.pred != candidate.pred || base.n != candidate.n) return false;
  const auto vb = variants(base);
  const auto vc = variants(candidate);
  for (const auto& x : vb)
    for (const auto& y : vc) {
      int diff = 0;
      for (std::size_t i = 0; i < base.n; ++i) diff += x[i] != y[i];
      if (diff == 1) return true;
    }
  return false;
}

Option make_distractor(const Fact& base, const Premise& premise, const SaturationState& closure,
                       std::span<const Diagram> diagrams, Strategy strategy, Rng* rng, double margin) {
  if (strategy == Origin::provable) throw Error(ErrorCode::InvalidConfig, "provable is not a distractor strategy");
  auto list = candidates(base, strategy);
  if (rng)
    for (std::size_t i = list.size(); i > 1; --i) std::swap(list[i - 1], list[rng->below(i)]);
  const std::size_t n = premise.point_count();
  for (const auto& s : list) {
    bool in_premise = true;
    for (PointId p : s.fact.view()) in_premise = in_premise && p < n;
    if (!in_premise || is_single_substitution(base, s.fact)) continue;
    if (!falsifiable(s, closure, diagrams, margin)) continue;
    Option o;
    o.statement = s;
    o.truth = false;
    o.origin = strategy;
    return o;
  }
  throw Error(ErrorCode::NoFalsifiableVariant,
              "no falsifiable " + std::string(origin_name(strategy)) + " variant of " + std::string(pred_name(base.pred)));
}

Premise refine_symbols(const Premise& premise, std::span<const Option> options) {
  const auto origin = premise_fact_origin(premise);
  Needs needs;
  for (const auto& o : options) {
    for (PointId p : o.statement.fact.view()) needs.points.push_back(p);
    for (const auto& f : o.support) needs.add(f, origin);
  }
  return subset(premise, needed_constructions(premise, needs.points, needs.constructions));
}

std::vector<std::optional<PointId>> point_map(const Premise& premise, const Premise& refined) {
  std::vector<std::optional<PointId>> out;
  for (const auto& name : premise.point_names()) out.push_back(refined.index_of(name));
  return out;
}

void validate(const ForgeConfig& config) {
  validate(config.difficulty);
  double total = 0.0;
  for (double p : config.key_dist) {
    if (!std::isfinite(p) || p < 0) throw Error(ErrorCode::InvalidConfig, "key distribution entries must be >= 0");
    total += p;
  }
  if (total <= 0) throw Error(ErrorCode::InvalidConfig, "key distribution must have positive mass");
  if (config.max_attempts < 1) throw Error(ErrorCode::InvalidConfig, "max_attempts must be >= 1");
  if (config.distractor_bases < 1) throw Error(ErrorCode::InvalidConfig, "distractor_bases must be >= 1");
}

std::uint64_t id_hash(std::string_view id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Problem assemble_problem(const std::string& id, const Premise& premise, const Diagram& diagram,
                         const SaturationState& closure, const RuleSet& rules, const ForgeConfig& config) {
  validate(config);
  Rng rng(derive_seed(id_hash(id), kAssembleSalt));
  const int k = draw_key_size(config.key_dist, rng);
  const auto ranked = rank_conclusions(closure, premise, config.difficulty);
  if (static_cast<int>(ranked.size()) < k)
    throw Error(ErrorCode::InsufficientConclusions,
                id + ": " + std::to_string(ranked.size()) + " eligible conclusions for a key of " + std::to_string(k));
  const auto full_diagrams = diagrams_for(premise, derive_seed(diagram.seed, kFullDiagramSalt), kCheckDiagrams);
  const std::array<Strategy, 3> strategies{Origin::negation, Origin::ratio_perturbation, Origin::rewrite};

  std::set<Fact> blocked_true;
  std::vector<Statement> blocked_false;
  std::string last_failure = "no attempt made";
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    std::vector<Option> options;
    for (const auto& c : ranked) {
      if (static_cast<int>(options.size()) == k) break;
      if (!blocked_true.count(c.fact)) options.push_back(true_option(c.fact, closure));
    }
    if (static_cast<int>(options.size()) < k)
      throw Error(ErrorCode::InsufficientConclusions, id + ": no consistent set of true options (" + last_failure + ")");

    std::vector<Fact> bases;
    for (const auto& o : options) bases.push_back(o.statement.fact);
    for (const auto& c : ranked) {
      if (static_cast<int>(bases.size()) >= config.distractor_bases) break;
      if (std::find(bases.begin(), bases.end(), c.fact) == bases.end()) bases.push_back(c.fact);
    }
    const std::size_t first = rng.below(strategies.size());
    std::size_t turn = 0;
    for (const auto& b : bases) {
      if (options.size() == kLabels.size()) break;
      for (std::size_t j = 0; j < strategies.size(); ++j) {
        const Strategy s = strategies[(first + turn + j) % strategies.size()];
        try {
          Option o = make_distractor(b, premise, closure, full_diagrams, s, &rng, kDistractorMargin);
          auto seen = [&](const Statement& x) { return same_statement(x, o.statement); };
          if (std::any_of(blocked_false.begin(), blocked_false.end(), seen)) continue;
          if (std::any_of(options.begin(), options.end(), [&](const Option& x) { return seen(x.statement); })) continue;
          options.push_back(std::move(o));
          ++turn;
          break;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoFalsifiableVariant) throw;
        }
      }
    }
    if (options.size() < kLabels.size())
      throw Error(ErrorCode::NoFalsifiableVariant, id + ": not enough falsifiable distractors");

    const Premise refined = refine_symbols(premise, options);
    const auto map = point_map(premise, refined);
    const std::uint64_t dseed = derive_seed(diagram.seed, kRefinedDiagramSalt + static_cast<std::uint64_t>(attempt));
    Diagram rdiagram;
    try {
      rdiagram = instantiate(refined, dseed);
    } catch (const Error& e) {
      last_failure = e.what();
      continue;
    }
    const SaturationState rclosure = saturate(refined, rdiagram, rules, config.engine);
    const auto fresh = diagrams_for(refined, dseed, kRefinedDiagrams);

    bool ok = true;
    std::vector<Option> final_options;
    for (const auto& o : options) {
      const Statement s{remap(o.statement.fact, map), o.statement.ratio};
      if (o.truth) {
        if (!rclosure.contains(s.fact)) {
          blocked_true.insert(o.statement.fact);
          last_failure = "true option not re-derived after refinement";
          ok = false;
          continue;
        }
        Option r = true_option(s.fact, rclosure);
        r.proof = format_proof(*r.trace, rclosure, rules, refined.point_names());
        final_options.push_back(std::move(r));
      } else {
        if (!falsifiable(s, rclosure, fresh, kDistractorMargin)) {
          blocked_false.push_back(o.statement);
          last_failure = "distractor not falsifiable after refinement";
          ok = false;
          continue;
        }
        Option r = o;
        r.statement = s;
        final_options.push_back(std::move(r));
      }
    }
    if (!ok) continue;

    Problem p;
    p.id = id;
    p.premise = refined;
    p.diagram_seed = dseed;
    std::set<FactId> steps;
    for (const auto& o : final_options)
      if (o.truth) {
        p.indicators.x4 = std::max(p.indicators.x4, o.trace->search_depth);
        for (const auto& st : o.trace->steps) steps.insert(st.fact);
      }
    p.solution_length = static_cast<int>(steps.size());
    p.indicators.x1 = token_count(statement_text(refined, Lang::en));
    p.indicators.x2 = static_cast<int>(refined.constructions.size());
    p.indicators.x3 = static_cast<int>(refined.point_count());
    p.indicators.x5 = p.solution_length;
    for (std::size_t i = final_options.size(); i > 1; --i) std::swap(final_options[i - 1], final_options[rng.below(i)]);
    for (std::size_t i = 0; i < kLabels.size(); ++i) {
      p.options[i] = std::move(final_options[i]);
      if (p.options[i].truth) p.answer_key.push_back(kLabels[i]);
    }
    p.difficulty_score = score_difficulty(p.indicators, config.difficulty);
    return p;
  }
  throw Error(ErrorCode::InsufficientConclusions, id + ": attempts exhausted (" + last_failure + ")");
}

void score_batch(std::span<Problem> problems, const DifficultyConfig& config) {
  std::vector<DifficultyIndicators> xs;
  for (const auto& p : problems) xs.push_back(p.indicators);
  const auto stats = indicator_stats(xs);
  for (auto& p : problems) p.difficulty_score = score_difficulty(p.indicators, config, &stats);
}

std::string check_problem(const Problem& problem, const RuleSet& rules, const EngineConfig& engine,
                          std::uint64_t fresh_salt) {
  const Diagram d = instantiate(problem.premise, problem.diagram_seed);
  const SaturationState closure = saturate(problem.premise, d, rules, engine);
  const std::uint64_t seed = fresh_salt == 0 ? problem.diagram_seed : derive_seed(problem.diagram_seed, fresh_salt);
  const auto fresh = diagrams_for(problem.premise, seed, kCheckDiagrams);
  std::size_t true_count = 0;
  for (std::size_t i = 0; i < kLabels.size(); ++i) {
    const auto& o = problem.options[i];
    const std::string label(1, kLabels[i]);
    const bool keyed =
        std::find(problem.answer_key.begin(), problem.answer_key.end(), kLabels[i]) != problem.answer_key.end();
    if (keyed != o.truth) return "option " + label + " disagrees with the answer key";
    if (o.truth) {
      ++true_count;
      if (o.statement.ratio != Rational(1) || !closure.contains(o.statement.fact))
        return "true option " + label + " is not derived from the premise";
    } else {
      if (o.statement.ratio == Rational(1) && closure.contains(o.statement.fact))
        return "false option " + label + " is derivable";
      for (const auto& f : fresh)
        if (!(statement_residual(o.statement, f) > kTolFalse))
          return "false option " + label + " holds numerically on a fresh diagram";
    }
  }
  if (true_count < 1 || true_count > 3) return "answer key size out of range";
  return "";
}

}  // namespace geoforge
