#include "geoforge/engine/engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <unordered_set>

#include "equations.hpp"
#include "geoforge/common/error.hpp"
#include "geoforge/engine/algebra.hpp"
#include "geoforge/kernel/check.hpp"
#include "geoforge/kernel/premise_facts.hpp"

namespace geoforge {

using namespace detail;

namespace {

enum class Range : std::uint8_t { old, delta, all };

struct Step {
  int atom = 0;
  Range range = Range::all;
  std::uint32_t mask = 0;  // argument positions bound before this step
  bool full = false;
  std::vector<int> sides;  // side conditions fully bound after this step
};

using Plan = std::vector<Step>;

struct PosIndex {
  std::size_t upto = 0;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
};

struct Relation {
  std::vector<ArgTuple> rows;  // every symmetric variant of every fact
  std::vector<FactId> row_fact;
  std::vector<std::size_t> level_begin;
  std::unordered_map<std::uint32_t, PosIndex> indexes;
};

std::uint64_t pack_key(const ArgTuple& t, std::uint32_t mask) {
  std::uint64_t k = 0;
  int s = 0;
  for (int i = 0; i < 8; ++i)
    if (mask & (1u << i)) {
      k |= static_cast<std::uint64_t>(t[static_cast<std::size_t>(i)]) << (8 * s);
      ++s;
    }
  return k;
}

Plan make_plan(const Rule& r, std::size_t delta) {
  Plan plan;
  std::vector<char> bound(r.vars.size(), 0), used(r.premises.size(), 0), side_done(r.sides.size(), 0);
  auto push = [&](std::size_t i) {
    const Atom& a = r.premises[i];
    Step s;
    s.atom = static_cast<int>(i);
    s.range = i < delta ? Range::old : i == delta ? Range::delta : Range::all;
    bool full = true;
    for (std::size_t p = 0; p < a.n; ++p) {
      if (bound[static_cast<std::size_t>(a.vars[p])]) s.mask |= 1u << p;
      else full = false;
    }
    s.full = full;
    for (std::size_t p = 0; p < a.n; ++p) bound[static_cast<std::size_t>(a.vars[p])] = 1;
    for (std::size_t k = 0; k < r.sides.size(); ++k) {
      if (side_done[k]) continue;
      bool ready = true;
      for (std::size_t p = 0; p < r.sides[k].n; ++p) ready = ready && bound[static_cast<std::size_t>(r.sides[k].vars[p])];
      if (ready) {
        side_done[k] = 1;
        s.sides.push_back(static_cast<int>(k));
      }
    }
    used[i] = 1;
    plan.push_back(std::move(s));
  };
  push(delta);
  for (std::size_t left = r.premises.size() - 1; left > 0; --left) {
    int best = -1, best_bound = -1, best_n = 0;
    for (std::size_t i = 0; i < r.premises.size(); ++i) {
      if (used[i]) continue;
      int nb = 0;
      for (std::size_t p = 0; p < r.premises[i].n; ++p) nb += bound[static_cast<std::size_t>(r.premises[i].vars[p])];
      const int n = r.premises[i].n;
      // Prefer the most constrained atom; among equals, the fully bound or the shortest.
      const bool better = nb > best_bound || (nb == best_bound && (nb == n) && best_bound != best_n) ||
                          (nb == best_bound && n < best_n);
      if (best < 0 || better) {
        best = static_cast<int>(i);
        best_bound = nb;
        best_n = n;
      }
    }
    push(static_cast<std::size_t>(best));
  }
  return plan;
}

Fact instantiate_atom(const Atom& a, const std::array<std::int16_t, 16>& vals) {
  Fact f;
  f.pred = a.pred;
  f.n = a.n;
  for (std::size_t i = 0; i < a.n; ++i) f.args[i] = static_cast<PointId>(vals[static_cast<std::size_t>(a.vars[i])]);
  return f;
}

// True when the rule's conclusion is a linear consequence of its premises in
// the angle or length span for every binding, so algebra already covers it.
bool subsumed_by_algebra(const Rule& r) {
  if (!span_decidable(r.conclusion.pred)) return false;
  const int nv = static_cast<int>(r.vars.size());
  auto var_of = [nv](int a, int b) { return a == kTwo ? nv * nv : std::min(a, b) * nv + std::max(a, b); };
  auto to_expr = [&](const EqShape& s) {
    std::map<int, std::int64_t> acc;
    for (const auto& t : s.terms) acc[var_of(t.a, t.b)] += t.coef;
    LinExpr e;
    for (auto [v, c] : acc)
      if (c) e.terms.emplace_back(v, Rational(c));
    return e;
  };
  auto as_fact = [](const Atom& a) {
    Fact f;
    f.pred = a.pred;
    f.n = a.n;
    for (std::size_t i = 0; i < a.n; ++i) f.args[i] = static_cast<PointId>(a.vars[i]);
    return f;
  };
  LinearSystem angles(nv * nv + 1), lengths(nv * nv + 1);
  for (const auto& a : r.premises) {
    std::vector<EqShape> sa, sl;
    angle_shapes(as_fact(a), sa);
    length_shapes(as_fact(a), sl);
    for (const auto& s : sa) angles.add(to_expr(s), 0);
    for (const auto& s : sl) lengths.add(to_expr(s), 0);
  }
  std::vector<EqShape> sa, sl;
  angle_shapes(as_fact(r.conclusion), sa);
  length_shapes(as_fact(r.conclusion), sl);
  for (const auto& s : sa)
    if (!angles.reduce(to_expr(s)).rest.terms.empty()) return false;
  for (const auto& s : sl)
    if (!lengths.reduce(to_expr(s)).rest.terms.empty()) return false;
  return true;
}

// Angle and log-length linear systems over the segments of an n-point figure.
struct Spans {
  int n;
  LinearSystem angles, lengths;
  std::vector<char> angle_seen, length_seen;
  std::vector<double> direction;  // per segment var, in units of pi

  explicit Spans(const Diagram& diagram)
      : n(static_cast<int>(diagram.coords.size())),
        angles(n * n),
        lengths(n * n + 1),
        angle_seen(static_cast<std::size_t>(n * n), 0),
        length_seen(static_cast<std::size_t>(n * n + 1), 0),
        direction(static_cast<std::size_t>(n * n), 0.0) {
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        direction[static_cast<std::size_t>(seg(a, b))] =
            line_angle(diagram.coords[static_cast<std::size_t>(a)], diagram.coords[static_cast<std::size_t>(b)]) / M_PI;
  }

  int seg(int a, int b) const { return std::min(a, b) * n + std::max(a, b); }
  int lvar(int a, int b) const { return a == kTwo ? n * n : seg(a, b); }

  LinExpr angle_expr(const EqShape& s) const {
    std::map<int, std::int64_t> acc;
    for (const auto& t : s.terms) acc[seg(t.a, t.b)] += t.coef;
    LinExpr e;
    double value = 0.0;
    for (auto [v, c] : acc)
      if (c) {
        e.terms.emplace_back(v, Rational(c));
        value += static_cast<double>(c) * direction[static_cast<std::size_t>(v)];
      }
    const double c0 = s.c0.to_double();
    e.constant = s.c0 + Rational(static_cast<std::int64_t>(std::llround(value - c0)));
    return e;
  }

  LinExpr length_expr(const EqShape& s) const {
    std::map<int, std::int64_t> acc;
    for (const auto& t : s.terms) acc[lvar(t.a, t.b)] += t.coef;
    LinExpr e;
    for (auto [v, c] : acc)
      if (c) e.terms.emplace_back(v, Rational(c));
    e.constant = s.c0;
    return e;
  }

  void add(const Fact& f, FactId id) {
    std::vector<EqShape> shapes;
    angle_shapes(f, shapes);
    for (const auto& s : shapes) {
      const LinExpr e = angle_expr(s);
      for (const auto& t : e.terms) angle_seen[static_cast<std::size_t>(t.first)] = 1;
      angles.add(e, id);
    }
    shapes.clear();
    length_shapes(f, shapes);
    for (const auto& s : shapes) {
      const LinExpr e = length_expr(s);
      for (const auto& t : e.terms) length_seen[static_cast<std::size_t>(t.first)] = 1;
      lengths.add(e, id);
    }
  }

  static std::uint64_t expr_fp(const LinExpr& e, const LinearSystem& sys) {
    std::uint64_t h = 0;
    for (const auto& [v, c] : e.terms) {
      const std::uint64_t f = sys.fingerprint(v);
      h = LinearSystem::mod_add(h, c.num() >= 0 ? LinearSystem::mod_mul(LinearSystem::to_mod(c), f)
                                                : LinearSystem::mod_neg(LinearSystem::mod_mul(LinearSystem::to_mod(-c), f)));
    }
    return h;
  }

  // Whether the spans already fix the fact's defining quantity to its value.
  // On success `why` receives the supporting facts.
  bool implied(const Fact& f, std::vector<FactId>* why = nullptr) {
    std::vector<EqShape> shapes;
    const bool angle = in_angle_system(f.pred) && f.pred != Pred::midp && f.pred != Pred::cyclic;
    if (angle) angle_shapes(f, shapes);
    else length_shapes(f, shapes);
    if (f.pred == Pred::coll) shapes.resize(1);  // one shared direction through a[0] is enough
    if (shapes.size() != 1) return false;
    const LinearSystem& sys = angle ? angles : lengths;
    const LinExpr e = angle ? angle_expr(shapes[0]) : length_expr(shapes[0]);
    if (expr_fp(e, sys) != 0) return false;
    auto red = sys.reduce(e);
    if (!red.rest.terms.empty()) return false;
    const Rational diff = red.rest.constant - shapes[0].c0;
    if (angle ? !diff.is_integer() : !diff.is_zero()) return false;
    if (why) red.why.for_each([&](std::size_t i) { why->push_back(static_cast<FactId>(i)); });
    return true;
  }
};

}  // namespace

std::optional<FactId> SaturationState::find(const Fact& f) const {
  auto it = index.find(canonical(f));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::size_t SaturationState::premise_count() const {
  std::size_t n = 0;
  for (const auto& r : facts) n += r.dep.kind == DepKind::premise;
  return n;
}

struct Engine::Impl {
  Premise premise;
  Diagram diagram;
  const RuleSet& rules;
  EngineConfig cfg;
  std::vector<std::string> names;
  int n = 0;

  SaturationState st;
  std::array<Relation, kPredCount> rel;
  std::vector<std::vector<Plan>> plans;
  std::vector<char> skip_rule;

  Spans spans;
  LinearSystem& angles;
  LinearSystem& lengths;
  std::vector<char>& angle_seen;
  std::vector<char>& length_seen;

  std::vector<Derivation> pending;
  std::unordered_set<Fact, FactHash> pending_set;
  std::unordered_set<Fact, FactHash> implied_cache;

  Impl(const Premise& p, const Diagram& d, const RuleSet& r, EngineConfig c)
      : premise(p),
        diagram(d),
        rules(r),
        cfg(c),
        names(p.point_names()),
        n(static_cast<int>(names.size())),
        spans(diagram),
        angles(spans.angles),
        lengths(spans.lengths),
        angle_seen(spans.angle_seen),
        length_seen(spans.length_seen) {
    for (const auto& rule : rules.rules) {
      std::vector<Plan> ps;
      for (std::size_t d = 0; d < rule.premises.size(); ++d) ps.push_back(make_plan(rule, d));
      plans.push_back(std::move(ps));
      skip_rule.push_back(cfg.algebra && subsumed_by_algebra(rule));
    }
    begin_level(0);
    for (const auto& pf : premise_facts(premise)) commit(pf.fact, 0, Dependency{});
  }

  int seg(int a, int b) const { return std::min(a, b) * n + std::max(a, b); }
  void begin_level(int level) {
    for (auto& r : rel)
      while (static_cast<int>(r.level_begin.size()) <= level) r.level_begin.push_back(r.rows.size());
  }

  FactId commit(const Fact& f, int level, Dependency dep) {
    const auto id = static_cast<FactId>(st.facts.size());
    st.facts.push_back({f, level, std::move(dep)});
    st.index.emplace(f, id);
    auto& r = rel[static_cast<std::size_t>(f.pred)];
    for (const auto& v : variants(f)) {
      r.rows.push_back(v);
      r.row_fact.push_back(id);
    }
    if (cfg.algebra) spans.add(f, id);
    return id;
  }

  std::pair<std::size_t, std::size_t> row_range(const Relation& r, Range range, int level) const {
    const std::size_t lb = r.level_begin[static_cast<std::size_t>(level - 1)];
    switch (range) {
      case Range::old: return {0, lb};
      case Range::delta: return {lb, r.rows.size()};
      case Range::all: break;
    }
    return {0, r.rows.size()};
  }

  bool level_in_range(int fact_level, Range range, int level) const {
    switch (range) {
      case Range::old: return fact_level < level - 1;
      case Range::delta: return fact_level == level - 1;
      case Range::all: break;
    }
    return fact_level <= level - 1;
  }

  const std::vector<std::uint32_t>* bucket(Relation& r, std::uint32_t mask, std::uint64_t key) {
    auto& idx = r.indexes[mask];
    for (; idx.upto < r.rows.size(); ++idx.upto)
      idx.buckets[pack_key(r.rows[idx.upto], mask)].push_back(static_cast<std::uint32_t>(idx.upto));
    auto it = idx.buckets.find(key);
    return it == idx.buckets.end() ? nullptr : &it->second;
  }

  bool side_ok(const Atom& a, const std::array<std::int16_t, 16>& vals) const {
    const Fact f = instantiate_atom(a, vals);
    if (!is_meaningful(f)) return false;
    return check_fact(f, diagram, kTolTrue);
  }

  void offer(const Fact& raw, Dependency dep, const char* origin) {
    if (!is_meaningful(raw)) return;
    const Fact f = canonical(raw);
    if (st.index.count(f) || pending_set.count(f)) return;
    if (cfg.algebra && dep.kind == DepKind::rule && span_decidable(f.pred)) {
      if (implied_cache.count(f)) return;
      if (spans.implied(f)) {
        implied_cache.insert(f);
        return;
      }
    }
    if (!check_fact(f, diagram, kTolTrue)) {
      std::string msg = std::string(origin) + " derived '" + format_fact(f, names) + "' (residual " +
                        std::to_string(residual(f, diagram)) + ") from";
      for (FactId id : dep.premises) msg += " [" + format_fact(st.facts[id].fact, names) + "]";
      throw Error(ErrorCode::UnsoundDerivation, msg);
    }
    pending_set.insert(f);
    pending.push_back({f, std::move(dep)});
  }

  void match_rule(std::size_t ri, int level) {
    const Rule& rule = rules.rules[ri];
    std::array<std::int16_t, 16> vals;
    std::array<FactId, 8> matched{};
    for (const Plan& plan : plans[ri]) {
      vals.fill(-1);
      std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == plan.size()) {
          Dependency dep;
          dep.kind = DepKind::rule;
          dep.rule = static_cast<int>(ri);
          dep.premises.assign(matched.begin(), matched.begin() + static_cast<std::ptrdiff_t>(rule.premises.size()));
          offer(instantiate_atom(rule.conclusion, vals), std::move(dep), rule.id.c_str());
          return;
        }
        const Step& s = plan[k];
        const Atom& a = rule.premises[static_cast<std::size_t>(s.atom)];
        Relation& r = rel[static_cast<std::size_t>(a.pred)];
        auto sides_pass = [&] {
          for (int si : s.sides)
            if (!side_ok(rule.sides[static_cast<std::size_t>(si)], vals)) return false;
          return true;
        };
        if (s.full) {
          const Fact f = instantiate_atom(a, vals);
          if (!is_meaningful(f)) return;
          auto it = st.index.find(canonical(f));
          if (it == st.index.end() || !level_in_range(st.facts[it->second].level, s.range, level)) return;
          matched[static_cast<std::size_t>(s.atom)] = it->second;
          if (sides_pass()) rec(k + 1);
          return;
        }
        auto [lo, hi] = row_range(r, s.range, level);
        if (lo >= hi) return;
        auto try_row = [&](std::size_t row) {
          const ArgTuple& t = r.rows[row];
          std::array<int, 8> newly{};
          int nn = 0;
          bool ok = true;
          for (std::size_t p = 0; p < a.n && ok; ++p) {
            const auto v = static_cast<std::size_t>(a.vars[p]);
            if (vals[v] < 0) {
              vals[v] = t[p];
              newly[static_cast<std::size_t>(nn++)] = static_cast<int>(v);
            } else if (vals[v] != t[p]) {
              ok = false;
            }
          }
          if (ok) {
            matched[static_cast<std::size_t>(s.atom)] = r.row_fact[row];
            if (sides_pass()) rec(k + 1);
          }
          for (int i = 0; i < nn; ++i) vals[static_cast<std::size_t>(newly[static_cast<std::size_t>(i)])] = -1;
        };
        if (s.mask == 0) {
          for (std::size_t row = lo; row < hi; ++row) try_row(row);
          return;
        }
        ArgTuple key_src{};
        for (std::size_t p = 0; p < a.n; ++p)
          if (s.mask & (1u << p)) key_src[p] = static_cast<PointId>(vals[static_cast<std::size_t>(a.vars[p])]);
        const auto* b = bucket(r, s.mask, pack_key(key_src, s.mask));
        if (!b) return;
        for (auto it = std::lower_bound(b->begin(), b->end(), static_cast<std::uint32_t>(lo));
             it != b->end() && *it < hi; ++it)
          try_row(*it);
      };
      rec(0);
    }
  }

  std::vector<Derivation> match_theorems() {
    pending.clear();
    pending_set.clear();
    const int level = st.level + 1;
    for (std::size_t ri = 0; ri < rules.rules.size(); ++ri) {
      if (skip_rule[ri]) continue;
      match_rule(ri, level);
    }
    return pending;
  }

  // --- algebraic emission -------------------------------------------------

  struct DirClass {
    std::uint64_t fp;
    Rational c;
    std::vector<int> segs;  // encoded a * n + b, a < b
  };
  struct LineRec {
    int cls;
    std::vector<int> pts;  // sorted
    std::pair<int, int> rep;
  };

  void emit_algebra(const Fact& raw, const LinExpr& combo, LinearSystem& sys, bool angle, Rational want) {
    if (!is_meaningful(raw)) return;
    const Fact f = canonical(raw);
    if (st.index.count(f) || pending_set.count(f)) return;
    auto red = sys.reduce(combo);
    if (!red.rest.terms.empty()) return;
    const Rational diff = red.rest.constant - want;
    if (angle ? !diff.is_integer() : !diff.is_zero()) return;
    Dependency dep;
    dep.kind = DepKind::algebra;
    red.why.for_each([&](std::size_t i) { dep.premises.push_back(static_cast<FactId>(i)); });
    offer(f, std::move(dep), "algebra");
  }

  LinExpr combo(std::initializer_list<std::pair<int, int>> parts) const {
    std::map<int, std::int64_t> acc;
    for (auto [v, c] : parts) acc[v] += c;
    LinExpr e;
    for (auto [v, c] : acc)
      if (c) e.terms.emplace_back(v, Rational(c));
    return e;
  }

  bool numerically_collinear(int a, int b, int c) const {
    if (c == a || c == b) return true;
    return check_fact(Fact(Pred::coll, {static_cast<PointId>(a), static_cast<PointId>(b), static_cast<PointId>(c)}),
                      diagram, kTolTrue);
  }

  void derive_angles() {
    std::map<std::tuple<std::uint64_t, std::int64_t, std::int64_t>, int> class_of_key;
    std::vector<DirClass> classes;
    std::vector<int> class_of_seg(static_cast<std::size_t>(n * n), -1);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        const int v = seg(a, b);
        if (!angle_seen[static_cast<std::size_t>(v)]) continue;
        const std::uint64_t fp = angles.fingerprint(v);
        const Rational c = angles.nf_constant(v);
        auto [it, fresh] = class_of_key.try_emplace({fp, c.num(), c.den()}, static_cast<int>(classes.size()));
        if (fresh) classes.push_back({fp, c, {}});
        classes[static_cast<std::size_t>(it->second)].segs.push_back(v);
        class_of_seg[static_cast<std::size_t>(v)] = it->second;
      }
    // Lines: segments of one direction class lying on a common line.
    std::vector<LineRec> lines;
    std::vector<std::vector<int>> lines_of_class(classes.size());
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
      const auto& cl = classes[ci];
      for (int v : cl.segs) {
        const int a = v / n, b = v % n;
        int found = -1;
        for (int li : lines_of_class[ci]) {
          const auto [p, q] = lines[static_cast<std::size_t>(li)].rep;
          if (numerically_collinear(p, q, a) && numerically_collinear(p, q, b)) {
            found = li;
            break;
          }
        }
        if (found < 0) {
          found = static_cast<int>(lines.size());
          lines.push_back({static_cast<int>(ci), {}, {a, b}});
          lines_of_class[ci].push_back(found);
        }
        auto& pts = lines[static_cast<std::size_t>(found)].pts;
        for (int x : {a, b})
          if (std::find(pts.begin(), pts.end(), x) == pts.end()) pts.insert(std::upper_bound(pts.begin(), pts.end(), x), x);
      }
      // coll: two segments of one direction sharing an endpoint.
      for (std::size_t i = 0; i < cl.segs.size(); ++i)
        for (std::size_t j = i + 1; j < cl.segs.size(); ++j) {
          const int a = cl.segs[i] / n, b = cl.segs[i] % n, c = cl.segs[j] / n, d = cl.segs[j] % n;
          int shared = -1, x = -1, y = -1;
          if (a == c) shared = a, x = b, y = d;
          else if (a == d) shared = a, x = b, y = c;
          else if (b == c) shared = b, x = a, y = d;
          else if (b == d) shared = b, x = a, y = c;
          if (shared < 0) continue;
          emit_algebra(Fact(Pred::coll, {static_cast<PointId>(shared), static_cast<PointId>(x), static_cast<PointId>(y)}),
                       combo({{cl.segs[i], 1}, {cl.segs[j], -1}}), angles, true, Rational(0));
        }
      // para between distinct lines of the class.
      const auto& ls = lines_of_class[ci];
      for (std::size_t i = 0; i < ls.size(); ++i)
        for (std::size_t j = i + 1; j < ls.size(); ++j) {
          const auto [a, b] = lines[static_cast<std::size_t>(ls[i])].rep;
          const auto [c, d] = lines[static_cast<std::size_t>(ls[j])].rep;
          emit_algebra(Fact(Pred::para, {static_cast<PointId>(a), static_cast<PointId>(b), static_cast<PointId>(c),
                                         static_cast<PointId>(d)}),
                       combo({{seg(a, b), 1}, {seg(c, d), -1}}), angles, true, Rational(0));
        }
    }
    // perp between classes whose normal forms differ by a half turn.
    std::map<std::uint64_t, std::vector<int>> by_fp;
    for (std::size_t ci = 0; ci < classes.size(); ++ci) by_fp[classes[ci].fp].push_back(static_cast<int>(ci));
    const Rational half(1, 2);
    for (const auto& [fp, cs] : by_fp)
      for (std::size_t i = 0; i < cs.size(); ++i)
        for (std::size_t j = i + 1; j < cs.size(); ++j) {
          const auto& c1 = classes[static_cast<std::size_t>(cs[i])];
          const auto& c2 = classes[static_cast<std::size_t>(cs[j])];
          const Rational d = c1.c - c2.c;
          if (d != half && d != -half) continue;
          for (int l1 : lines_of_class[static_cast<std::size_t>(cs[i])])
            for (int l2 : lines_of_class[static_cast<std::size_t>(cs[j])]) {
              const auto [a, b] = lines[static_cast<std::size_t>(l1)].rep;
              const auto [c, dd] = lines[static_cast<std::size_t>(l2)].rep;
              emit_algebra(Fact(Pred::perp, {static_cast<PointId>(a), static_cast<PointId>(b), static_cast<PointId>(c),
                                             static_cast<PointId>(dd)}),
                           combo({{seg(a, b), 1}, {seg(c, dd), -1}}), angles, true, half);
            }
        }
    // eqangle between vertex angles with equal normal forms.
    struct VAngle {
      int v, a, b;  // angle from line (v, a) to line (v, b)
      int c1, c2;
    };
    std::map<std::tuple<std::uint64_t, std::int64_t, std::int64_t>, std::vector<VAngle>> groups;
    std::vector<std::vector<int>> lines_at(static_cast<std::size_t>(n));
    for (std::size_t li = 0; li < lines.size(); ++li)
      for (int p : lines[li].pts) lines_at[static_cast<std::size_t>(p)].push_back(static_cast<int>(li));
    for (int v = 0; v < n; ++v) {
      const auto& ls = lines_at[static_cast<std::size_t>(v)];
      for (int l1 : ls)
        for (int l2 : ls) {
          const auto& L1 = lines[static_cast<std::size_t>(l1)];
          const auto& L2 = lines[static_cast<std::size_t>(l2)];
          if (L1.cls == L2.cls) continue;
          const auto& k1 = classes[static_cast<std::size_t>(L1.cls)];
          const auto& k2 = classes[static_cast<std::size_t>(L2.cls)];
          const std::uint64_t fp = LinearSystem::mod_add(k2.fp, LinearSystem::mod_neg(k1.fp));
          const Rational c = (k2.c - k1.c).frac();
          if (fp == 0 && (c.is_zero() || c == half)) continue;
          auto other = [v](const LineRec& l) { return l.pts[0] == v ? l.pts[1] : l.pts[0]; };
          groups[{fp, c.num(), c.den()}].push_back({v, other(L1), other(L2), L1.cls, L2.cls});
        }
    }
    for (const auto& [key, g] : groups)
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = i + 1; j < g.size(); ++j) {
          const VAngle &x = g[i], &y = g[j];
          if (x.c1 == y.c1) continue;  // same pair of directions: follows from para alone
          const auto P = [](int q) { return static_cast<PointId>(q); };
          emit_algebra(Fact(Pred::eqangle, {P(x.v), P(x.a), P(x.v), P(x.b), P(y.v), P(y.a), P(y.v), P(y.b)}),
                       combo({{seg(x.v, x.a), 1}, {seg(x.v, x.b), -1}, {seg(y.v, y.a), -1}, {seg(y.v, y.b), 1}}),
                       angles, true, Rational(0));
        }
  }

  void derive_lengths() {
    std::map<std::uint64_t, std::vector<int>> classes;
    std::vector<std::uint64_t> fp_of(static_cast<std::size_t>(n * n), 0);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        const int v = seg(a, b);
        if (!length_seen[static_cast<std::size_t>(v)]) continue;
        fp_of[static_cast<std::size_t>(v)] = lengths.fingerprint(v);
        classes[fp_of[static_cast<std::size_t>(v)]].push_back(v);
      }
    const auto P = [](int q) { return static_cast<PointId>(q); };
    for (const auto& [fp, segs] : classes)
      for (std::size_t i = 0; i < segs.size(); ++i)
        for (std::size_t j = i + 1; j < segs.size(); ++j) {
          const int s = segs[i], t = segs[j];
          emit_algebra(Fact(Pred::cong, {P(s / n), P(s % n), P(t / n), P(t % n)}), combo({{s, 1}, {t, -1}}), lengths,
                       false, Rational(0));
        }
    struct VRatio {
      int v, a, b;  // |va| / |vb|
    };
    std::map<std::uint64_t, std::vector<VRatio>> groups;
    for (int v = 0; v < n; ++v)
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          if (a == v || b == v) continue;
          const int sa = seg(v, a), sb = seg(v, b);
          if (!length_seen[static_cast<std::size_t>(sa)] || !length_seen[static_cast<std::size_t>(sb)]) continue;
          std::uint64_t fp = LinearSystem::mod_add(fp_of[static_cast<std::size_t>(sa)],
                                                   LinearSystem::mod_neg(fp_of[static_cast<std::size_t>(sb)]));
          if (fp == 0) continue;
          if (fp > LinearSystem::mod_neg(fp)) groups[LinearSystem::mod_neg(fp)].push_back({v, b, a});
          else groups[fp].push_back({v, a, b});
        }
    for (const auto& [key, g] : groups)
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = i + 1; j < g.size(); ++j) {
          const VRatio &x = g[i], &y = g[j];
          if (fp_of[static_cast<std::size_t>(seg(x.v, x.a))] == fp_of[static_cast<std::size_t>(seg(y.v, y.a))]) continue;
          emit_algebra(Fact(Pred::eqratio, {P(x.v), P(x.a), P(x.v), P(x.b), P(y.v), P(y.a), P(y.v), P(y.b)}),
                       combo({{seg(x.v, x.a), 1}, {seg(x.v, x.b), -1}, {seg(y.v, y.a), -1}, {seg(y.v, y.b), 1}}),
                       lengths, false, Rational(0));
        }
  }

  std::vector<Derivation> derive_algebra() {
    const std::size_t before = pending.size();
    if (cfg.algebra) {
      derive_angles();
      derive_lengths();
    }
    return {pending.begin() + static_cast<std::ptrdiff_t>(before), pending.end()};
  }

  bool step() {
    if (st.level >= cfg.max_level || st.truncated) return false;
    match_theorems();
    derive_algebra();
    if (pending.empty()) {
      st.fixpoint = true;
      return false;
    }
    const int level = st.level + 1;
    begin_level(level);
    implied_cache.clear();
    auto batch = std::move(pending);
    pending.clear();
    pending_set.clear();
    for (auto& d : batch) {
      if (st.facts.size() >= cfg.max_facts) {
        st.truncated = true;
        break;
      }
      commit(d.fact, level, std::move(d.dep));
    }
    st.level = level;
    return !st.truncated;
  }
};

Engine::Engine(const Premise& premise, const Diagram& diagram, const RuleSet& rules, EngineConfig config)
    : impl_(std::make_unique<Impl>(premise, diagram, rules, config)) {}

Engine::~Engine() = default;

std::vector<Derivation> Engine::match_theorems() { return impl_->match_theorems(); }
std::vector<Derivation> Engine::derive_algebra() { return impl_->derive_algebra(); }
bool Engine::step() { return impl_->step(); }

const SaturationState& Engine::run() {
  while (impl_->step()) {
  }
  return impl_->st;
}

const SaturationState& Engine::state() const { return impl_->st; }
const std::vector<std::string>& Engine::point_names() const { return impl_->names; }

SaturationState saturate(const Premise& premise, const Diagram& diagram, const RuleSet& rules,
                         const EngineConfig& config) {
  Engine e(premise, diagram, rules, config);
  e.run();
  return e.state();
}

ProofTrace extract_proof(const SaturationState& state, const Fact& conclusion) {
  auto id = state.find(conclusion);
  if (!id) throw Error(ErrorCode::NotDerived, "fact is not in the closure");
  ProofTrace t;
  t.conclusion = state.facts[*id].fact;
  t.search_depth = state.facts[*id].level;
  std::vector<char> seen(state.facts.size(), 0);
  std::vector<FactId> stack{*id}, used;
  while (!stack.empty()) {
    const FactId f = stack.back();
    stack.pop_back();
    if (seen[f]) continue;
    seen[f] = 1;
    const auto& rec = state.facts[f];
    if (rec.dep.kind == DepKind::premise) continue;
    used.push_back(f);
    for (FactId p : rec.dep.premises) stack.push_back(p);
  }
  std::sort(used.begin(), used.end());
  for (FactId f : used) t.steps.push_back({f, state.facts[f].dep});
  t.proof_length = static_cast<int>(t.steps.size());
  return t;
}

namespace {

bool bind_rule(const Rule& r, const std::vector<Fact>& facts, std::size_t i, std::array<std::int16_t, 16>& vals,
               const std::function<bool()>& done) {
  if (i == r.premises.size()) return done();
  const Atom& a = r.premises[i];
  if (a.pred != facts[i].pred) return false;
  for (const auto& t : variants(facts[i])) {
    auto saved = vals;
    bool ok = true;
    for (std::size_t p = 0; p < a.n && ok; ++p) {
      auto& v = vals[static_cast<std::size_t>(a.vars[p])];
      if (v < 0) v = t[p];
      else ok = v == t[p];
    }
    if (ok && bind_rule(r, facts, i + 1, vals, done)) return true;
    vals = saved;
  }
  return false;
}

}  // namespace

bool replay_proof(const ProofTrace& trace, const SaturationState& state, const Diagram& diagram, const RuleSet& rules,
                  std::string* failure) {
  std::unordered_set<FactId> known;
  for (std::size_t i = 0; i < state.facts.size(); ++i)
    if (state.facts[i].dep.kind == DepKind::premise) known.insert(static_cast<FactId>(i));
  auto fail = [&](std::size_t k, const std::string& why) {
    if (failure) *failure = "step " + std::to_string(k + 1) + ": " + why;
    return false;
  };
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    const auto& s = trace.steps[k];
    const Fact& goal = state.facts[s.fact].fact;
    std::vector<Fact> used;
    for (FactId p : s.dep.premises) {
      if (!known.count(p)) return fail(k, "uses a fact not yet established");
      used.push_back(state.facts[p].fact);
    }
    if (s.dep.kind == DepKind::rule) {
      const Rule& r = rules.rules.at(static_cast<std::size_t>(s.dep.rule));
      if (used.size() != r.premises.size()) return fail(k, "premise count does not match " + r.id);
      std::array<std::int16_t, 16> vals;
      vals.fill(-1);
      const bool ok = bind_rule(r, used, 0, vals, [&] {
        for (const auto& side : r.sides) {
          const Fact f = instantiate_atom(side, vals);
          if (!is_meaningful(f) || !check_fact(f, diagram, kTolTrue)) return false;
        }
        const Fact c = instantiate_atom(r.conclusion, vals);
        return is_meaningful(c) && canonical(c) == goal;
      });
      if (!ok) return fail(k, r.id + " does not yield the recorded conclusion");
    } else if (s.dep.kind == DepKind::algebra) {
      Spans sp(diagram);
      for (std::size_t i = 0; i < used.size(); ++i) sp.add(used[i], static_cast<FactId>(i));
      if (!sp.implied(goal)) return fail(k, "not implied by the supporting equations");
    } else {
      return fail(k, "premise fact listed as a step");
    }
    known.insert(s.fact);
  }
  if (!state.find(trace.conclusion) || !known.count(*state.find(trace.conclusion)))
    return fail(trace.steps.size(), "conclusion not reached");
  return true;
}

std::string format_proof(const ProofTrace& trace, const SaturationState& state, const RuleSet& rules,
                         const std::vector<std::string>& names) {
  std::string out;
  int k = 0;
  for (const auto& s : trace.steps) {
    out += std::to_string(++k) + ". " + format_fact(state.facts[s.fact].fact, names) + "  [";
    out += s.dep.kind == DepKind::algebra ? "algebra" : rules.rules[static_cast<std::size_t>(s.dep.rule)].id;
    out += "]";
    std::string sep = " <- ";
    for (FactId p : s.dep.premises) {
      out += sep + format_fact(state.facts[p].fact, names);
      sep = "; ";
    }
    out += "\n";
  }
  return out;
}

}  // namespace geoforge
