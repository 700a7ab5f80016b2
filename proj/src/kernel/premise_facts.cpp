#include "geoforge/kernel/premise_facts.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "geoforge/common/error.hpp"
#include "geoforge/kernel/catalog.hpp"

namespace geoforge {

namespace {

struct FactTemplate {
  const char* relation;
  const char* new_names;
  const char* arg_names;
  std::vector<const char*> facts;
};

// Slot names follow the catalog docs: the new point is x (x y z i for the
// multi-point templates), seeds name their points a b c d.
const std::vector<FactTemplate>& fact_templates() {
  static const std::vector<FactTemplate> table = {
      {"angle_bisector", "x", "a b c", {"eqangle b a b x b x b c"}},
      {"angle_mirror", "x", "a b c", {"eqangle b a b c b c b x"}},
      {"centroid", "x y z i", "a b c",
       {"midp x b c", "coll x b c", "midp y c a", "coll y c a", "midp z a b", "coll z a b", "coll a x i", "coll b y i",
        "coll c z i"}},
      {"circle", "x", "a b c", {"cong x a x b", "cong x b x c"}},
      {"eq_quadrangle", "a b c d", "", {"cong a d b c"}},
      {"eq_trapezoid", "a b c d", "", {"para a b c d", "cong a d b c"}},
      {"eq_triangle", "x", "b c", {"cong x b b c", "cong b c c x"}},
      {"eqangle2", "x", "a b c", {"eqangle a b a x c x c b"}},
      {"eqangle3", "x", "a b d e f", {"eqangle x a x b d e d f"}},
      {"eqdia_quadrangle", "a b c d", "", {"cong a c b d"}},
      {"eqdistance", "x", "a b c", {"cong x a b c"}},
      {"excenter", "x", "a b c", {"eqangle a b a x a x a c", "eqangle b a b x b x b c", "eqangle c a c x c x c b"}},
      {"foot", "x", "a b c", {"perp x a b c", "coll x b c"}},
      {"ieq_triangle", "a b c", "", {"cong a b b c", "cong b c c a"}},
      {"incenter", "x", "a b c", {"eqangle a b a x a x a c", "eqangle b a b x b x b c", "eqangle c a c x c x c b"}},
      {"intersection_lc", "x", "a o b", {"coll x a b", "cong o b o x"}},
      {"intersection_ll", "x", "a b c d", {"coll x a b", "coll x c d"}},
      {"intersection_lp", "x", "a b c m n", {"coll x a b", "para c x m n"}},
      {"intersection_lt", "x", "a b c d e", {"coll x a b", "perp x c d e"}},
      {"intersection_pp", "x", "a b c d e f", {"para x a b c", "para x d e f"}},
      {"intersection_tt", "x", "a b c d e f", {"perp x a b c", "perp x d e f"}},
      {"iso_triangle", "a b c", "", {"cong a b a c"}},
      {"isquare", "a b c d", "",
       {"perp a b b c", "cong a b b c", "para a b c d", "para a d b c", "perp a d d c", "cong b c c d", "cong c d d a"}},
      {"lc_tangent", "x", "a o", {"perp a x a o"}},
      {"midpoint", "x", "a b", {"midp x a b", "coll x a b"}},
      {"mirror", "x", "a b", {"midp b a x", "coll b a x"}},
      {"ninepoints", "x y z i", "a b c",
       {"midp x b c", "coll x b c", "midp y c a", "coll y c a", "midp z a b", "coll z a b", "cong i x i y",
        "cong i y i z"}},
      {"nsquare", "x", "a b", {"cong x a a b", "perp x a a b"}},
      {"on_aline", "x", "a b c d e", {"eqangle a x a b d c d e"}},
      {"on_bline", "x", "a b", {"cong x a x b"}},
      {"on_circle", "x", "o a", {"cong o x o a"}},
      {"on_circum", "x", "a b c", {"cyclic a b c x"}},
      {"on_dia", "x", "a b", {"perp a x b x"}},
      {"on_line", "x", "a b", {"coll x a b"}},
      {"on_pline", "x", "a b c", {"para x a b c"}},
      {"on_tline", "x", "a b c", {"perp x a b c"}},
      {"orthocenter", "x", "a b c", {"perp x a b c", "perp x b c a", "perp x c a b"}},
      {"parallelogram", "x", "a b c", {"para a b c x", "para a x b c", "cong a b c x", "cong a x b c"}},
      {"r_trapezoid", "a b c d", "", {"para a b c d", "perp a b a d"}},
      {"r_triangle", "a b c", "", {"perp a b a c"}},
      {"rectangle", "a b c d", "", {"perp a b b c", "para a b c d", "para a d b c", "cong a c b d"}},
      {"reflect", "x", "a b c", {"cong b a b x", "cong c a c x", "perp b c a x"}},
      {"risos", "a b c", "", {"perp a b a c", "cong a b a c"}},
      {"s_angle", "x", "a b", {}},
      {"segment", "a b", "", {}},
      {"shift", "x", "b c d", {"cong x b c d", "cong x c b d"}},
      {"square", "x y", "a b",
       {"perp a b b x", "cong a b b x", "para a b x y", "para a y b x", "perp a y y x", "cong b x x y", "cong x y y a"}},
      {"tangent", "x y", "a o b", {"cong o x o b", "perp a x o x", "cong o y o b", "perp a y o y"}},
      {"trapezoid", "a b c d", "", {"para a b c d"}},
      {"triangle", "a b c", "", {}},
  };
  return table;
}

struct Compiled {
  // Each fact as (pred, slot indices); slots index new points first, then args.
  std::vector<std::pair<Pred, std::vector<int>>> facts;
};

std::vector<std::string> words(const char* s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

const std::map<std::string, Compiled, std::less<>>& compiled() {
  static const auto table = [] {
    std::map<std::string, Compiled, std::less<>> out;
    for (const auto& t : fact_templates()) {
      std::vector<std::string> slots = words(t.new_names);
      for (auto& a : words(t.arg_names)) slots.push_back(a);
      Compiled c;
      for (const char* f : t.facts) {
        auto w = words(f);
        std::vector<int> idx;
        for (std::size_t i = 1; i < w.size(); ++i)
          idx.push_back(static_cast<int>(std::find(slots.begin(), slots.end(), w[i]) - slots.begin()));
        std::vector<int> copy = idx;
        Pred p{};
        normalize_atom(w[0], copy, p);
        c.facts.emplace_back(p, copy);
      }
      out.emplace(t.relation, std::move(c));
    }
    return out;
  }();
  return table;
}

}  // namespace

std::vector<PointId> clause_arg_ids(const Premise& premise, const Clause& clause) {
  std::vector<PointId> out;
  for (const auto& a : clause.args) {
    auto id = premise.index_of(a.name);
    if (!id) throw Error(ErrorCode::UndefinedPoint, "'" + a.name + "'");
    out.push_back(*id);
  }
  return out;
}

std::vector<PointId> construction_point_ids(const Premise& premise, std::size_t index) {
  std::size_t first = 0;
  for (std::size_t k = 0; k < index; ++k) first += premise.constructions[k].new_points.size();
  std::vector<PointId> out;
  for (std::size_t j = 0; j < premise.constructions[index].new_points.size(); ++j)
    out.push_back(static_cast<PointId>(first + j));
  return out;
}

std::vector<Fact> clause_facts(const Clause& clause, std::span<const PointId> new_ids, std::span<const PointId> arg_ids) {
  const auto& table = compiled();
  auto it = table.find(clause.relation);
  if (it == table.end()) throw Error(ErrorCode::UnknownTemplate, "'" + clause.relation + "'");
  std::vector<PointId> slots(new_ids.begin(), new_ids.end());
  slots.insert(slots.end(), arg_ids.begin(), arg_ids.end());
  std::vector<Fact> out;
  for (const auto& [pred, idx] : it->second.facts) {
    std::vector<PointId> a;
    for (int i : idx) a.push_back(slots.at(static_cast<std::size_t>(i)));
    out.emplace_back(pred, std::span<const PointId>(a));
  }
  return out;
}

std::vector<PremiseFact> premise_facts(const Premise& premise) {
  std::vector<PremiseFact> out;
  std::set<Fact> seen;
  auto add = [&](const Fact& f, std::size_t k) {
    if (!is_meaningful(f)) return;
    Fact c = canonical(f);
    if (seen.insert(c).second) out.push_back({c, k});
  };
  const std::size_t n = premise.point_count();
  // Per center, a union-find over the points known to be equidistant from it.
  std::vector<std::vector<int>> parent(n, std::vector<int>(n));
  for (auto& p : parent) std::iota(p.begin(), p.end(), 0);
  auto find = [&](std::vector<int>& p, int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  };
  std::set<Fact> emitted_circles;

  for (std::size_t k = 0; k < premise.constructions.size(); ++k) {
    const auto& c = premise.constructions[k];
    const auto new_ids = construction_point_ids(premise, k);
    for (const auto& cl : c.clauses) {
      for (const auto& f : clause_facts(cl, new_ids, clause_arg_ids(premise, cl))) {
        add(f, k);
        if (f.pred != Pred::cong) continue;
        const auto& a = f.args;
        std::array<std::pair<int, int>, 4> ends = {{{a[0], a[1]}, {a[1], a[0]}, {a[2], a[3]}, {a[3], a[2]}}};
        for (int i = 0; i < 2; ++i)
          for (int j = 2; j < 4; ++j)
            if (ends[i].first == ends[j].first && ends[i].second != ends[j].second) {
              auto& p = parent[ends[i].first];
              p[find(p, ends[i].second)] = find(p, ends[j].second);
            }
      }
    }
    for (std::size_t o = 0; o < n; ++o) {
      auto& p = parent[o];
      std::map<int, std::vector<PointId>> groups;
      for (std::size_t q = 0; q < n; ++q)
        if (q != o) groups[find(p, static_cast<int>(q))].push_back(static_cast<PointId>(q));
      for (const auto& [root, members] : groups) {
        if (members.size() < 3) continue;
        for (std::size_t i = 0; i < members.size(); ++i)
          for (std::size_t j = i + 1; j < members.size(); ++j)
            for (std::size_t l = j + 1; l < members.size(); ++l) {
              Fact f(Pred::circle, {static_cast<PointId>(o), members[i], members[j], members[l]});
              if (emitted_circles.insert(canonical(f)).second) add(f, k);
            }
      }
    }
  }
  return out;
}

}  // namespace geoforge
