#pragma once

#include <array>
#include <functional>
#include <unordered_set>

#include "geoforge/engine/engine.hpp"
#include "geoforge/kernel/check.hpp"

namespace geoforge::oracle {

// Naive closure: every round re-scans all rules against all known facts.
inline std::unordered_set<Fact, FactHash> brute_closure(const RuleSet& rules, const SaturationState& s,
                                                 const Diagram& d) {
  std::unordered_set<Fact, FactHash> known;
  for (const auto& r : s.facts)
    if (r.dep.kind == DepKind::premise) known.insert(r.fact);
  auto ground = [](const Atom& a, const std::array<int, 16>& v) {
    std::vector<PointId> args;
    for (std::size_t i = 0; i < a.n; ++i) args.push_back(static_cast<PointId>(v[static_cast<std::size_t>(a.vars[i])]));
    return Fact(a.pred, std::span<const PointId>(args));
  };
  for (;;) {
    std::array<std::vector<ArgTuple>, kPredCount> by_pred;
    for (const auto& f : known)
      for (const auto& t : variants(f)) by_pred[static_cast<std::size_t>(f.pred)].push_back(t);
    std::unordered_set<Fact, FactHash> fresh;
    for (const auto& rule : rules.rules) {
      std::array<int, 16> v;
      v.fill(-1);
      std::function<void(std::size_t)> go = [&](std::size_t i) {
        if (i == rule.premises.size()) {
          for (const auto& side : rule.sides) {
            const Fact f = ground(side, v);
            if (!is_meaningful(f) || !check_fact(f, d)) return;
          }
          const Fact c = ground(rule.conclusion, v);
          if (is_meaningful(c) && !known.count(canonical(c))) fresh.insert(canonical(c));
          return;
        }
        const Atom& a = rule.premises[i];
        for (const auto& t : by_pred[static_cast<std::size_t>(a.pred)]) {
          const auto saved = v;
          bool ok = true;
          for (std::size_t p = 0; p < a.n && ok; ++p) {
            int& x = v[static_cast<std::size_t>(a.vars[p])];
            if (x < 0) x = t[p];
            else ok = x == t[p];
          }
          if (ok) go(i + 1);
          v = saved;
        }
      };
      go(0);
    }
    if (fresh.empty()) return known;
    known.insert(fresh.begin(), fresh.end());
  }
}

}  // namespace geoforge::oracle
