#pragma once

// Linear equations contributed by a fact to the angle and length systems.

#include <array>
#include <vector>

#include "geoforge/common/rational.hpp"
#include "geoforge/kernel/fact.hpp"

namespace geoforge::detail {

// A segment {a, b}; {kTwo, kTwo} stands for the constant log 2 in length equations.
inline constexpr int kTwo = -1;

struct EqTerm {
  int a, b;
  int coef;
};

struct EqShape {
  std::vector<EqTerm> terms;
  Rational c0;  // reference constant (angles: value is c0 modulo 1; lengths: exact)
};

// Directions in units of pi: sum(coef * dir) == c0 (mod 1).
inline void angle_shapes(const Fact& f, std::vector<EqShape>& out) {
  const auto& a = f.args;
  auto two = [&](int p, int q, int r, int s, Rational c0) { out.push_back({{{p, q, 1}, {r, s, -1}}, c0}); };
  auto quad = [&](int p0, int p1, int p2, int p3, int p4, int p5, int p6, int p7) {
    out.push_back({{{p0, p1, 1}, {p2, p3, -1}, {p4, p5, -1}, {p6, p7, 1}}, Rational(0)});
  };
  switch (f.pred) {
    case Pred::coll:
      two(a[0], a[1], a[0], a[2], 0);
      two(a[0], a[1], a[1], a[2], 0);
      break;
    case Pred::midp:
      two(a[0], a[1], a[0], a[2], 0);
      two(a[0], a[1], a[1], a[2], 0);
      break;
    case Pred::para: two(a[0], a[1], a[2], a[3], 0); break;
    case Pred::perp: two(a[0], a[1], a[2], a[3], Rational(1, 2)); break;
    case Pred::eqangle: quad(a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]); break;
    case Pred::cyclic: {
      // Chord (p, q) is seen under the same directed angle from r and s.
      const int pairs[6][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}, {1, 2, 0, 3}, {1, 3, 0, 2}, {2, 3, 0, 1}};
      for (const auto& pq : pairs) {
        const int p = a[pq[0]], q = a[pq[1]], r = a[pq[2]], s = a[pq[3]];
        quad(r, p, r, q, s, p, s, q);
      }
      break;
    }
    default: break;
  }
}

// Log-lengths: sum(coef * log|seg|) == c0 exactly.
inline void length_shapes(const Fact& f, std::vector<EqShape>& out) {
  const auto& a = f.args;
  switch (f.pred) {
    case Pred::cong: out.push_back({{{a[0], a[1], 1}, {a[2], a[3], -1}}, Rational(0)}); break;
    case Pred::eqratio:
      out.push_back({{{a[0], a[1], 1}, {a[2], a[3], -1}, {a[4], a[5], -1}, {a[6], a[7], 1}}, Rational(0)});
      break;
    case Pred::midp:
      out.push_back({{{a[0], a[1], 1}, {a[0], a[2], -1}}, Rational(0)});
      out.push_back({{{a[1], a[2], 1}, {a[0], a[1], -1}, {kTwo, kTwo, -1}}, Rational(0)});
      break;
    case Pred::circle:
      out.push_back({{{a[0], a[1], 1}, {a[0], a[2], -1}}, Rational(0)});
      out.push_back({{{a[0], a[1], 1}, {a[0], a[3], -1}}, Rational(0)});
      break;
    default: break;
  }
}

inline bool in_angle_system(Pred p) {
  return p == Pred::coll || p == Pred::midp || p == Pred::para || p == Pred::perp || p == Pred::eqangle ||
         p == Pred::cyclic;
}
inline bool in_length_system(Pred p) {
  return p == Pred::cong || p == Pred::eqratio || p == Pred::midp || p == Pred::circle;
}
// Facts whose truth is a single linear statement the spans can decide.
inline bool span_decidable(Pred p) {
  return p == Pred::para || p == Pred::perp || p == Pred::eqangle || p == Pred::cong || p == Pred::eqratio;
}

}  // namespace geoforge::detail
