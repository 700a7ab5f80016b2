#include "geoforge/kernel/fact.hpp"

#include <algorithm>
#include <sstream>

#include "geoforge/common/error.hpp"

namespace geoforge {

namespace {

constexpr std::array<std::string_view, kPredCount> kNames = {
    "coll", "ncoll", "para", "npara", "perp", "cong", "cyclic", "eqangle", "eqratio", "midp", "circle", "sameside"};

using Pair = std::array<PointId, 2>;

Pair sorted_pair(PointId a, PointId b) { return a < b ? Pair{a, b} : Pair{b, a}; }

// Signed-sum preserving permutations of the four sides of d1 - d2 - d3 + d4 = 0.
constexpr std::array<std::array<int, 4>, 8> kQuadPerms = {{
    {0, 1, 2, 3}, {3, 1, 2, 0}, {0, 2, 1, 3}, {3, 2, 1, 0},
    {1, 0, 3, 2}, {2, 0, 3, 1}, {1, 3, 0, 2}, {2, 3, 0, 1},
}};

std::string lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
  return out;
}

}  // namespace

std::string_view pred_name(Pred p) { return kNames[static_cast<std::size_t>(p)]; }

std::optional<Pred> pred_from_name(std::string_view name) {
  const std::string l = lower(name);
  if (l == "eqangle6") return Pred::eqangle;
  if (l == "eqratio6" || l == "eqratio3") return Pred::eqratio;
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == l) return static_cast<Pred>(i);
  return std::nullopt;
}

int pred_arity(Pred p) {
  switch (p) {
    case Pred::coll:
    case Pred::ncoll:
    case Pred::midp: return 3;
    case Pred::para:
    case Pred::npara:
    case Pred::perp:
    case Pred::cong:
    case Pred::cyclic:
    case Pred::circle: return 4;
    case Pred::sameside: return 6;
    case Pred::eqangle:
    case Pred::eqratio: return 8;
  }
  return 0;
}

bool arity_ok(Pred p, std::size_t n) {
  if (p == Pred::ncoll) return n == 3 || n == 4;
  return static_cast<int>(n) == pred_arity(p);
}

Fact::Fact(Pred p, std::initializer_list<PointId> a) : pred(p), n(static_cast<std::uint8_t>(a.size())) {
  std::copy(a.begin(), a.end(), args.begin());
}

Fact::Fact(Pred p, std::span<const PointId> a) : pred(p), n(static_cast<std::uint8_t>(a.size())) {
  std::copy(a.begin(), a.end(), args.begin());
}

std::size_t FactHash::operator()(const Fact& f) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ static_cast<std::uint64_t>(f.pred);
  for (std::size_t i = 0; i < f.n; ++i) {
    h ^= f.args[i];
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h ^ (h >> 29));
}

Fact canonical(const Fact& f) {
  Fact out = f;
  auto& a = out.args;
  switch (f.pred) {
    case Pred::coll:
    case Pred::ncoll:
    case Pred::cyclic: std::sort(a.begin(), a.begin() + f.n); break;
    case Pred::midp: std::sort(a.begin() + 1, a.begin() + 3); break;
    case Pred::circle: std::sort(a.begin() + 1, a.begin() + 4); break;
    case Pred::para:
    case Pred::npara:
    case Pred::perp:
    case Pred::cong: {
      Pair p = sorted_pair(a[0], a[1]), q = sorted_pair(a[2], a[3]);
      if (q < p) std::swap(p, q);
      a[0] = p[0]; a[1] = p[1]; a[2] = q[0]; a[3] = q[1];
      break;
    }
    case Pred::eqangle:
    case Pred::eqratio: {
      std::array<Pair, 4> sides;
      for (int i = 0; i < 4; ++i) sides[i] = sorted_pair(a[2 * i], a[2 * i + 1]);
      std::array<Pair, 4> best{};
      bool first = true;
      for (const auto& perm : kQuadPerms) {
        std::array<Pair, 4> cand{sides[perm[0]], sides[perm[1]], sides[perm[2]], sides[perm[3]]};
        if (first || cand < best) {
          best = cand;
          first = false;
        }
      }
      for (int i = 0; i < 4; ++i) {
        a[2 * i] = best[i][0];
        a[2 * i + 1] = best[i][1];
      }
      break;
    }
    case Pred::sameside: {
      std::array<PointId, 3> t1{a[0], std::min(a[1], a[2]), std::max(a[1], a[2])};
      std::array<PointId, 3> t2{a[3], std::min(a[4], a[5]), std::max(a[4], a[5])};
      if (t2 < t1) std::swap(t1, t2);
      std::copy(t1.begin(), t1.end(), a.begin());
      std::copy(t2.begin(), t2.end(), a.begin() + 3);
      break;
    }
  }
  return out;
}

std::vector<ArgTuple> variants(const Fact& f) {
  std::vector<ArgTuple> out;
  const auto& a = f.args;
  switch (f.pred) {
    case Pred::coll:
    case Pred::ncoll:
    case Pred::cyclic: {
      ArgTuple t = a;
      std::sort(t.begin(), t.begin() + f.n);
      do {
        out.push_back(t);
      } while (std::next_permutation(t.begin(), t.begin() + f.n));
      break;
    }
    case Pred::midp:
      out.push_back(a);
      out.push_back(a);
      std::swap(out.back()[1], out.back()[2]);
      break;
    case Pred::circle: {
      ArgTuple t = a;
      std::sort(t.begin() + 1, t.begin() + 4);
      do {
        out.push_back(t);
      } while (std::next_permutation(t.begin() + 1, t.begin() + 4));
      break;
    }
    case Pred::para:
    case Pred::npara:
    case Pred::perp:
    case Pred::cong: {
      for (int swap_pairs = 0; swap_pairs < 2; ++swap_pairs)
        for (int s0 = 0; s0 < 2; ++s0)
          for (int s1 = 0; s1 < 2; ++s1) {
            Pair p{a[0], a[1]}, q{a[2], a[3]};
            if (swap_pairs) std::swap(p, q);
            if (s0) std::swap(p[0], p[1]);
            if (s1) std::swap(q[0], q[1]);
            out.push_back(ArgTuple{p[0], p[1], q[0], q[1]});
          }
      break;
    }
    case Pred::eqangle:
    case Pred::eqratio: {
      std::array<Pair, 4> sides;
      for (int i = 0; i < 4; ++i) sides[i] = Pair{a[2 * i], a[2 * i + 1]};
      for (const auto& perm : kQuadPerms)
        for (int mask = 0; mask < 16; ++mask) {
          ArgTuple t{};
          for (int i = 0; i < 4; ++i) {
            Pair s = sides[perm[i]];
            if (mask & (1 << i)) std::swap(s[0], s[1]);
            t[2 * i] = s[0];
            t[2 * i + 1] = s[1];
          }
          out.push_back(t);
        }
      break;
    }
    case Pred::sameside: {
      for (int swap_t = 0; swap_t < 2; ++swap_t)
        for (int s0 = 0; s0 < 2; ++s0)
          for (int s1 = 0; s1 < 2; ++s1) {
            std::array<PointId, 3> t1{a[0], a[1], a[2]}, t2{a[3], a[4], a[5]};
            if (swap_t) std::swap(t1, t2);
            if (s0) std::swap(t1[1], t1[2]);
            if (s1) std::swap(t2[1], t2[2]);
            out.push_back(ArgTuple{t1[0], t1[1], t1[2], t2[0], t2[1], t2[2]});
          }
      break;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

bool all_distinct(std::span<const PointId> v) {
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      if (v[i] == v[j]) return false;
  return true;
}

}  // namespace

bool is_meaningful(const Fact& f) {
  if (!arity_ok(f.pred, f.n)) return false;
  const auto& a = f.args;
  switch (f.pred) {
    case Pred::coll:
    case Pred::cyclic:
    case Pred::midp:
    case Pred::circle: return all_distinct(f.view());
    case Pred::ncoll: {
      std::vector<PointId> v(f.view().begin(), f.view().end());
      std::sort(v.begin(), v.end());
      return std::unique(v.begin(), v.end()) - v.begin() >= 3;
    }
    case Pred::para:
    case Pred::npara:
    case Pred::perp:
    case Pred::cong:
      return a[0] != a[1] && a[2] != a[3] && sorted_pair(a[0], a[1]) != sorted_pair(a[2], a[3]);
    case Pred::eqangle:
    case Pred::eqratio: {
      for (int i = 0; i < 4; ++i)
        if (a[2 * i] == a[2 * i + 1]) return false;
      std::array<Pair, 4> s;
      for (int i = 0; i < 4; ++i) s[i] = sorted_pair(a[2 * i], a[2 * i + 1]);
      // d1 - d2 - d3 + d4 vanishes identically iff {s1, s4} == {s2, s3}.
      std::array<Pair, 2> pos{s[0], s[3]}, neg{s[1], s[2]};
      std::sort(pos.begin(), pos.end());
      std::sort(neg.begin(), neg.end());
      return pos != neg;
    }
    case Pred::sameside: return a[0] != a[1] && a[0] != a[2] && a[3] != a[4] && a[3] != a[5];
  }
  return false;
}

std::string format_fact(const Fact& f, std::span<const std::string> names) {
  std::string out(pred_name(f.pred));
  for (std::size_t i = 0; i < f.n; ++i) {
    out.push_back(' ');
    const PointId id = f.args[i];
    out += id < names.size() ? names[id] : "?" + std::to_string(id);
  }
  return out;
}

Fact parse_fact(std::string_view text, const std::function<std::optional<PointId>(std::string_view)>& lookup) {
  std::istringstream in{std::string(text)};
  std::string name;
  in >> name;
  std::vector<std::string> toks;
  for (std::string t; in >> t;) toks.push_back(t);
  std::vector<std::string> args = toks;
  Pred p{};
  if (!normalize_atom(name, args, p)) throw Error(ErrorCode::UnknownPredicate, "'" + name + "'");
  if (!arity_ok(p, args.size()))
    throw Error(ErrorCode::ArityMismatch, "'" + name + "' takes " + std::to_string(pred_arity(p)) + " arguments, got " +
                                              std::to_string(toks.size()));
  std::vector<PointId> ids;
  for (const auto& t : args) {
    auto id = lookup(t);
    if (!id) throw Error(ErrorCode::UndefinedPoint, "'" + t + "' in fact '" + std::string(text) + "'");
    ids.push_back(*id);
  }
  return Fact(p, std::span<const PointId>(ids));
}

}  // namespace geoforge
