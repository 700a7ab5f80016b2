#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geoforge {

using PointId = std::uint8_t;

enum class Pred : std::uint8_t {
  coll,
  ncoll,
  para,
  npara,
  perp,
  cong,
  cyclic,
  eqangle,
  eqratio,
  midp,
  circle,
  sameside,
};

inline constexpr int kPredCount = 12;
inline constexpr std::size_t kMaxFactArgs = 8;

std::string_view pred_name(Pred p);

// Resolves a surface name (including the eqangle6 / eqratio6 / eqratio3 spellings,
// case-insensitively) to a predicate. Returns nullopt for unknown names.
std::optional<Pred> pred_from_name(std::string_view name);

// Canonical arity; ncoll additionally accepts 4 arguments ("not all collinear").
int pred_arity(Pred p);
bool arity_ok(Pred p, std::size_t n);

// ncoll, npara and sameside are never stored; they are evaluated on a diagram.
// sameside A B C D E F: A lies relative to B and C (between or outside) as D
// lies relative to E and F.
constexpr bool is_side_condition(Pred p) {
  return p == Pred::ncoll || p == Pred::npara || p == Pred::sameside;
}

struct Fact {
  Pred pred = Pred::coll;
  std::uint8_t n = 0;
  std::array<PointId, kMaxFactArgs> args{};

  Fact() = default;
  Fact(Pred p, std::initializer_list<PointId> a);
  Fact(Pred p, std::span<const PointId> a);

  std::span<const PointId> view() const { return {args.data(), n}; }
  friend bool operator==(const Fact&, const Fact&) = default;
  friend auto operator<=>(const Fact&, const Fact&) = default;
};

struct FactHash {
  std::size_t operator()(const Fact& f) const noexcept;
};

using ArgTuple = std::array<PointId, kMaxFactArgs>;

// Rewrites surface spellings into canonical predicates:
//   eqangle6 -> eqangle, eqratio6 -> eqratio,
//   eqratio3 A B C D M N -> eqratio M A M C N B N D.
// Works for point ids and for rule variables alike.
template <typename T>
bool normalize_atom(std::string_view name, std::vector<T>& args, Pred& out) {
  auto p = pred_from_name(name);
  if (!p) return false;
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
  if (lower == "eqratio3" && args.size() == 6) {
    const T a = args[0], b = args[1], c = args[2], d = args[3], m = args[4], nn = args[5];
    args = {m, a, m, c, nn, b, nn, d};
  }
  out = *p;
  return true;
}

// Canonical representative under the predicate's symmetry group.
Fact canonical(const Fact& f);

// Every argument ordering that denotes the same fact (the symmetry orbit).
std::vector<ArgTuple> variants(const Fact& f);

// Structural sanity: distinct points where the predicate needs them and
// non-degenerate lines/segments. Trivially-true statements (e.g. para A B A B,
// eqangle whose two sides cancel identically) are rejected as well.
bool is_meaningful(const Fact& f);

std::string format_fact(const Fact& f, std::span<const std::string> names);

// Parses "pred a b c ..." with point names resolved by `lookup`.
// Throws Error(UnknownPredicate) / Error(ArityMismatch) / Error(UndefinedPoint).
Fact parse_fact(std::string_view text, const std::function<std::optional<PointId>(std::string_view)>& lookup);

}  // namespace geoforge
