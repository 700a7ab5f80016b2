#include "geoforge/engine/algebra.hpp"

#include <algorithm>
#include <map>

#include "geoforge/common/rng.hpp"

namespace geoforge {

namespace {

using Terms = std::vector<std::pair<int, Rational>>;

// a + s * b over sorted sparse vectors.
Terms axpy(const Terms& a, const Rational& s, const Terms& b) {
  Terms out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.emplace_back(b[j].first, s * b[j].second);
      ++j;
    } else {
      Rational v = a[i].second + s * b[j].second;
      if (!v.is_zero()) out.emplace_back(a[i].first, v);
      ++i;
      ++j;
    }
  }
  return out;
}

const Rational* coef_of(const Terms& t, int var) {
  auto it = std::lower_bound(t.begin(), t.end(), var, [](const auto& p, int v) { return p.first < v; });
  return it != t.end() && it->first == var ? &it->second : nullptr;
}

}  // namespace

LinearSystem::LinearSystem(int nvars)
    : pivot_row_(static_cast<std::size_t>(nvars), -1),
      weight_(static_cast<std::size_t>(nvars)),
      fp_cache_(static_cast<std::size_t>(nvars)),
      fp_valid_(static_cast<std::size_t>(nvars), 0) {
  std::uint64_t s = 0x5eed;
  for (auto& w : weight_) {
    s = mix64(s);
    w = s % kMod;
  }
}

std::uint64_t LinearSystem::mod_mul(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  std::uint64_t lo = static_cast<std::uint64_t>(p & kMod);
  std::uint64_t hi = static_cast<std::uint64_t>(p >> 61);
  return mod_add(lo, hi);
}

std::uint64_t LinearSystem::to_mod(const Rational& r) {
  auto m = [](std::int64_t v) {
    const std::int64_t k = static_cast<std::int64_t>(kMod);
    std::int64_t x = v % k;
    if (x < 0) x += k;
    return static_cast<std::uint64_t>(x);
  };
  // Inverse of the denominator by Fermat.
  std::uint64_t base = m(r.den()), inv = 1, e = kMod - 2;
  while (e) {
    if (e & 1) inv = mod_mul(inv, base);
    base = mod_mul(base, base);
    e >>= 1;
  }
  return mod_mul(m(r.num()), inv);
}

LinearSystem::Reduced LinearSystem::reduce(const LinExpr& expr) const {
  Reduced out;
  Terms acc;
  Rational constant;
  for (const auto& [v, c] : expr.terms) {
    const int r = pivot_row_[static_cast<std::size_t>(v)];
    if (r < 0) {
      acc = axpy(acc, Rational(1), Terms{{v, c}});
      continue;
    }
    const Row& row = rows_[static_cast<std::size_t>(r)];
    // x_p = rhs - sum(row terms)
    acc = axpy(acc, -c, row.terms);
    constant += c * row.rhs;
    out.why.merge(row.why);
  }
  out.rest.terms = std::move(acc);
  out.rest.constant = constant;
  return out;
}

bool LinearSystem::add(const LinExpr& eq, std::uint32_t source) {
  try {
    Reduced red = reduce(eq);
    // reduce() moved the pivot parts to the constant side: remaining terms = eq.constant - constant.
    Terms t = std::move(red.rest.terms);
    Rational rhs = eq.constant - red.rest.constant;
    if (t.empty()) return false;
    const auto [pivot, pc] = t.back();
    Row row;
    row.pivot = pivot;
    const Rational inv = Rational(1) / pc;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) row.terms.emplace_back(t[i].first, t[i].second * inv);
    row.rhs = rhs * inv;
    row.why = std::move(red.why);
    row.why.set(source);

    std::vector<std::pair<std::size_t, Row>> updates;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const Rational* c = coef_of(rows_[r].terms, pivot);
      if (!c) continue;
      Row nr = rows_[r];
      const Rational k = *c;
      // x_p -> -(row.terms) + row.rhs
      Terms without;
      for (const auto& p : nr.terms)
        if (p.first != pivot) without.push_back(p);
      nr.terms = axpy(without, -k, row.terms);
      nr.rhs = nr.rhs - k * row.rhs;
      nr.why.merge(row.why);
      updates.emplace_back(r, std::move(nr));
    }
    for (auto& [r, nr] : updates) rows_[r] = std::move(nr);
    pivot_row_[static_cast<std::size_t>(pivot)] = static_cast<int>(rows_.size());
    rows_.push_back(std::move(row));
    std::fill(fp_valid_.begin(), fp_valid_.end(), 0);
    return true;
  } catch (const RationalOverflow&) {
    return false;
  }
}

std::uint64_t LinearSystem::fingerprint(int var) const {
  const auto v = static_cast<std::size_t>(var);
  if (fp_valid_[v]) return fp_cache_[v];
  std::uint64_t h = 0;
  const int r = pivot_row_[v];
  if (r < 0) {
    h = weight_[v];
  } else {
    for (const auto& [u, c] : rows_[static_cast<std::size_t>(r)].terms)
      h = mod_add(h, mod_neg(mod_mul(to_mod(c), weight_[static_cast<std::size_t>(u)])));
  }
  fp_cache_[v] = h;
  fp_valid_[v] = 1;
  return h;
}

Rational LinearSystem::nf_constant(int var) const {
  const int r = pivot_row_[static_cast<std::size_t>(var)];
  return r < 0 ? Rational(0) : rows_[static_cast<std::size_t>(r)].rhs;
}

}  // namespace geoforge
