#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "geoforge/common/rational.hpp"

namespace geoforge {

// Growable bitset over fact ids.
class Bits {
public:
  void set(std::size_t i) {
    if (i / 64 >= w_.size()) w_.resize(i / 64 + 1, 0);
    w_[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  void merge(const Bits& o) {
    if (o.w_.size() > w_.size()) w_.resize(o.w_.size(), 0);
    for (std::size_t i = 0; i < o.w_.size(); ++i) w_[i] |= o.w_[i];
  }
  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < w_.size(); ++i)
      for (std::uint64_t b = w_[i]; b; b &= b - 1) f(i * 64 + static_cast<std::size_t>(__builtin_ctzll(b)));
  }
  bool empty() const {
    for (auto x : w_)
      if (x) return false;
    return true;
  }

private:
  std::vector<std::uint64_t> w_;
};

// Sum of coef * x_var; terms sorted by var, no zero coefficients.
struct LinExpr {
  std::vector<std::pair<int, Rational>> terms;
  Rational constant;  // right-hand side when used as an equation
};

// Exact reduced row echelon form over Q, with each row remembering which
// source equations were combined into it.
class LinearSystem {
public:
  explicit LinearSystem(int nvars = 0);

  int vars() const { return static_cast<int>(pivot_row_.size()); }
  int rank() const { return static_cast<int>(rows_.size()); }

  // Adds `expr = expr.constant`. Returns false when the equation is already
  // implied, or when exact arithmetic would overflow (the system is then unchanged).
  bool add(const LinExpr& eq, std::uint32_t source);

  struct Reduced {
    LinExpr rest;  // linear part over free variables; constant = implied value
    Bits why;      // source equations used
  };
  // Normal form of `expr` (its constant is ignored): if rest.terms is empty,
  // the span fixes expr to rest.constant.
  Reduced reduce(const LinExpr& expr) const;

  // Hash of the linear part of a variable's normal form; two combinations
  // are (with overwhelming probability) equal iff their hashes agree.
  std::uint64_t fingerprint(int var) const;
  // Exact constant part of a variable's normal form.
  Rational nf_constant(int var) const;

  static constexpr std::uint64_t kMod = (std::uint64_t{1} << 61) - 1;
  static std::uint64_t mod_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a + b;
    return s >= kMod ? s - kMod : s;
  }
  static std::uint64_t mod_neg(std::uint64_t a) { return a == 0 ? 0 : kMod - a; }
  static std::uint64_t mod_mul(std::uint64_t a, std::uint64_t b);
  static std::uint64_t to_mod(const Rational& r);

private:
  struct Row {
    int pivot;
    std::vector<std::pair<int, Rational>> terms;  // excludes the pivot
    Rational rhs;
    Bits why;
  };

  std::vector<int> pivot_row_;  // var -> row or -1
  std::vector<Row> rows_;
  std::vector<std::uint64_t> weight_;
  mutable std::vector<std::uint64_t> fp_cache_;
  mutable std::vector<char> fp_valid_;
};

}  // namespace geoforge
