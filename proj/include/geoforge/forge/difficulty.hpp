#pragma once

#include <array>
#include <span>

namespace geoforge {

struct DifficultyIndicators {
  int x1 = 0;  // tokens of the rendered EN statement
  int x2 = 0;  // constructions
  int x3 = 0;  // points
  int x4 = 0;  // proof-search depth
  int x5 = 0;  // proof length

  std::array<double, 5> values() const { return {double(x1), double(x2), double(x3), double(x4), double(x5)}; }
  friend bool operator==(const DifficultyIndicators&, const DifficultyIndicators&) = default;
};

struct DifficultyConfig {
  std::array<double, 5> weights{0.2, 0.2, 0.2, 0.2, 0.2};
  bool zscore = true;
};

// Throws Error(InvalidConfig) on negative or non-finite weights.
void validate(const DifficultyConfig& config);

// Per-indicator mean and population standard deviation over a batch.
struct IndicatorStats {
  std::array<double, 5> mean{};
  std::array<double, 5> sd{};
};

IndicatorStats indicator_stats(std::span<const DifficultyIndicators> batch);

// Weighted sum with weights normalized to sum 1 (all-zero weights give 0).
// When config.zscore is set and batch statistics are given, each indicator is
// z-scored first; an indicator with zero spread contributes 0.
double score_difficulty(const DifficultyIndicators& x, const DifficultyConfig& config,
                        const IndicatorStats* batch = nullptr);

}  // namespace geoforge
