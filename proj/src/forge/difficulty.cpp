#include "geoforge/forge/difficulty.hpp"

#include <cmath>
#include <string>

#include "geoforge/common/error.hpp"

namespace geoforge {

void validate(const DifficultyConfig& config) {
  for (std::size_t i = 0; i < config.weights.size(); ++i)
    if (!std::isfinite(config.weights[i]) || config.weights[i] < 0)
      throw Error(ErrorCode::InvalidConfig, "weight w" + std::to_string(i + 1) + " must be a finite non-negative number");
}

IndicatorStats indicator_stats(std::span<const DifficultyIndicators> batch) {
  IndicatorStats s;
  if (batch.empty()) return s;
  const double n = static_cast<double>(batch.size());
  for (const auto& x : batch) {
    const auto v = x.values();
    for (int i = 0; i < 5; ++i) s.mean[i] += v[i] / n;
  }
  for (const auto& x : batch) {
    const auto v = x.values();
    for (int i = 0; i < 5; ++i) s.sd[i] += (v[i] - s.mean[i]) * (v[i] - s.mean[i]) / n;
  }
  for (auto& v : s.sd) v = std::sqrt(v);
  return s;
}

double score_difficulty(const DifficultyIndicators& x, const DifficultyConfig& config, const IndicatorStats* batch) {
  double total = 0.0;
  for (double w : config.weights) total += w;
  if (total <= 0) return 0.0;
  const auto v = x.values();
  double score = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double w = config.weights[i] / total;
    if (w == 0) continue;
    double term = v[i];
    if (config.zscore && batch) term = batch->sd[i] > 0 ? (v[i] - batch->mean[i]) / batch->sd[i] : 0.0;
    score += w * term;
  }
  return score;
}

}  // namespace geoforge
