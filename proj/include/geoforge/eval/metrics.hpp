#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geoforge/dataset/corpus.hpp"

namespace geoforge {

// Label subsets of {A, B, C, D} as 4-bit masks (bit 0 = A).
using LabelMask = std::uint8_t;

LabelMask mask_from_labels(std::string_view labels);
std::string labels_from_mask(LabelMask m);

struct Prediction {
  std::string problem_id;
  std::string raw_text;
  std::optional<std::string> predicted;  // sorted labels; nullopt is NO_ANSWER
  bool truncated = false;
  std::optional<double> latency_ms;
  std::optional<int> prompt_tokens;
  std::optional<int> completion_tokens;
  std::string error;  // endpoint failure after retries
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

inline constexpr int kPredictionSchemaVersion = 1;
inline constexpr const char* kPredictionSchema = "geoforge-predictions";

Json to_json(const Prediction& p);
Prediction prediction_from_json(const Json& j);
void write_predictions(std::span<const Prediction> preds, const std::filesystem::path& path);
// Later lines for the same id replace earlier ones; a torn final line is ignored.
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

// (1) the last `ANSWER: <labels>` line, (2) the last standalone run of labels,
// (3) NO_ANSWER. Labels are deduplicated and sorted.
std::optional<std::string> parse_answer(std::string_view raw_text);

enum class Outcome { right_answer, wrong_answer, no_answer, out_of_length };
inline constexpr std::array<const char*, 4> kOutcomeNames{"right_answer", "wrong_answer", "no_answer",
                                                          "out_of_length"};

Outcome classify_outcome(const Prediction& prediction, std::string_view answer_key);

struct GoldItem {
  std::string id;
  std::string answer_key;
  std::string band;  // easy, medium, hard or empty
};

std::vector<GoldItem> gold_items(std::span<const CorpusRecord> records);

struct MetricsConfig {
  bool micro = false;                        // pool counts instead of averaging per problem
  bool avg_selected_counts_no_answer = false;  // count NO_ANSWER and truncated records as 0 selected
};

struct MetricsReport {
  std::size_t n = 0;
  double em_all = 0, em_easy = 0, em_medium = 0, em_hard = 0;
  std::array<std::size_t, 3> band_n{};
  double precision = 0, recall = 0, f1 = 0;
  double hamming_loss = 0, hamming_accuracy = 0;
  double avg_selected = 0;
  std::array<std::size_t, 4> outcome_counts{};  // in Outcome order
};

// Option-level metrics treat NO_ANSWER and truncated outputs as the empty set.
// Throws Error(UnknownProblemId).
MetricsReport compute_metrics(std::span<const Prediction> predictions, std::span<const GoldItem> gold,
                              const MetricsConfig& config = {});

Json to_json(const MetricsReport& r);
// Fixed-width row in the order EM, EM easy/medium/hard, P, R, F1, HA, Avg #Sel.
std::string format_table(const std::vector<std::pair<std::string, MetricsReport>>& rows);

enum class SubsetLaw { uniform16, uniform_nonempty, empty };
std::optional<SubsetLaw> subset_law_from_name(std::string_view name);
std::string_view subset_law_name(SubsetLaw law);

// `trials` draws, trial t answering gold[t mod n] with a subset from `law`.
MetricsReport random_baseline(std::span<const GoldItem> gold, std::size_t trials, std::uint64_t seed, SubsetLaw law,
                              const MetricsConfig& config = {});

}  // namespace geoforge
