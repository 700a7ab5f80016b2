#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoforge/common/rational.hpp"
#include "geoforge/common/rng.hpp"
#include "geoforge/engine/engine.hpp"
#include "geoforge/forge/difficulty.hpp"
#include "geoforge/kernel/diagram.hpp"
#include "geoforge/kernel/premise.hpp"

namespace geoforge {

// A fact, or for cong / eqratio a scaled variant: "AB = k × CD".
struct Statement {
  Fact fact;
  Rational ratio{1};
  friend bool operator==(const Statement&, const Statement&) = default;
};

double statement_residual(const Statement& s, const Diagram& diagram);

enum class Origin { provable, negation, ratio_perturbation, rewrite };

std::string_view origin_name(Origin o);
std::optional<Origin> origin_from_name(std::string_view name);

using Strategy = Origin;  // negation, ratio_perturbation or rewrite

struct Option {
  Statement statement;
  bool truth = false;
  Origin origin = Origin::provable;
  std::optional<ProofTrace> trace;  // true options only; ids index the closure it came from
  std::vector<Fact> support;        // premise facts the trace rests on
  std::string proof;                // formatted trace
};

// A provable conclusion with the indicators of the premise refined to it.
struct Candidate {
  Fact fact;
  ProofTrace trace;
  std::vector<Fact> support;
  DifficultyIndicators indicators;
  double score = 0.0;
};

// Non-premise conclusions whose proofs draw on more than one construction,
// scored (z-scored within the closure) and sorted hardest first, ties by fact.
std::vector<Candidate> rank_conclusions(const SaturationState& closure, const Premise& premise,
                                        const DifficultyConfig& config);

// The `count` highest-scoring eligible conclusions.
// Throws Error(InsufficientConclusions).
std::vector<Option> select_true_options(const SaturationState& closure, const Premise& premise, int count,
                                        const DifficultyConfig& config);

// A statement near `base` that is outside the closure and has residual above
// `margin` on every diagram. Candidates are tried in a fixed order, shuffled by
// `rng` when given. Throws Error(NoFalsifiableVariant).
Option make_distractor(const Fact& base, const Premise& premise, const SaturationState& closure,
                       std::span<const Diagram> diagrams, Strategy strategy, Rng* rng = nullptr,
                       double margin = kTolFalse);

// True when `candidate` differs from some form of `base` in exactly one point.
bool is_single_substitution(const Fact& base, const Fact& candidate);

// The constructions needed by the options' points and by the premise facts
// their proofs use, closed under point dependencies, in original order.
Premise refine_symbols(const Premise& premise, std::span<const Option> options);

// Point id map from `premise` into `refined` (nullopt for dropped points).
std::vector<std::optional<PointId>> point_map(const Premise& premise, const Premise& refined);

struct ForgeConfig {
  DifficultyConfig difficulty;
  std::array<double, 3> key_dist{0.45, 0.45, 0.10};  // P(|key| = 1, 2, 3)
  EngineConfig engine;
  int max_attempts = 6;
  int distractor_bases = 40;
};

void validate(const ForgeConfig& config);

// Number of true options, drawn from P(1), P(2), P(3).
int draw_key_size(const std::array<double, 3>& dist, Rng& rng);

inline constexpr std::array<char, 4> kLabels{'A', 'B', 'C', 'D'};

struct Problem {
  std::string id;
  Premise premise;  // refined
  std::array<Option, 4> options;
  std::vector<char> answer_key;
  DifficultyIndicators indicators;
  double difficulty_score = 0.0;
  std::string difficulty_band;   // assigned by stratification
  std::uint64_t diagram_seed = 0;  // instantiate(premise, diagram_seed) is the figure
  int solution_length = 0;        // distinct steps over all true options' proofs
};

// Deterministic per problem id. Throws InsufficientConclusions or
// NoFalsifiableVariant when no consistent problem was found.
Problem assemble_problem(const std::string& id, const Premise& premise, const Diagram& diagram,
                         const SaturationState& closure, const RuleSet& rules, const ForgeConfig& config);

// Re-scores a batch with batch-level statistics.
void score_batch(std::span<Problem> problems, const DifficultyConfig& config);

// Key consistency and falsifiability of an assembled problem, re-derived from
// scratch. False options are checked on the problem's three certification
// diagrams (fresh_salt 0) or on three diagrams drawn with another salt.
// Returns an empty string when the problem holds, else the reason.
std::string check_problem(const Problem& problem, const RuleSet& rules, const EngineConfig& engine,
                          std::uint64_t fresh_salt = 0);

std::uint64_t id_hash(std::string_view id);

}  // namespace geoforge
