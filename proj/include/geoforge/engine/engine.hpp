#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "geoforge/engine/rules.hpp"
#include "geoforge/kernel/diagram.hpp"
#include "geoforge/kernel/fact.hpp"
#include "geoforge/kernel/premise.hpp"

namespace geoforge {

using FactId = std::uint32_t;

enum class DepKind : std::uint8_t { premise, rule, algebra };

struct Dependency {
  DepKind kind = DepKind::premise;
  int rule = -1;  // index into the rule set for DepKind::rule
  std::vector<FactId> premises;
};

struct FactRecord {
  Fact fact;  // canonical
  int level = 0;
  Dependency dep;
};

struct EngineConfig {
  int max_level = 8;
  bool algebra = true;
  // Safety valve against runaway closures; saturation stops (flagged) past it.
  std::size_t max_facts = 60000;
};

// A fact proposed by one derivation step, before it is committed.
struct Derivation {
  Fact fact;  // canonical
  Dependency dep;
};

struct SaturationState {
  std::vector<FactRecord> facts;  // in derivation order; ids index this vector
  std::unordered_map<Fact, FactId, FactHash> index;
  int level = 0;       // number of completed levels
  bool fixpoint = false;  // stopped because a level produced nothing new
  bool truncated = false;  // stopped at max_facts

  std::optional<FactId> find(const Fact& f) const;  // canonicalizes f
  bool contains(const Fact& f) const { return find(f).has_value(); }
  std::size_t premise_count() const;
};

class Engine {
public:
  Engine(const Premise& premise, const Diagram& diagram, const RuleSet& rules, EngineConfig config = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Rule conclusions derivable from the current fact set that are not yet known
  // (and, with algebra on, not already implied by the linear spans).
  std::vector<Derivation> match_theorems();
  // Facts implied by the angle / length spans that are not yet known.
  std::vector<Derivation> derive_algebra();
  // One level: match, derive, commit. Returns false when nothing new was found.
  bool step();
  const SaturationState& run();

  const SaturationState& state() const;
  const std::vector<std::string>& point_names() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Throws Error(UnsoundDerivation) if a derived fact fails the numeric check.
SaturationState saturate(const Premise& premise, const Diagram& diagram, const RuleSet& rules,
                         const EngineConfig& config = {});

struct ProofStep {
  FactId fact;
  Dependency dep;
};

struct ProofTrace {
  Fact conclusion;
  std::vector<ProofStep> steps;  // premises of each step are premise facts or earlier steps
  int proof_length = 0;          // number of steps
  int search_depth = 0;          // level at which the conclusion was first derived
};

// Backward traversal over first-recorded derivations. Throws Error(NotDerived).
ProofTrace extract_proof(const SaturationState& state, const Fact& conclusion);

// Re-checks a trace from premise facts using only each step's recorded
// supports: rule steps by re-binding the rule, algebra steps against a fresh
// span of the supporting facts. On failure names the first bad step.
bool replay_proof(const ProofTrace& trace, const SaturationState& state, const Diagram& diagram, const RuleSet& rules,
                  std::string* failure = nullptr);

// Human-readable multi-line rendering of a trace.
std::string format_proof(const ProofTrace& trace, const SaturationState& state, const RuleSet& rules,
                         const std::vector<std::string>& names);

}  // namespace geoforge
