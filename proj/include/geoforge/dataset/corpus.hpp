#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "geoforge/dataset/jsonl.hpp"
#include "geoforge/forge/forge.hpp"

namespace geoforge {

inline constexpr int kCorpusSchemaVersion = 1;
inline constexpr const char* kCorpusSchema = "geoforge-corpus";

struct OptionRecord {
  char label = 'A';
  std::string text_en;
  std::string text_zh;
  std::string formal;   // "cong a b c d"
  std::string ratio = "1";
  bool truth = false;
  std::string origin;   // provable, negation, ratio_perturbation, rewrite
  std::string proof;    // true options only
  int proof_length = 0;
  friend bool operator==(const OptionRecord&, const OptionRecord&) = default;
};

struct CorpusRecord {
  std::string id;
  std::string premise_dsl;
  std::string statement_en;
  std::string statement_zh;
  std::array<OptionRecord, 4> options;
  std::string answer_key;  // sorted labels, e.g. "AC"
  double difficulty_score = 0.0;
  std::string difficulty_band;
  std::vector<int> proof_lengths;  // per true option, in label order
  int solution_length = 0;
  std::array<int, 5> indicators{};
  std::uint64_t diagram_seed = 0;
  std::uint64_t figure_seed = 0;
  std::string figure_path;
  std::map<std::string, int> relations_histogram;  // relation category -> count
  friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

Json to_json(const CorpusRecord& r);
// Throws Error(MalformedLine) on missing or mistyped fields.
CorpusRecord record_from_json(const Json& j);

// Taxonomy of relations: Equality, Parallel, Vertical, Collinear,
// Circle-related, Others.
inline constexpr std::array<const char*, 6> kRelationCategories{"Equality",  "Parallel",       "Vertical",
                                                                "Collinear", "Circle-related", "Others"};
std::string relation_category(Pred p);
// Premise relations plus the four options. A cong introduced by a circle
// construction (circle, on_circle, on_circum, intersection_lc, lc_tangent, tangent)
// counts as Circle-related.
std::map<std::string, int> relations_histogram(const Premise& premise, std::span<const Statement> options);

// Record of an assembled problem whose figure is instantiate(premise, figure_seed).
CorpusRecord make_record(const Problem& problem, const std::string& figure_path, std::uint64_t figure_seed);

// Inverse of make_record up to proof traces (restored as text only).
Problem problem_from_record(const CorpusRecord& r);

// Image, solution, EN and ZH are present and the key is non-empty.
bool has_full_coverage(const CorpusRecord& r);

// Records are written in the given order. Throws Error(Io).
void write_corpus(std::span<const CorpusRecord> records, const std::filesystem::path& path);
// Throws Error(Io), Error(SchemaMismatch), Error(MalformedLine).
std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path, int expected_version = kCorpusSchemaVersion);

struct SplitSpec {
  std::array<double, 3> ratios{0.3, 0.5, 0.2};  // easy, medium, hard
};

// Throws Error(InvalidConfig) unless the ratios are non-negative and sum to 1.
void validate(const SplitSpec& spec);

inline constexpr std::array<const char*, 3> kBands{"easy", "medium", "hard"};

// Band index per item: sorted by (score, id), the first floor(r0·n) are easy,
// up to floor((r0+r1)·n) medium, the rest hard.
std::vector<int> band_indices(std::span<const double> scores, std::span<const std::string> ids, const SplitSpec& spec);

void stratify(std::span<CorpusRecord> records, const SplitSpec& spec = {});

struct CorpusStats {
  std::size_t problems = 0;
  std::map<std::string, long> relations;  // every category present, zero when unused
  std::map<std::string, long> bands;
  std::map<int, long> proof_length_histogram;  // solution length -> problems
  double avg_proof_length = 0.0;               // mean solution length
  double avg_option_proof_length = 0.0;        // mean over true options
  int max_proof_length = 0;
  double avg_description_length = 0.0;        // words in the EN statement
  double avg_key_size = 0.0;
  double coverage = 0.0;                       // fraction with full coverage
};

inline constexpr double kReferenceProofLength = 16.72;
inline constexpr double kReferenceDescriptionLength = 39.15;

CorpusStats corpus_stats(std::span<const CorpusRecord> records);
Json to_json(const CorpusStats& s);

}  // namespace geoforge
