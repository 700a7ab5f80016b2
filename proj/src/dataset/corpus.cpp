#include "geoforge/dataset/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "geoforge/common/error.hpp"
#include "geoforge/kernel/premise_facts.hpp"
#include "geoforge/renderer/render.hpp"

namespace geoforge {

namespace {

const std::set<std::string> kCircleClauses{"circle", "on_circle", "on_circum", "intersection_lc", "lc_tangent",
                                           "tangent"};

std::string key_string(const std::vector<char>& key) {
  std::string s(key.begin(), key.end());
  std::sort(s.begin(), s.end());
  return s;
}

Rational parse_ratio(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return Rational(std::stoll(s));
  return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

}  // namespace

Json to_json(const CorpusRecord& r) {
  Json options = Json::array();
  for (const auto& o : r.options)
    options.push_back({{"label", std::string(1, o.label)},
                       {"text_en", o.text_en},
                       {"text_zh", o.text_zh},
                       {"formal", o.formal},
                       {"ratio", o.ratio},
                       {"truth", o.truth},
                       {"origin", o.origin},
                       {"proof", o.proof},
                       {"proof_length", o.proof_length}});
  return {{"id", r.id},
          {"premise_dsl", r.premise_dsl},
          {"statement_en", r.statement_en},
          {"statement_zh", r.statement_zh},
          {"options", options},
          {"answer_key", r.answer_key},
          {"difficulty_score", r.difficulty_score},
          {"difficulty_band", r.difficulty_band},
          {"proof_lengths", r.proof_lengths},
          {"solution_length", r.solution_length},
          {"indicators", r.indicators},
          {"diagram_seed", r.diagram_seed},
          {"figure_seed", r.figure_seed},
          {"figure_path", r.figure_path},
          {"relations_histogram", r.relations_histogram}};
}

CorpusRecord record_from_json(const Json& j) {
  CorpusRecord r;
  r.id = j.at("id").get<std::string>();
  r.premise_dsl = j.at("premise_dsl").get<std::string>();
  r.statement_en = j.at("statement_en").get<std::string>();
  r.statement_zh = j.at("statement_zh").get<std::string>();
  const Json& options = j.at("options");
  if (!options.is_array() || options.size() != 4) throw Error(ErrorCode::MalformedLine, "options must hold 4 entries");
  for (std::size_t i = 0; i < 4; ++i) {
    const Json& o = options[i];
    auto& out = r.options[i];
    const auto label = o.at("label").get<std::string>();
    if (label.size() != 1) throw Error(ErrorCode::MalformedLine, "bad option label " + label);
    out.label = label[0];
    out.text_en = o.at("text_en").get<std::string>();
    out.text_zh = o.at("text_zh").get<std::string>();
    out.formal = o.at("formal").get<std::string>();
    out.ratio = o.at("ratio").get<std::string>();
    out.truth = o.at("truth").get<bool>();
    out.origin = o.at("origin").get<std::string>();
    out.proof = o.at("proof").get<std::string>();
    out.proof_length = o.at("proof_length").get<int>();
  }
  r.answer_key = j.at("answer_key").get<std::string>();
  r.difficulty_score = j.at("difficulty_score").get<double>();
  r.difficulty_band = j.at("difficulty_band").get<std::string>();
  r.proof_lengths = j.at("proof_lengths").get<std::vector<int>>();
  r.solution_length = j.at("solution_length").get<int>();
  r.indicators = j.at("indicators").get<std::array<int, 5>>();
  r.diagram_seed = j.at("diagram_seed").get<std::uint64_t>();
  r.figure_seed = j.at("figure_seed").get<std::uint64_t>();
  r.figure_path = j.at("figure_path").get<std::string>();
  r.relations_histogram = j.at("relations_histogram").get<std::map<std::string, int>>();
  return r;
}

std::string relation_category(Pred p) {
  switch (p) {
    case Pred::cong: return "Equality";
    case Pred::para: return "Parallel";
    case Pred::perp: return "Vertical";
    case Pred::coll: return "Collinear";
    case Pred::cyclic:
    case Pred::circle: return "Circle-related";
    default: return "Others";
  }
}

std::map<std::string, int> relations_histogram(const Premise& premise, std::span<const Statement> options) {
  std::map<std::string, int> h;
  for (const auto& pf : premise_facts(premise)) {
    std::string cat = relation_category(pf.fact.pred);
    if (pf.fact.pred == Pred::cong) {
      for (const auto& clause : premise.constructions[pf.construction].clauses)
        if (kCircleClauses.count(clause.relation)) cat = "Circle-related";
    }
    ++h[cat];
  }
  for (const auto& s : options) ++h[relation_category(s.fact.pred)];
  return h;
}

CorpusRecord make_record(const Problem& problem, const std::string& figure_path, std::uint64_t figure_seed) {
  CorpusRecord r;
  r.id = problem.id;
  r.premise_dsl = serialize(problem.premise);
  const auto en = render_text(problem, Lang::en);
  const auto zh = render_text(problem, Lang::zh);
  r.statement_en = en.statement;
  r.statement_zh = zh.statement;
  const auto names = problem.premise.point_names();
  std::vector<Statement> statements;
  for (std::size_t i = 0; i < 4; ++i) {
    const Option& o = problem.options[i];
    auto& out = r.options[i];
    out.label = kLabels[i];
    out.text_en = fact_text(o.statement.fact, names, Lang::en, o.statement.ratio);
    out.text_zh = fact_text(o.statement.fact, names, Lang::zh, o.statement.ratio);
    out.formal = format_fact(o.statement.fact, names);
    out.ratio = o.statement.ratio.str();
    out.truth = o.truth;
    out.origin = std::string(origin_name(o.origin));
    out.proof = o.proof;
    out.proof_length = o.trace ? o.trace->proof_length : 0;
    if (o.truth) r.proof_lengths.push_back(out.proof_length);
    statements.push_back(o.statement);
  }
  r.answer_key = key_string(problem.answer_key);
  r.difficulty_score = problem.difficulty_score;
  r.difficulty_band = problem.difficulty_band;
  r.solution_length = problem.solution_length;
  const auto& x = problem.indicators;
  r.indicators = {x.x1, x.x2, x.x3, x.x4, x.x5};
  r.diagram_seed = problem.diagram_seed;
  r.figure_seed = figure_seed;
  r.figure_path = figure_path;
  r.relations_histogram = relations_histogram(problem.premise, statements);
  return r;
}

Problem problem_from_record(const CorpusRecord& r) {
  Problem p;
  p.id = r.id;
  p.premise = parse_premise(r.premise_dsl);
  const auto lookup = [&](std::string_view n) { return p.premise.index_of(n); };
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& o = r.options[i];
    auto& out = p.options[i];
    out.statement.fact = canonical(parse_fact(o.formal, lookup));
    out.statement.ratio = parse_ratio(o.ratio);
    out.truth = o.truth;
    out.origin = origin_from_name(o.origin).value_or(Origin::provable);
    out.proof = o.proof;
    if (o.truth) p.answer_key.push_back(o.label);
  }
  p.difficulty_score = r.difficulty_score;
  p.difficulty_band = r.difficulty_band;
  p.indicators = {r.indicators[0], r.indicators[1], r.indicators[2], r.indicators[3], r.indicators[4]};
  p.diagram_seed = r.diagram_seed;
  p.solution_length = r.solution_length;
  return p;
}

bool has_full_coverage(const CorpusRecord& r) {
  if (r.figure_path.empty() || r.statement_en.empty() || r.statement_zh.empty() || r.answer_key.empty()) return false;
  for (const auto& o : r.options) {
    if (o.text_en.empty() || o.text_zh.empty()) return false;
    if (o.truth && o.proof.empty()) return false;
  }
  return true;
}

void write_corpus(std::span<const CorpusRecord> records, const std::filesystem::path& path) {
  JsonlWriter w(path, kCorpusSchema, kCorpusSchemaVersion);
  for (const auto& r : records) w.write(to_json(r));
  w.close();
}

std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path, int expected_version) {
  std::vector<CorpusRecord> out;
  read_jsonl(path, kCorpusSchema, expected_version, [&](const Json& j, int) { out.push_back(record_from_json(j)); });
  return out;
}

void validate(const SplitSpec& spec) {
  double sum = 0;
  for (double r : spec.ratios) {
    if (!(r >= 0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidConfig, "split ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::InvalidConfig, "split ratios must sum to 1");
}

std::vector<int> band_indices(std::span<const double> scores, std::span<const std::string> ids, const SplitSpec& spec) {
  validate(spec);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return ids[a] < ids[b];
  });
  const auto cut = [&](double r) {
    return static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 1e-9));
  };
  const std::size_t c1 = cut(spec.ratios[0]);
  const std::size_t c2 = std::max(c1, cut(spec.ratios[0] + spec.ratios[1]));
  std::vector<int> band(n);
  for (std::size_t k = 0; k < n; ++k) band[order[k]] = k < c1 ? 0 : k < c2 ? 1 : 2;
  return band;
}

void stratify(std::span<CorpusRecord> records, const SplitSpec& spec) {
  std::vector<double> scores;
  std::vector<std::string> ids;
  for (const auto& r : records) {
    if (!std::isfinite(r.difficulty_score)) throw Error(ErrorCode::InvalidConfig, "non-finite score for " + r.id);
    scores.push_back(r.difficulty_score);
    ids.push_back(r.id);
  }
  const auto band = band_indices(scores, ids, spec);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].difficulty_band = kBands[band[i]];
}

CorpusStats corpus_stats(std::span<const CorpusRecord> records) {
  CorpusStats s;
  for (const char* c : kRelationCategories) s.relations[c] = 0;
  for (const char* b : kBands) s.bands[b] = 0;
  s.problems = records.size();
  if (records.empty()) return s;
  double proof = 0, option_proof = 0, words = 0, key = 0, covered = 0;
  long true_options = 0;
  for (const auto& r : records) {
    for (const auto& [cat, count] : r.relations_histogram) s.relations[cat] += count;
    if (!r.difficulty_band.empty()) ++s.bands[r.difficulty_band];
    ++s.proof_length_histogram[r.solution_length];
    proof += r.solution_length;
    s.max_proof_length = std::max(s.max_proof_length, r.solution_length);
    for (int l : r.proof_lengths) option_proof += l, ++true_options;
    words += token_count(r.statement_en);
    key += static_cast<double>(r.answer_key.size());
    covered += has_full_coverage(r);
  }
  const double n = static_cast<double>(records.size());
  s.avg_proof_length = proof / n;
  s.avg_option_proof_length = true_options ? option_proof / static_cast<double>(true_options) : 0.0;
  s.avg_description_length = words / n;
  s.avg_key_size = key / n;
  s.coverage = covered / n;
  return s;
}

Json to_json(const CorpusStats& s) {
  Json hist = Json::object();
  for (const auto& [len, count] : s.proof_length_histogram) hist[std::to_string(len)] = count;
  return {{"problems", s.problems},
          {"relations", s.relations},
          {"bands", s.bands},
          {"proof_length_histogram", hist},
          {"avg_proof_length", s.avg_proof_length},
          {"avg_option_proof_length", s.avg_option_proof_length},
          {"max_proof_length", s.max_proof_length},
          {"avg_description_length", s.avg_description_length},
          {"avg_key_size", s.avg_key_size},
          {"coverage", s.coverage},
          {"reference",
           {{"avg_proof_length", kReferenceProofLength},
            {"avg_description_length", kReferenceDescriptionLength},
            {"proof_length_delta", s.problems ? s.avg_proof_length - kReferenceProofLength : 0.0},
            {"description_length_delta",
             s.problems ? s.avg_description_length - kReferenceDescriptionLength : 0.0}}}};
}

}  // namespace geoforge
