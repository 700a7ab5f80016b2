#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "geoforge/common/error.hpp"
#include "geoforge/dataset/corpus.hpp"
#include "geoforge/kernel/premise_facts.hpp"
#include "geoforge/sampler/sampler.hpp"

using namespace geoforge;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "geoforge_dataset_test";
  fs::create_directories(dir);
  return dir / name;
}

CorpusRecord synthetic(std::mt19937_64& g, int i) {
  std::uniform_real_distribution<double> u(-3, 3);
  CorpusRecord r;
  r.id = "rec-" + std::to_string(i);
  r.premise_dsl = "a b c = triangle a b c; d = midpoint d a b";
  r.statement_en = "Triangle ABC. D is the midpoint of segment AB. Which of the following statements are true?";
  r.statement_zh = "三角形ABC。D是线段AB的中点。下列结论中，正确的有哪些？";
  for (int k = 0; k < 4; ++k) {
    auto& o = r.options[k];
    o.label = static_cast<char>('A' + k);
    o.text_en = "AD = DB \"quoted\" \\ " + std::to_string(g() % 100);
    o.text_zh = "AD＝DB。";
    o.formal = "cong a d d b";
    o.ratio = k == 2 ? "3/2" : "1";
    o.truth = k % 2 == 0;
    o.origin = o.truth ? "provable" : "negation";
    o.proof = o.truth ? "1. cong a d d b [premise]\n" : "";
    o.proof_length = o.truth ? static_cast<int>(g() % 20) : 0;
    if (o.truth) r.proof_lengths.push_back(o.proof_length);
  }
  r.answer_key = "AC";
  r.difficulty_score = u(g);
  r.difficulty_band = "medium";
  r.solution_length = static_cast<int>(g() % 30);
  r.indicators = {40, 2, 4, 3, r.solution_length};
  r.diagram_seed = g();
  r.figure_seed = g();
  r.figure_path = "figures/" + r.id + ".svg";
  r.relations_histogram = {{"Equality", 3}, {"Collinear", 1}};
  return r;
}

std::array<long, 3> band_counts(std::span<const CorpusRecord> rs) {
  std::array<long, 3> c{};
  for (const auto& r : rs)
    for (int b = 0; b < 3; ++b)
      if (r.difficulty_band == kBands[b]) ++c[b];
  return c;
}

}  // namespace

TEST(Stratify, TenDistinctScores) {
  std::vector<CorpusRecord> rs(10);
  for (int i = 0; i < 10; ++i) rs[i].id = std::to_string(i), rs[i].difficulty_score = 10 - i;
  stratify(rs);
  EXPECT_EQ(band_counts(rs), (std::array<long, 3>{3, 5, 2}));
  EXPECT_EQ(rs[9].difficulty_band, "easy");
  EXPECT_EQ(rs[0].difficulty_band, "hard");
}

TEST(Stratify, PublishedCorpusSize) {
  const std::size_t n = 90279;
  std::mt19937_64 g(1);
  std::normal_distribution<double> d;
  std::vector<double> scores(n);
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) scores[i] = d(g), ids[i] = std::to_string(i);
  const auto band = band_indices(scores, ids, {});
  std::array<long, 3> c{};
  for (int b : band) ++c[b];
  EXPECT_EQ(c, (std::array<long, 3>{27083, 45140, 18056}));
}

TEST(Stratify, AllEqualScoresBandById) {
  std::vector<CorpusRecord> rs(20);
  for (int i = 0; i < 20; ++i) rs[i].id = "p" + std::string(1, static_cast<char>('a' + (i * 7) % 20));
  stratify(rs);
  EXPECT_EQ(band_counts(rs), (std::array<long, 3>{6, 10, 4}));
  for (const auto& r : rs) {
    const int rank = r.id[1] - 'a';
    EXPECT_EQ(r.difficulty_band, rank < 6 ? "easy" : rank < 16 ? "medium" : "hard") << r.id;
  }
}

TEST(Stratify, MonotoneAndWithinOneRecord) {
  std::mt19937_64 g(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + g() % 2000;
    std::vector<CorpusRecord> rs(n);
    for (std::size_t i = 0; i < n; ++i) rs[i].id = std::to_string(i), rs[i].difficulty_score = double(g() % 37);
    stratify(rs);
    const auto c = band_counts(rs);
    EXPECT_LE(std::abs(c[0] - 0.3 * n), 1.0);
    EXPECT_LE(std::abs(c[2] - 0.2 * n), 1.0);
    double max_easy = -1, min_med = 1e9, max_med = -1, min_hard = 1e9;
    for (const auto& r : rs) {
      if (r.difficulty_band == "easy") max_easy = std::max(max_easy, r.difficulty_score);
      if (r.difficulty_band == "medium") min_med = std::min(min_med, r.difficulty_score), max_med = std::max(max_med, r.difficulty_score);
      if (r.difficulty_band == "hard") min_hard = std::min(min_hard, r.difficulty_score);
    }
    EXPECT_LE(max_easy, min_med);
    EXPECT_LE(max_med, min_hard);
  }
}

TEST(Stratify, RatiosMustSumToOne) {
  EXPECT_THROW(validate(SplitSpec{{0.3, 0.5, 0.3}}), Error);
  EXPECT_THROW(validate(SplitSpec{{-0.1, 0.9, 0.2}}), Error);
}

TEST(CorpusIo, RoundTripHundredRecords) {
  std::mt19937_64 g(3);
  std::vector<CorpusRecord> rs;
  for (int i = 0; i < 100; ++i) rs.push_back(synthetic(g, i));
  const auto path = temp_file("round.jsonl");
  write_corpus(rs, path);
  EXPECT_EQ(read_corpus(path), rs);
}

TEST(CorpusIo, TruncatedLastLineIsMalformed) {
  std::mt19937_64 g(4);
  std::vector<CorpusRecord> rs;
  for (int i = 0; i < 5; ++i) rs.push_back(synthetic(g, i));
  const auto path = temp_file("trunc.jsonl");
  write_corpus(rs, path);
  std::string text;
  {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  text.resize(text.size() - 40);
  std::ofstream(path, std::ios::trunc) << text;
  try {
    read_corpus(path);
    FAIL() << "expected MalformedLine";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedLine);
    EXPECT_NE(std::string(e.what()).find(":6:"), std::string::npos) << e.what();
  }
}

TEST(CorpusIo, MissingFieldIsMalformed) {
  const auto path = temp_file("missing.jsonl");
  std::ofstream(path, std::ios::trunc) << "{\"schema\":\"geoforge-corpus\",\"version\":1}\n{\"id\":\"x\"}\n";
  try {
    read_corpus(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedLine);
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(CorpusIo, OlderSchemaNamesBothVersions) {
  std::mt19937_64 g(5);
  const std::vector<CorpusRecord> rs{synthetic(g, 0)};
  const auto path = temp_file("v1.jsonl");
  write_corpus(rs, path);
  try {
    read_corpus(path, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaMismatch);
    const std::string what = e.what();
    EXPECT_NE(what.find("v1"), std::string::npos) << what;
    EXPECT_NE(what.find("v2"), std::string::npos) << what;
  }
}

TEST(Stats, EmptyCorpusIsAllZero) {
  const auto s = corpus_stats({});
  EXPECT_EQ(s.problems, 0u);
  for (const auto& [cat, n] : s.relations) EXPECT_EQ(n, 0) << cat;
  EXPECT_EQ(s.relations.size(), 6u);
  EXPECT_EQ(s.avg_proof_length, 0.0);
  EXPECT_EQ(s.avg_description_length, 0.0);
}

TEST(Stats, TaxonomyMapping) {
  EXPECT_EQ(relation_category(Pred::cong), "Equality");
  EXPECT_EQ(relation_category(Pred::para), "Parallel");
  EXPECT_EQ(relation_category(Pred::perp), "Vertical");
  EXPECT_EQ(relation_category(Pred::coll), "Collinear");
  EXPECT_EQ(relation_category(Pred::cyclic), "Circle-related");
  EXPECT_EQ(relation_category(Pred::circle), "Circle-related");
  EXPECT_EQ(relation_category(Pred::eqangle), "Others");
  EXPECT_EQ(relation_category(Pred::midp), "Others");
}

// Recount from the stored DSL and formal option strings.
std::map<std::string, long> recount(std::span<const CorpusRecord> rs) {
  const std::map<std::string, std::string> table{{"cong", "Equality"},  {"para", "Parallel"},
                                                 {"perp", "Vertical"},  {"coll", "Collinear"},
                                                 {"cyclic", "Circle-related"}, {"circle", "Circle-related"}};
  const auto cat = [&](const std::string& pred) {
    const auto it = table.find(pred);
    return it == table.end() ? std::string("Others") : it->second;
  };
  std::map<std::string, long> out;
  for (const auto& r : rs) {
    const Premise p = parse_premise(r.premise_dsl);
    const auto names = p.point_names();
    for (const auto& pf : premise_facts(p)) {
      std::istringstream words(format_fact(pf.fact, names));
      std::string pred;
      words >> pred;
      bool circular = false;
      for (const auto& cl : p.constructions[pf.construction].clauses)
        circular |= cl.relation == "on_circle" || cl.relation == "circle" || cl.relation == "on_circum" ||
                    cl.relation == "intersection_lc" || cl.relation == "lc_tangent" || cl.relation == "tangent";
      ++out[pred == "cong" && circular ? "Circle-related" : cat(pred)];
    }
    for (const auto& o : r.options) ++out[cat(o.formal.substr(0, o.formal.find(' ')))];
  }
  return out;
}

TEST(Stats, RelationCountsMatchRecount) {
  std::vector<CorpusRecord> rs;
  double option_proofs = 0, true_options = 0;
  for (std::uint64_t seed : {1u, 2u}) {
    SamplerConfig sc;
    sc.seed = seed;
    for (const auto& e : sample_pool(sc).premises) {
      const Diagram d = instantiate(e.premise, e.seed);
      const auto st = saturate(e.premise, d, default_rules());
      try {
        const Problem p = assemble_problem(e.id, e.premise, d, st, default_rules(), ForgeConfig{});
        rs.push_back(make_record(p, "figures/" + p.id + ".svg", p.diagram_seed));
        for (const auto& o : p.options)
          if (o.truth) option_proofs += o.trace->proof_length, ++true_options;
      } catch (const Error&) {
      }
    }
  }
  ASSERT_GT(rs.size(), 80u);
  const auto s = corpus_stats(rs);
  auto expected = recount(rs);
  for (const char* c : kRelationCategories) EXPECT_EQ(s.relations.at(c), expected[c]) << c;
  EXPECT_NEAR(s.avg_option_proof_length, option_proofs / true_options, 1e-12);
  EXPECT_EQ(s.coverage, 1.0);
}

TEST(Record, MatchesProblemAndRoundTrips) {
  const Premise premise = parse_premise("a b c = triangle a b c; d = midpoint d a b; e = midpoint e a c");
  const Diagram d = instantiate(premise, 1);
  const auto st = saturate(premise, d, default_rules());
  ForgeConfig fc;
  fc.key_dist = {1, 0, 0};
  const Problem p = assemble_problem("midline", premise, d, st, default_rules(), fc);
  const CorpusRecord r = make_record(p, "figures/midline.svg", 42);
  EXPECT_TRUE(has_full_coverage(r));
  EXPECT_EQ(r.answer_key.size(), 1u);
  EXPECT_EQ(r.figure_seed, 42u);
  const Problem back = problem_from_record(r);
  EXPECT_EQ(back.answer_key, p.answer_key);
  EXPECT_EQ(serialize(back.premise), serialize(p.premise));
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(back.options[i].statement, p.options[i].statement);
    EXPECT_EQ(back.options[i].truth, p.options[i].truth);
  }
  EXPECT_EQ(record_from_json(Json::parse(dump_line(to_json(r)))), r);
}
