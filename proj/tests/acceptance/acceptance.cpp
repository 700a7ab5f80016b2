// Acceptance checks. Each criterion prints one PASS/FAIL line.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "geoforge/common/error.hpp"
#include "geoforge/pipeline/pipeline.hpp"
#include "support/brute_closure.hpp"
#include "support/numeric_oracle.hpp"

using namespace geoforge;
namespace fs = std::filesystem;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path work;

PipelineConfig desk_config(const std::string& name) {
  PipelineConfig c = parse_pipeline_config(Json::object());
  c.seed = 1;
  c.seeds = 20;
  c.max_problems = 1000;
  c.out = work / name;
  return c;
}

PipelineConfig proof_weighted_config() {
  PipelineConfig c = desk_config("desk_x5");
  c.forge.difficulty.weights = {0, 0, 0, 0, 1};
  return c;
}

void prepare() {
  for (const auto& c : {desk_config("desk_a"), desk_config("desk_b"), proof_weighted_config()}) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::remove_all(c.out);
    std::size_t n = 0;
    for (const auto& r : run_pipeline(c)) n = r.stage == "split" ? r.output : n;
    std::printf("prepared %s: %zu problems in %.1fs\n", c.out.filename().c_str(), n, since(t0));
  }
}

std::vector<CorpusRecord> desk(const std::string& name = "desk_a") { return read_corpus(work / name / artifact::corpus); }

// ---------------------------------------------------------------------------

Result ac1_rule_soundness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t pairs = 0, facts = 0, bad = 0, unsound = 0;
  double worst = 0;
  SamplerConfig sc;
  sc.max_depth = 4;
  for (std::uint64_t seed = 1; pairs < 10000; ++seed) {
    sc.seed = seed;
    for (const auto& e : sample_pool(sc).premises) {
      if (pairs == 10000) break;
      ++pairs;
      const Diagram d = instantiate(e.premise, e.seed);
      try {
        const auto st = saturate(e.premise, d, default_rules());
        const oracle::Numeric num(d);
        for (const auto& r : st.facts) {
          const double res = num.residual(r.fact);
          worst = std::max(worst, res);
          ++facts;
          bad += !(res <= kTolTrue);
        }
      } catch (const Error& err) {
        if (err.code() != ErrorCode::UnsoundDerivation) throw;
        ++unsound;
      }
    }
  }
  const double secs = since(t0);
  return {bad == 0 && unsound == 0 && secs < 600,
          fmt("%zu pairs, %zu facts, %zu above 1e-9 (max residual %.2g), %zu unsound, %.0fs", pairs, facts, bad, worst,
              unsound, secs)};
}

Result ac2_known_theorems() {
  struct Theorem {
    const char* name;
    const char* premise;
    const char* conclusion;
  };
  const std::vector<Theorem> suite{
      {"midline", "a b c = triangle; d = midpoint d a b; e = midpoint e a c", "para d e b c"},
      {"thales", "a b c = triangle; o = circle o a b c; d = on_line d a o, on_circle d o a", "perp a b b d"},
      {"perpendicular bisector", "a b = segment; m = midpoint m a b; o = on_tline o m a b", "cong o a o b"},
      {"circumcenter concyclic", "a b c = triangle; o = circle o a b c; d = on_circle d o a", "cyclic a b c d"},
      {"isosceles base angles", "a b c = iso_triangle", "eqangle a b b c b c a c"},
      {"parallelogram diagonals", "a b c = triangle; m = midpoint m a b; d = mirror d c m", "para a c b d"},
      {"right triangle median", "a b c = r_triangle; m = midpoint m b c", "cong m a m b"},
      {"inscribed angle", "a b c = triangle; d = on_circum d a b c", "eqangle c a c b d a d b"},
      {"two perpendiculars", "a b = segment; c = on_tline c a a b; d = on_tline d b a b", "para a c b d"},
      {"rectangle corner", "a b c d = rectangle", "perp b c c d"},
      {"parallelogram bisected diagonals", "a b c = triangle; d = parallelogram d a b c; m = midpoint m a c", "midp m b d"},
      {"bisector line", "a b = segment; c = on_bline c a b; d = on_bline d a b", "perp a b c d"},
  };
  int ok = 0;
  std::string failed;
  for (const auto& t : suite) {
    const Premise p = parse_premise(t.premise);
    const Diagram d = instantiate(p, 0);
    const auto st = saturate(p, d, default_rules());
    const Fact goal = canonical(parse_fact(t.conclusion, [&](std::string_view n) { return p.index_of(n); }));
    bool good = st.contains(goal) && oracle::Numeric(d).residual(goal) <= kTolTrue;
    if (good) {
      const auto trace = extract_proof(st, goal);
      good = trace.proof_length >= 1 && replay_proof(trace, st, d, default_rules());
    }
    ok += good;
    if (!good) failed += std::string(failed.empty() ? "" : ", ") + t.name;
  }
  const int n = static_cast<int>(suite.size());
  return {ok == n, fmt("%d/%d derived with replayable traces%s%s", ok, n, failed.empty() ? "" : "; failed: ",
                       failed.c_str())};
}

Result ac3_closure_oracle() {
  std::ifstream in(GEOFORGE_TEST_DATA "/premises.txt");
  int compared = 0, mismatched = 0;
  std::size_t facts = 0;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    const Premise p = parse_premise(line);
    if (p.point_count() > 5) continue;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      EngineConfig cfg;
      cfg.algebra = false;
      cfg.max_level = 1000;
      const Diagram d = instantiate(p, seed);
      const auto st = saturate(p, d, default_rules(), cfg);
      std::unordered_set<Fact, FactHash> got;
      for (const auto& r : st.facts) got.insert(r.fact);
      const auto expect = oracle::brute_closure(default_rules(), st, d);
      mismatched += !(st.fixpoint && got == expect);
      facts += got.size();
      ++compared;
    }
  }
  return {compared > 0 && mismatched == 0,
          fmt("%d (premise, diagram) closures compared, %d mismatched, %zu facts", compared, mismatched, facts)};
}

Result ac4_random_baseline() {
  const auto gold = gold_items(desk());
  double em16 = 0, em_ne = 0, sel_ne = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    em16 += random_baseline(gold, 100000, seed, SubsetLaw::uniform16).em_all / 3;
    const auto ne = random_baseline(gold, 100000, seed, SubsetLaw::uniform_nonempty);
    em_ne += ne.em_all / 3;
    sel_ne += ne.avg_selected / 3;
  }
  const bool pass = std::abs(em16 - 6.25) <= 0.3 && std::abs(sel_ne - 2.13) <= 0.03;
  return {pass, fmt("uniform16 EM %.2f (target 6.25 +/- 0.3); uniform_nonempty Avg#Sel %.3f (target 2.13 +/- 0.03), "
                    "EM %.2f; EM gap between laws %.2fpp",
                    em16, sel_ne, em_ne, em_ne - em16)};
}

Result ac5_metrics_oracle() {
  // Worked example.
  const std::vector<GoldItem> one{{"p", "A", "easy"}};
  Prediction ab;
  ab.problem_id = "p";
  ab.predicted = "AB";
  const auto w = compute_metrics(std::vector<Prediction>{ab}, one);
  const bool worked = w.precision == 50.0 && w.recall == 100.0 && std::abs(w.f1 - 66.67) < 0.005 &&
                      w.hamming_loss == 25.0;

  std::mt19937_64 g(2024);
  const std::size_t n = 10000;
  std::vector<GoldItem> gold;
  std::vector<Prediction> preds;
  const char* bands[3] = {"easy", "medium", "hard"};
  for (std::size_t i = 0; i < n; ++i) {
    gold.push_back({"q" + std::to_string(i), labels_from_mask(static_cast<LabelMask>(1 + g() % 15)), bands[g() % 3]});
    Prediction p;
    p.problem_id = gold.back().id;
    const auto kind = g() % 10;
    if (kind != 0) p.predicted = labels_from_mask(static_cast<LabelMask>(g() % 16));
    p.truncated = kind == 1;
    preds.push_back(p);
  }
  const auto r = compute_metrics(preds, gold);
  double em = 0, P = 0, R = 0, F = 0, HL = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string key = gold[i].answer_key;
    const bool committed = !preds[i].truncated && preds[i].predicted;
    const std::string sel = committed ? *preds[i].predicted : "";
    double inter = 0, miss = 0;
    for (char c : std::string("ABCD")) {
      const bool s = sel.find(c) != std::string::npos, k = key.find(c) != std::string::npos;
      inter += s && k;
      miss += s != k;
    }
    const double p = sel.empty() ? 0 : inter / static_cast<double>(sel.size());
    const double rr = inter / static_cast<double>(key.size());
    em += committed && sel == key;
    P += p, R += rr, F += p + rr > 0 ? 2 * p * rr / (p + rr) : 0, HL += miss / 4;
  }
  const double dn = static_cast<double>(n);
  const double err = std::max({std::abs(r.em_all - 100 * em / dn), std::abs(r.precision - 100 * P / dn),
                               std::abs(r.recall - 100 * R / dn), std::abs(r.f1 - 100 * F / dn),
                               std::abs(r.hamming_loss - 100 * HL / dn),
                               std::abs(r.hamming_accuracy - (100 - 100 * HL / dn))});
  return {worked && err <= 1e-9,
          fmt("worked example P=%.2f R=%.2f F1=%.2f HL=%.2f%%; %zu fuzzed records, max deviation %.1e", w.precision,
              w.recall, w.f1, w.hamming_loss, n, err)};
}

Result ac6_split_ratios() {
  const auto records = desk();
  std::map<std::string, double> count;
  for (const auto& r : records) count[r.difficulty_band] += 1;
  const double n = static_cast<double>(records.size());
  const double e = 100 * count["easy"] / n, m = 100 * count["medium"] / n, h = 100 * count["hard"] / n;
  const bool corpus_ok = records.size() >= 1000 && std::abs(e - 30) <= 1 && std::abs(m - 50) <= 1 && std::abs(h - 20) <= 1;

  const std::size_t big = 90279;
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> u;
  std::vector<double> scores(big);
  std::vector<std::string> ids(big);
  for (std::size_t i = 0; i < big; ++i) scores[i] = u(g), ids[i] = std::to_string(i);
  std::array<long, 3> c{};
  for (int b : band_indices(scores, ids, {})) ++c[b];
  const bool published = c == std::array<long, 3>{27083, 45140, 18056};
  return {corpus_ok && published, fmt("corpus of %zu: %.1f/%.1f/%.1f%%; 90,279 scores: %ld/%ld/%ld", records.size(), e,
                                      m, h, c[0], c[1], c[2])};
}

Result ac7_problem_integrity() {
  const auto records = desk();
  std::size_t consistent = 0, false_options = 0, falsified = 0, independent_ok = 0;
  std::string first_bad;
  for (const auto& rec : records) {
    const Problem p = problem_from_record(rec);
    const std::string why = check_problem(p, default_rules(), EngineConfig{});
    consistent += why.empty();
    if (!why.empty() && first_bad.empty()) first_bad = rec.id + ": " + why;
    // The three certification diagrams, and three from an unrelated stream.
    auto draw = [&](std::uint64_t seed) {
      std::vector<Diagram> out;
      for (std::uint64_t k = 0; out.size() < 3 && k < 12; ++k) try {
          out.push_back(instantiate(p.premise, derive_seed(seed, k + 1)));
        } catch (const Error&) {
        }
      return out;
    };
    const auto cert = draw(p.diagram_seed), other = draw(derive_seed(p.diagram_seed, 0xfeed));
    for (const auto& o : p.options) {
      if (o.truth) continue;
      ++false_options;
      bool ok = cert.size() == 3, ok2 = other.size() == 3;
      for (const auto& d : cert) ok &= oracle::Numeric(d).residual(o.statement.fact, o.statement.ratio) > kTolFalse;
      for (const auto& d : other) ok2 &= oracle::Numeric(d).residual(o.statement.fact, o.statement.ratio) > kTolFalse;
      falsified += ok;
      independent_ok += ok2;
    }
  }
  const bool pass = records.size() >= 1000 && consistent == records.size() && falsified == false_options;
  return {pass, fmt("%zu/%zu key-consistent; %zu/%zu false options above 1e-3 on 3 fresh certification diagrams "
                    "(independent draw: %zu/%zu)%s%s",
                    consistent, records.size(), falsified, false_options, independent_ok, false_options,
                    first_bad.empty() ? "" : "; first failure ", first_bad.c_str())};
}

Result ac8_proof_length() {
  const auto weighted = corpus_stats(desk("desk_x5"));
  const auto plain = corpus_stats(desk());
  std::string hist;
  for (const auto& [len, n] : weighted.proof_length_histogram) hist += fmt("%s%d:%ld", hist.empty() ? "" : " ", len, n);
  const bool pass = weighted.problems >= 1000 && weighted.avg_proof_length >= 8 && weighted.max_proof_length >= 16;
  return {pass, fmt("depth 8, weights (0,0,0,0,1): %zu problems, mean %.2f, max %d; default uniform weights: mean %.2f, "
                    "max %d; distribution {%s}",
                    weighted.problems, weighted.avg_proof_length, weighted.max_proof_length, plain.avg_proof_length,
                    plain.max_proof_length, hist.c_str())};
}

std::string move_label(const std::string& svg, const std::string& point, const std::string& onto) {
  std::smatch m;
  const std::regex src("<text class=\"label\" data-point=\"" + onto + "\" x=\"([^\"]*)\" y=\"([^\"]*)\">");
  if (!std::regex_search(svg, m, src)) return svg;
  const std::regex dst("<text class=\"label\" data-point=\"" + point + "\" x=\"[^\"]*\" y=\"[^\"]*\">");
  return std::regex_replace(svg, dst, "<text class=\"label\" data-point=\"" + point + "\" x=\"" + m[1].str() +
                                          "\" y=\"" + m[2].str() + "\">");
}

Result ac9_rendering() {
  const auto records = desk();
  const fs::path dir = work / "desk_a";
  std::size_t verified = 0;
  for (const auto& rec : records) {
    const Problem p = problem_from_record(rec);
    const Diagram d = instantiate(p.premise, rec.figure_seed);
    verified += verify_render(p, d, read_file(dir / rec.figure_path)).ok();
  }

  // Fault fixtures on the first problem whose first three points are not at a right angle.
  int overlap_caught = 0, perp_caught = 0, fixtures = 0;
  for (const auto& rec : records) {
    const Problem p = problem_from_record(rec);
    const Diagram d = instantiate(p.premise, rec.figure_seed);
    if (p.premise.point_count() < 3) continue;
    const Fact wrong(Pred::perp, {0, 1, 0, 2});
    if (oracle::Numeric(d).residual(wrong) < 0.1) continue;
    const auto names = p.premise.point_names();
    const std::string svg = read_file(dir / rec.figure_path);
    const auto overlapped = verify_render(p, d, move_label(svg, names[1], names[0]));
    overlap_caught += !overlapped.readability_ok;
    std::string marked = svg;
    const auto at = marked.find('\n', marked.find("<g id=\"marks\"")) + 1;
    marked.insert(at, "<g class=\"mark perp\" data-fact=\"perp " + names[0] + " " + names[1] + " " + names[0] + " " +
                          names[2] + "\"><path d=\"M10,10 L18,10 L18,18\"/></g>\n");
    perp_caught += !verify_render(p, d, marked).alignment_ok;
    if (++fixtures == 20) break;
  }

  PipelineConfig c = desk_config("render_timing");
  fs::remove_all(c.out);
  fs::create_directories(c.out);
  fs::copy_file(dir / artifact::problems, c.out / artifact::problems);
  const auto report = stage_render(c);
  const bool pass = records.size() >= 1000 && verified == records.size() && overlap_caught == fixtures &&
                    perp_caught == fixtures && fixtures > 0 && report.seconds < 300 && report.output == records.size();
  return {pass, fmt("%zu/%zu kept figures verify; overlapping labels caught %d/%d, wrong perp mark caught %d/%d; "
                    "rendered %zu figures in %.1fs (%zu rejected)",
                    verified, records.size(), overlap_caught, fixtures, perp_caught, fixtures, report.output,
                    report.seconds, report.rejected)};
}

Result ac10_determinism() {
  const fs::path a = work / "desk_a", b = work / "desk_b";
  std::size_t jsonl = 0, svg = 0, differ = 0;
  std::set<std::string> seen;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    seen.insert(rel.string());
    const auto ext = rel.extension();
    jsonl += ext == ".jsonl";
    svg += ext == ".svg";
    differ += !fs::exists(b / rel) || read_file(e.path()) != read_file(b / rel);
  }
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) differ += !seen.count(fs::relative(e.path(), b).string());
  return {differ == 0 && jsonl > 0 && svg > 0,
          fmt("two runs: %zu JSONL and %zu SVG artifacts, %zu differing files", jsonl, svg, differ)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string dir = "acceptance_work";
  bool do_prepare = false;
  int only = 0;
  app.add_option("--work", dir, "working directory for the desk corpora");
  app.add_flag("--prepare", do_prepare, "build the desk corpora and exit");
  app.add_option("--only", only, "run one criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  work = fs::absolute(dir);

  try {
    if (do_prepare) {
      prepare();
      return 0;
    }
    if (!fs::exists(work / "desk_a" / artifact::corpus) || !fs::exists(work / "desk_x5" / artifact::corpus) ||
        !fs::exists(work / "desk_b" / artifact::corpus)) {
      const std::set<int> needs{4, 6, 7, 8, 9, 10};
      if (only == 0 || needs.count(only)) prepare();
    }
  } catch (const std::exception& e) {
    std::printf("prepare failed: %s\n", e.what());
    return 1;
  }

  const std::vector<std::pair<const char*, std::function<Result()>>> criteria{
      {"rule soundness fuzz", ac1_rule_soundness},     {"known-theorem suite", ac2_known_theorems},
      {"closure oracle", ac3_closure_oracle},          {"random baseline", ac4_random_baseline},
      {"metrics oracle", ac5_metrics_oracle},          {"split ratios", ac6_split_ratios},
      {"problem integrity", ac7_problem_integrity},    {"proof length", ac8_proof_length},
      {"rendering", ac9_rendering},                    {"determinism", ac10_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<std::size_t>(only) != i + 1) continue;
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += !r.pass;
    std::printf("AC%zu %s %s: %s\n", i + 1, r.pass ? "PASS" : "FAIL", criteria[i].first, r.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
