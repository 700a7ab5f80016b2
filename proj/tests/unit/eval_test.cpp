#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include <httplib.h>

#include "geoforge/common/error.hpp"
#include "geoforge/eval/metrics.hpp"
#include "geoforge/eval/runner.hpp"

using namespace geoforge;
namespace fs = std::filesystem;

namespace {

Prediction pred(const std::string& id, std::optional<std::string> labels, bool truncated = false) {
  Prediction p;
  p.problem_id = id;
  p.predicted = std::move(labels);
  p.truncated = truncated;
  return p;
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "geoforge_eval_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(ParseAnswer, AnswerLine) { EXPECT_EQ(parse_answer("so A and C hold, therefore ANSWER: A,C"), "AC"); }
TEST(ParseAnswer, NoLabels) { EXPECT_EQ(parse_answer("I cannot determine this."), std::nullopt); }
TEST(ParseAnswer, DedupeAndSort) { EXPECT_EQ(parse_answer("ANSWER: C, A, A"), "AC"); }
TEST(ParseAnswer, LastAnswerLineWins) { EXPECT_EQ(parse_answer("ANSWER: B\nwait, recheck.\nANSWER: **D**"), "D"); }
TEST(ParseAnswer, ChineseAnswerLine) { EXPECT_EQ(parse_answer("综上，答案：A、C"), "AC"); }
TEST(ParseAnswer, FallsBackToLastLabelRun) {
  EXPECT_EQ(parse_answer("Option A fails since AB is not parallel to CD. The true options are B and D."), "BD");
  EXPECT_EQ(parse_answer("A triangle is given, so the correct choice is (C)."), "C");
}
TEST(ParseAnswer, PointNamesAreNotLabels) { EXPECT_EQ(parse_answer("Since ABC is isosceles, BD = DC."), std::nullopt); }

TEST(ClassifyOutcome, Cases) {
  EXPECT_EQ(classify_outcome(pred("x", "AC", true), "AC"), Outcome::out_of_length);
  EXPECT_EQ(classify_outcome(pred("x", std::nullopt), "AC"), Outcome::no_answer);
  EXPECT_EQ(classify_outcome(pred("x", "AC"), "AC"), Outcome::right_answer);
  EXPECT_EQ(classify_outcome(pred("x", "A"), "AC"), Outcome::wrong_answer);
}

TEST(Metrics, WorkedExample) {
  const std::vector<GoldItem> gold{{"p", "A", "easy"}};
  const std::vector<Prediction> preds{pred("p", "AB")};
  const auto r = compute_metrics(preds, gold);
  EXPECT_DOUBLE_EQ(r.precision, 50.0);
  EXPECT_DOUBLE_EQ(r.recall, 100.0);
  EXPECT_NEAR(r.f1, 66.67, 0.005);
  EXPECT_DOUBLE_EQ(r.f1, 200.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.hamming_loss, 25.0);
  EXPECT_DOUBLE_EQ(r.hamming_accuracy, 75.0);
  EXPECT_DOUBLE_EQ(r.em_all, 0.0);
}

TEST(Metrics, PerfectPredictions) {
  std::vector<GoldItem> gold;
  std::vector<Prediction> preds;
  for (int i = 0; i < 30; ++i) {
    const std::string key = i % 3 == 0 ? "A" : i % 3 == 1 ? "BD" : "ABC";
    gold.push_back({std::to_string(i), key, kBands[i % 3]});
    preds.push_back(pred(std::to_string(i), key));
  }
  const auto r = compute_metrics(preds, gold);
  for (double v : {r.em_all, r.em_easy, r.em_medium, r.em_hard, r.precision, r.recall, r.f1, r.hamming_accuracy})
    EXPECT_DOUBLE_EQ(v, 100.0);
}

TEST(Metrics, UnknownProblemId) {
  const std::vector<GoldItem> gold{{"p", "A", ""}};
  const std::vector<Prediction> preds{pred("q", "A")};
  EXPECT_THROW(compute_metrics(preds, gold), Error);
}

TEST(Metrics, AvgSelectedExcludesNoAnswerByDefault) {
  const std::vector<GoldItem> gold{{"p", "A", ""}, {"q", "B", ""}};
  const std::vector<Prediction> preds{pred("p", "ABC"), pred("q", std::nullopt)};
  EXPECT_DOUBLE_EQ(compute_metrics(preds, gold).avg_selected, 3.0);
  EXPECT_DOUBLE_EQ(compute_metrics(preds, gold, {false, true}).avg_selected, 1.5);
}

// Per-record recomputation over label sets.
struct Naive {
  double em = 0, p = 0, r = 0, f = 0, hl = 0;
  std::array<double, 3> band_right{}, band_n{};
  std::array<std::size_t, 4> outcomes{};
};

Naive naive(const std::vector<Prediction>& preds, const std::vector<GoldItem>& gold) {
  Naive out;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& pr = preds[i];
    const auto& g = gold[i];
    std::set<char> key(g.answer_key.begin(), g.answer_key.end());
    std::set<char> sel;
    const bool committed = !pr.truncated && pr.predicted;
    if (committed) sel.insert(pr.predicted->begin(), pr.predicted->end());
    const bool right = committed && sel == key;
    if (pr.truncated) ++out.outcomes[3];
    else if (!pr.predicted) ++out.outcomes[2];
    else ++out.outcomes[right ? 0 : 1];
    out.em += right;
    int b = g.band == "easy" ? 0 : g.band == "medium" ? 1 : 2;
    out.band_n[b] += 1;
    out.band_right[b] += right;
    double inter = 0;
    for (char c : sel) inter += key.count(c);
    const double p = sel.empty() ? 0 : inter / sel.size();
    const double r = inter / key.size();
    out.p += p;
    out.r += r;
    out.f += (p + r) > 0 ? 2 * p * r / (p + r) : 0;
    int wrong = 0;
    for (char c : std::string("ABCD")) wrong += (sel.count(c) > 0) != (key.count(c) > 0);
    out.hl += wrong / 4.0;
  }
  return out;
}

TEST(Metrics, FuzzMatchesPerRecordRecomputation) {
  std::mt19937_64 g(11);
  std::vector<GoldItem> gold;
  std::vector<Prediction> preds;
  const std::size_t n = 10000;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "p" + std::to_string(i);
    gold.push_back({id, labels_from_mask(static_cast<LabelMask>(1 + g() % 15)), kBands[g() % 3]});
    const int kind = static_cast<int>(g() % 10);
    if (kind == 0) preds.push_back(pred(id, std::nullopt));
    else if (kind == 1) preds.push_back(pred(id, labels_from_mask(static_cast<LabelMask>(g() % 16)), true));
    else preds.push_back(pred(id, labels_from_mask(static_cast<LabelMask>(g() % 16))));
  }
  const auto r = compute_metrics(preds, gold);
  const Naive o = naive(preds, gold);
  EXPECT_NEAR(r.em_all, 100 * o.em / n, 1e-9);
  EXPECT_NEAR(r.precision, 100 * o.p / n, 1e-9);
  EXPECT_NEAR(r.recall, 100 * o.r / n, 1e-9);
  EXPECT_NEAR(r.f1, 100 * o.f / n, 1e-9);
  EXPECT_NEAR(r.hamming_loss, 100 * o.hl / n, 1e-9);
  EXPECT_NEAR(r.hamming_accuracy, 100 - 100 * o.hl / n, 1e-9);
  EXPECT_EQ(r.outcome_counts, o.outcomes);
  EXPECT_EQ(r.outcome_counts[0] + r.outcome_counts[1] + r.outcome_counts[2] + r.outcome_counts[3], n);
  EXPECT_NEAR(r.em_easy, 100 * o.band_right[0] / o.band_n[0], 1e-9);
  EXPECT_NEAR(r.em_hard, 100 * o.band_right[2] / o.band_n[2], 1e-9);
  const double recomposed = (r.em_easy * r.band_n[0] + r.em_medium * r.band_n[1] + r.em_hard * r.band_n[2]) / n;
  EXPECT_NEAR(recomposed, r.em_all, 1e-9);
  EXPECT_LE(r.em_all, r.hamming_accuracy);
}

TEST(Baseline, Uniform16ExactMatchIsOneSixteenth) {
  const std::vector<GoldItem> gold{{"a", "A", "easy"}, {"b", "BC", "medium"}, {"c", "ABD", "hard"}};
  double em = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) em += random_baseline(gold, 100000, seed, SubsetLaw::uniform16).em_all;
  EXPECT_NEAR(em / 3, 6.25, 0.3);
}

TEST(Baseline, NonEmptyAverageSelection) {
  const std::vector<GoldItem> gold{{"a", "A", ""}, {"b", "BC", ""}};
  const auto r = random_baseline(gold, 100000, 5, SubsetLaw::uniform_nonempty);
  EXPECT_NEAR(r.avg_selected, 32.0 / 15.0, 0.03);
  EXPECT_NEAR(r.em_all, 100.0 / 15.0, 0.3);
}

TEST(Baseline, EmptyLaw) {
  const std::vector<GoldItem> gold{{"a", "A", ""}, {"b", "BC", ""}};
  const auto r = random_baseline(gold, 1000, 5, SubsetLaw::empty);
  EXPECT_EQ(r.em_all, 0.0);
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.avg_selected, 0.0);
}

TEST(Baseline, DeterministicPerSeed) {
  const std::vector<GoldItem> gold{{"a", "A", ""}, {"b", "BC", ""}};
  EXPECT_EQ(to_json(random_baseline(gold, 5000, 9, SubsetLaw::uniform16)),
            to_json(random_baseline(gold, 5000, 9, SubsetLaw::uniform16)));
  EXPECT_THROW(random_baseline(gold, 0, 9, SubsetLaw::uniform16), Error);
}

// Chat-completions stub on a free local port.
class Stub {
public:
  explicit Stub(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/v1/chat/completions", [this, handler](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      handler(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~Stub() {
    server_.stop();
    thread_.join();
  }
  EndpointConfig endpoint() const {
    EndpointConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    c.model = "stub";
    c.backoff_ms = 1;
    c.backoff_cap_ms = 4;
    return c;
  }
  std::atomic<int> requests{0};

private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string reply(const std::string& text, const Json& finish, int completion_tokens = 5) {
  return Json{{"choices", Json::array({Json{{"message", {{"role", "assistant"}, {"content", text}}},
                                            {"finish_reason", finish}}})},
              {"usage", {{"prompt_tokens", 100}, {"completion_tokens", completion_tokens}}}}
      .dump();
}

std::vector<CorpusRecord> stub_corpus(std::size_t n) {
  std::vector<CorpusRecord> rs(n);
  for (std::size_t i = 0; i < n; ++i) {
    rs[i].id = "p" + std::to_string(i);
    rs[i].statement_en = "Triangle ABC. Which of the following statements are true?";
    rs[i].answer_key = "A";
    rs[i].figure_path = "figures/" + rs[i].id + ".svg";
    for (int k = 0; k < 4; ++k) rs[i].options[k].label = static_cast<char>('A' + k), rs[i].options[k].text_en = "AB = AC.";
  }
  return rs;
}

TEST(RunModel, EchoStubAnswersA) {
  Stub stub([](const httplib::Request& req, httplib::Response& res) {
    const Json body = Json::parse(req.body);
    EXPECT_EQ(body["temperature"], 0.0);
    EXPECT_EQ(body["max_tokens"], 16384);
    res.set_content(reply("Reasoning...\nANSWER: A", "stop"), "application/json");
  });
  const auto corpus = stub_corpus(6);
  RunOptions opt;
  opt.prompt_template = "{statement}\n{options}";
  opt.ledger = temp_dir("echo") / "preds.jsonl";
  const auto preds = run_model(stub.endpoint(), corpus, opt);
  ASSERT_EQ(preds.size(), 6u);
  for (const auto& p : preds) {
    EXPECT_EQ(p.predicted, "A");
    EXPECT_FALSE(p.truncated);
    EXPECT_EQ(classify_outcome(p, "A"), Outcome::right_answer);
  }
  EXPECT_EQ(stub.requests, 6);
}

TEST(RunModel, MaxLengthWithoutFinishIsTruncated) {
  Stub stub([](const httplib::Request&, httplib::Response& res) {
    res.set_content(reply("Let me think about option A...", nullptr, 16384), "application/json");
  });
  const auto corpus = stub_corpus(2);
  RunOptions opt;
  opt.prompt_template = "{statement}";
  opt.ledger = temp_dir("trunc") / "preds.jsonl";
  for (const auto& p : run_model(stub.endpoint(), corpus, opt)) {
    EXPECT_TRUE(p.truncated);
    EXPECT_EQ(classify_outcome(p, "A"), Outcome::out_of_length);
  }
}

TEST(RunModel, ResumesFromLedger) {
  Stub stub([](const httplib::Request&, httplib::Response& res) {
    res.set_content(reply("ANSWER: B", "stop"), "application/json");
  });
  const auto corpus = stub_corpus(100);
  RunOptions opt;
  opt.prompt_template = "{statement}";
  opt.ledger = temp_dir("resume") / "preds.jsonl";
  opt.max_requests = 50;
  EXPECT_EQ(run_model(stub.endpoint(), corpus, opt).size(), 50u);
  // A kill mid-write leaves a torn line behind.
  std::ofstream(opt.ledger, std::ios::app) << "{\"problem_id\":\"p9";
  opt.max_requests.reset();
  const auto preds = run_model(stub.endpoint(), corpus, opt);
  EXPECT_EQ(preds.size(), 100u);
  EXPECT_EQ(stub.requests, 100);
  std::set<std::string> ids;
  for (const auto& p : preds) ids.insert(p.problem_id);
  EXPECT_EQ(ids.size(), 100u);
}

TEST(RunModel, RetriesServerErrorsThenRecordsFailure) {
  std::atomic<int> calls{0};
  Stub stub([&](const httplib::Request&, httplib::Response& res) {
    if (++calls % 2 == 1) {
      res.status = 503;
      return;
    }
    res.set_content(reply("ANSWER: C", "stop"), "application/json");
  });
  auto endpoint = stub.endpoint();
  RunOptions opt;
  opt.prompt_template = "{statement}";
  opt.ledger = temp_dir("retry") / "preds.jsonl";
  const auto preds = run_model(endpoint, stub_corpus(3), opt);
  for (const auto& p : preds) EXPECT_EQ(p.predicted, "C");

  Stub down([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  endpoint = down.endpoint();
  endpoint.retries = 2;
  opt.ledger = temp_dir("down") / "preds.jsonl";
  const auto failed = run_model(endpoint, stub_corpus(1), opt);
  ASSERT_EQ(failed.size(), 1u);
  EXPECT_FALSE(failed[0].error.empty());
  EXPECT_EQ(down.requests, 3);
}

TEST(RunModel, MissingImage) {
  Stub stub([](const httplib::Request&, httplib::Response& res) { res.set_content(reply("ANSWER: A", "stop"), "application/json"); });
  RunOptions opt;
  opt.modality = Modality::text_image;
  opt.corpus_dir = temp_dir("noimg");
  opt.ledger = opt.corpus_dir / "preds.jsonl";
  try {
    run_model(stub.endpoint(), stub_corpus(1), opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingImage);
  }
  EXPECT_EQ(stub.requests, 0);
}

TEST(RunModel, SendsFigureAsImagePart) {
  Stub stub([](const httplib::Request& req, httplib::Response& res) {
    const Json content = Json::parse(req.body)["messages"][0]["content"];
    EXPECT_TRUE(content.is_array());
    EXPECT_EQ(content[1]["image_url"]["url"].get<std::string>().rfind("data:image/svg+xml;base64,", 0), 0u);
    res.set_content(reply("ANSWER: D", "stop"), "application/json");
  });
  RunOptions opt;
  opt.modality = Modality::text_image;
  opt.corpus_dir = temp_dir("img");
  fs::create_directories(opt.corpus_dir / "figures");
  std::ofstream(opt.corpus_dir / "figures" / "p0.svg") << "<svg/>";
  opt.ledger = opt.corpus_dir / "preds.jsonl";
  EXPECT_EQ(run_model(stub.endpoint(), stub_corpus(1), opt).at(0).predicted, "D");
}

TEST(Prompt, SubstitutesStatementAndOptions) {
  auto r = stub_corpus(1)[0];
  r.options[1].text_en = "AB ∥ CD.";
  const auto text = build_prompt(r, "Q: {statement}\n{options}\nEnd", Lang::en);
  EXPECT_NE(text.find("Q: Triangle ABC."), std::string::npos);
  EXPECT_NE(text.find("B. AB ∥ CD."), std::string::npos);
  EXPECT_EQ(text.find("{options}"), std::string::npos);
}
