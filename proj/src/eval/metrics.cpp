#include "geoforge/eval/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <unordered_map>

#include "geoforge/common/error.hpp"
#include "geoforge/common/rng.hpp"

namespace geoforge {

LabelMask mask_from_labels(std::string_view labels) {
  LabelMask m = 0;
  for (char c : labels)
    if (c >= 'A' && c <= 'D') m |= static_cast<LabelMask>(1u << (c - 'A'));
  return m;
}

std::string labels_from_mask(LabelMask m) {
  std::string s;
  for (int i = 0; i < 4; ++i)
    if (m & (1u << i)) s.push_back(static_cast<char>('A' + i));
  return s;
}

Json to_json(const Prediction& p) {
  Json j{{"problem_id", p.problem_id},
         {"raw_text", p.raw_text},
         {"predicted", p.predicted ? Json(*p.predicted) : Json(nullptr)},
         {"truncated", p.truncated}};
  if (p.latency_ms) j["latency_ms"] = *p.latency_ms;
  if (p.prompt_tokens) j["prompt_tokens"] = *p.prompt_tokens;
  if (p.completion_tokens) j["completion_tokens"] = *p.completion_tokens;
  if (!p.error.empty()) j["error"] = p.error;
  return j;
}

Prediction prediction_from_json(const Json& j) {
  Prediction p;
  p.problem_id = j.at("problem_id").get<std::string>();
  p.raw_text = j.value("raw_text", "");
  const Json& pred = j.at("predicted");
  if (!pred.is_null()) p.predicted = labels_from_mask(mask_from_labels(pred.get<std::string>()));
  p.truncated = j.value("truncated", false);
  if (j.contains("latency_ms")) p.latency_ms = j["latency_ms"].get<double>();
  if (j.contains("prompt_tokens")) p.prompt_tokens = j["prompt_tokens"].get<int>();
  if (j.contains("completion_tokens")) p.completion_tokens = j["completion_tokens"].get<int>();
  p.error = j.value("error", "");
  return p;
}

void write_predictions(std::span<const Prediction> preds, const std::filesystem::path& path) {
  JsonlWriter w(path, kPredictionSchema, kPredictionSchemaVersion);
  for (const auto& p : preds) w.write(to_json(p));
  w.close();
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  // An interrupted append may leave a torn final line; it is dropped.
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  const bool torn = !lines.empty() && !Json::accept(lines.back());
  if (torn) lines.pop_back();
  std::stringstream body;
  for (const auto& l : lines) body << l << '\n';
  std::vector<Prediction> out;
  std::unordered_map<std::string, std::size_t> at;
  read_jsonl(body, path.string(), kPredictionSchema, kPredictionSchemaVersion, [&](const Json& j, int) {
    Prediction p = prediction_from_json(j);
    const auto it = at.find(p.problem_id);
    if (it == at.end()) {
      at.emplace(p.problem_id, out.size());
      out.push_back(std::move(p));
    } else {
      out[it->second] = std::move(p);
    }
  });
  return out;
}

std::optional<std::string> parse_answer(std::string_view raw_text) {
  const std::string text(raw_text);
  static const std::regex answer_line(
      R"((?:ANSWER|Answer|answer|答案)\s*[:：]\s*[`*\[{(（\s]*([A-D](?:\s*(?:,|，|、|;|/|&|\band\b|和|\s)\s*[A-D])*)(?![A-Za-z]))");
  LabelMask m = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), answer_line); it != std::sregex_iterator(); ++it)
    m = mask_from_labels((*it)[1].str());
  if (m) return labels_from_mask(m);

  // Standalone label letters, grouped into runs joined only by separators.
  // A capital A followed by a lowercase word is read as an article.
  static const std::regex label(R"((^|[^A-Za-z0-9])([A-D])(?![A-Za-z0-9]))");
  static const std::regex separator(R"(^(?:[\s,，、;/&()（）\[\]*.:：]|\band\b|\bor\b|和)*$)");
  static const std::regex article(R"(^\s+[a-z]+)");
  static const std::regex conj(R"(^\s+(?:and|or)\b)");
  LabelMask run = 0, last = 0;
  std::size_t run_end = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), label); it != std::sregex_iterator(); ++it) {
    const std::size_t pos = static_cast<std::size_t>(it->position(2));
    const std::string after = text.substr(pos + 1, 24);
    const char c = text[pos];
    if (c == 'A' && std::regex_search(after, article) && !std::regex_search(after, conj)) continue;
    const bool joined = run && std::regex_match(text.substr(run_end, pos - run_end), separator);
    run = static_cast<LabelMask>((joined ? run : 0) | mask_from_labels(std::string(1, c)));
    run_end = pos + 1;
    last = run;
  }
  if (last) return labels_from_mask(last);
  return std::nullopt;
}

Outcome classify_outcome(const Prediction& prediction, std::string_view answer_key) {
  if (prediction.truncated) return Outcome::out_of_length;
  if (!prediction.predicted) return Outcome::no_answer;
  return mask_from_labels(*prediction.predicted) == mask_from_labels(answer_key) ? Outcome::right_answer
                                                                                 : Outcome::wrong_answer;
}

std::vector<GoldItem> gold_items(std::span<const CorpusRecord> records) {
  std::vector<GoldItem> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.id, r.answer_key, r.difficulty_band});
  return out;
}

namespace {

int band_index(const std::string& band) {
  for (int b = 0; b < 3; ++b)
    if (band == kBands[b]) return b;
  return -1;
}

struct Accumulator {
  const MetricsConfig& config;
  MetricsReport r;
  std::array<std::size_t, 3> band_right{};
  double p = 0, rec = 0, f = 0, hl = 0;
  double hits = 0, selected = 0, gold = 0;
  double sel_sum = 0;
  std::size_t sel_n = 0;

  void add(Outcome o, LabelMask pred, LabelMask key, int band) {
    ++r.n;
    ++r.outcome_counts[static_cast<int>(o)];
    if (band >= 0) {
      ++r.band_n[band];
      if (o == Outcome::right_answer) ++band_right[band];
    }
    const bool committed = o == Outcome::right_answer || o == Outcome::wrong_answer;
    const LabelMask s = committed ? pred : 0;
    const double inter = std::popcount(static_cast<unsigned>(s & key));
    const double ns = std::popcount(static_cast<unsigned>(s)), nk = std::popcount(static_cast<unsigned>(key));
    const double pi = ns > 0 ? inter / ns : 0.0;
    const double ri = nk > 0 ? inter / nk : 0.0;
    p += pi;
    rec += ri;
    f += pi + ri > 0 ? 2 * pi * ri / (pi + ri) : 0.0;
    hl += std::popcount(static_cast<unsigned>(s ^ key)) / 4.0;
    hits += inter, selected += ns, gold += nk;
    if (committed || config.avg_selected_counts_no_answer) sel_sum += ns, ++sel_n;
  }

  MetricsReport finish() {
    if (r.n == 0) return r;
    const double n = static_cast<double>(r.n);
    r.em_all = 100.0 * static_cast<double>(r.outcome_counts[0]) / n;
    const auto em = [&](int b) {
      return r.band_n[b] ? 100.0 * static_cast<double>(band_right[b]) / static_cast<double>(r.band_n[b]) : 0.0;
    };
    r.em_easy = em(0), r.em_medium = em(1), r.em_hard = em(2);
    if (config.micro) {
      r.precision = selected > 0 ? 100.0 * hits / selected : 0.0;
      r.recall = gold > 0 ? 100.0 * hits / gold : 0.0;
      r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    } else {
      r.precision = 100.0 * p / n;
      r.recall = 100.0 * rec / n;
      r.f1 = 100.0 * f / n;
    }
    r.hamming_loss = 100.0 * hl / n;
    r.hamming_accuracy = 100.0 - r.hamming_loss;
    r.avg_selected = sel_n ? sel_sum / static_cast<double>(sel_n) : 0.0;
    return r;
  }
};

}  // namespace

MetricsReport compute_metrics(std::span<const Prediction> predictions, std::span<const GoldItem> gold,
                              const MetricsConfig& config) {
  std::unordered_map<std::string, const GoldItem*> by_id;
  for (const auto& g : gold) by_id.emplace(g.id, &g);
  Accumulator acc{config, {}};
  for (const auto& p : predictions) {
    const auto it = by_id.find(p.problem_id);
    if (it == by_id.end()) throw Error(ErrorCode::UnknownProblemId, p.problem_id);
    const GoldItem& g = *it->second;
    acc.add(classify_outcome(p, g.answer_key), p.predicted ? mask_from_labels(*p.predicted) : 0,
            mask_from_labels(g.answer_key), band_index(g.band));
  }
  return acc.finish();
}

Json to_json(const MetricsReport& r) {
  Json outcomes = Json::object();
  for (int i = 0; i < 4; ++i) outcomes[kOutcomeNames[i]] = r.outcome_counts[i];
  return {{"n", r.n},
          {"em_all", r.em_all},
          {"em_easy", r.em_easy},
          {"em_medium", r.em_medium},
          {"em_hard", r.em_hard},
          {"band_n", {{"easy", r.band_n[0]}, {"medium", r.band_n[1]}, {"hard", r.band_n[2]}}},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"hamming_loss", r.hamming_loss},
          {"hamming_accuracy", r.hamming_accuracy},
          {"avg_selected", r.avg_selected},
          {"outcome_counts", outcomes}};
}

std::string format_table(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %7s %7s %7s %7s %7s %7s %7s %7s %9s\n", "Model", "EM", "Easy", "Medium",
                "Hard", "P", "R", "F1", "HA", "Avg#Sel");
  out += buf;
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof buf, "%-24s %7.2f %7.2f %7.2f %7.2f %7.2f %7.2f %7.2f %7.2f %9.2f\n", name.c_str(),
                  r.em_all, r.em_easy, r.em_medium, r.em_hard, r.precision, r.recall, r.f1, r.hamming_accuracy,
                  r.avg_selected);
    out += buf;
  }
  return out;
}

std::optional<SubsetLaw> subset_law_from_name(std::string_view name) {
  for (SubsetLaw l : {SubsetLaw::uniform16, SubsetLaw::uniform_nonempty, SubsetLaw::empty})
    if (subset_law_name(l) == name) return l;
  return std::nullopt;
}

std::string_view subset_law_name(SubsetLaw law) {
  switch (law) {
    case SubsetLaw::uniform16: return "uniform16";
    case SubsetLaw::uniform_nonempty: return "uniform_nonempty";
    case SubsetLaw::empty: return "empty";
  }
  return "";
}

MetricsReport random_baseline(std::span<const GoldItem> gold, std::size_t trials, std::uint64_t seed, SubsetLaw law,
                              const MetricsConfig& config) {
  if (trials == 0) throw Error(ErrorCode::InvalidConfig, "trials must be at least 1");
  if (gold.empty()) throw Error(ErrorCode::InvalidConfig, "empty corpus");
  Rng rng(seed);
  Accumulator acc{config, {}};
  for (std::size_t t = 0; t < trials; ++t) {
    const GoldItem& g = gold[t % gold.size()];
    LabelMask pred = 0;
    switch (law) {
      case SubsetLaw::uniform16: pred = static_cast<LabelMask>(rng.below(16)); break;
      case SubsetLaw::uniform_nonempty: pred = static_cast<LabelMask>(1 + rng.below(15)); break;
      case SubsetLaw::empty: break;
    }
    const LabelMask key = mask_from_labels(g.answer_key);
    acc.add(pred == key ? Outcome::right_answer : Outcome::wrong_answer, pred, key, band_index(g.band));
  }
  return acc.finish();
}

}  // namespace geoforge
