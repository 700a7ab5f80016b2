#include "geoforge/eval/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <openssl/evp.h>

#include "geoforge/common/error.hpp"

namespace geoforge {

namespace {

std::string base64(const std::string& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error(ErrorCode::InvalidConfig, "endpoint URL needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  Url u{url.substr(0, slash), slash == std::string::npos ? "" : url.substr(slash)};
  while (!u.path.empty() && u.path.back() == '/') u.path.pop_back();
  return u;
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) s.replace(pos, from.size(), to);
}

// Ledger file: header plus one prediction per line, appended under a lock.
class Ledger {
public:
  explicit Ledger(const std::filesystem::path& path) : path_(path) {
    if (std::filesystem::exists(path_)) {
      done_ = read_predictions(path_);
      rewrite_if_torn();
      out_.open(path_, std::ios::binary | std::ios::app);
    } else {
      if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
      out_.open(path_, std::ios::binary | std::ios::trunc);
      out_ << dump_line(Json{{"schema", kPredictionSchema}, {"version", kPredictionSchemaVersion}}) << '\n';
      out_.flush();
    }
    if (!out_) throw Error(ErrorCode::Io, "cannot append to " + path_.string());
  }

  std::set<std::string> completed() const {
    std::set<std::string> ids;
    for (const auto& p : done_)
      if (p.error.empty()) ids.insert(p.problem_id);
    return ids;
  }

  void append(const Prediction& p) {
    const std::string line = dump_line(to_json(p)) + '\n';
    std::lock_guard lock(mu_);
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    out_.flush();
    if (!out_) throw Error(ErrorCode::Io, "write failed: " + path_.string());
  }

private:
  void rewrite_if_torn() {
    const std::string text = read_file(path_);
    if (text.empty() || text.back() == '\n') return;
    JsonlWriter w(path_, kPredictionSchema, kPredictionSchemaVersion);
    for (const auto& p : done_) w.write(to_json(p));
    w.close();
  }

  std::filesystem::path path_;
  std::vector<Prediction> done_;
  std::ofstream out_;
  std::mutex mu_;
};

struct Reply {
  std::string text;
  bool truncated = false;
  std::optional<int> prompt_tokens, completion_tokens;
};

class Client {
public:
  explicit Client(const EndpointConfig& config) : config_(config), url_(split_url(config.base_url)) {
    if (!config.api_key_env.empty()) {
      const char* key = std::getenv(config.api_key_env.c_str());
      if (!key) throw Error(ErrorCode::InvalidConfig, "environment variable " + config.api_key_env + " is not set");
      auth_ = std::string("Bearer ") + key;
    }
  }

  Reply complete(const Json& content) const {
    const Json body{{"model", config_.model},
                    {"messages", Json::array({Json{{"role", "user"}, {"content", content}}})},
                    {"temperature", config_.temperature},
                    {"max_tokens", config_.max_tokens},
                    {"n", 1}};
    const std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
      if (attempt > 0) {
        const long delay = std::min<long>(config_.backoff_cap_ms, static_cast<long>(config_.backoff_ms) << (attempt - 1));
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      }
      httplib::Client cli(url_.origin);
      cli.set_connection_timeout(30);
      cli.set_read_timeout(config_.timeout_s);
      cli.set_write_timeout(60);
      httplib::Headers headers;
      if (!auth_.empty()) headers.emplace(config_.auth_header, auth_);
      const auto res = cli.Post(url_.path + "/chat/completions", headers, payload, "application/json");
      if (!res) {
        last_error = "transport: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200)
        throw Error(ErrorCode::EndpointError, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
      return parse(res->body);
    }
    throw Error(ErrorCode::EndpointError, last_error + " after " + std::to_string(config_.retries) + " retries");
  }

private:
  Reply parse(const std::string& body) const {
    Reply r;
    try {
      const Json j = Json::parse(body);
      const Json& choice = j.at("choices").at(0);
      const Json& content = choice.at("message").at("content");
      r.text = content.is_string() ? content.get<std::string>() : "";
      if (j.contains("usage") && j["usage"].is_object()) {
        const Json& u = j["usage"];
        if (u.contains("prompt_tokens")) r.prompt_tokens = u["prompt_tokens"].get<int>();
        if (u.contains("completion_tokens")) r.completion_tokens = u["completion_tokens"].get<int>();
      }
      const Json finish = choice.value("finish_reason", Json(nullptr));
      if (finish.is_string())
        r.truncated = finish == "length";
      else
        r.truncated = r.completion_tokens && *r.completion_tokens >= config_.max_tokens;
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::EndpointError, std::string("unexpected response: ") + e.what());
    }
    return r;
  }

  const EndpointConfig& config_;
  Url url_;
  std::string auth_;
};

}  // namespace

void validate(const EndpointConfig& c) {
  split_url(c.base_url);
  if (c.model.empty()) throw Error(ErrorCode::InvalidConfig, "model name is empty");
  if (c.max_tokens < 1 || c.retries < 0 || c.backoff_ms < 0 || c.backoff_cap_ms < 0 || c.jobs < 1 || c.timeout_s < 1)
    throw Error(ErrorCode::InvalidConfig, "endpoint limits must be positive");
}

std::string build_prompt(const CorpusRecord& record, const std::string& prompt_template, Lang lang) {
  std::string options;
  for (const auto& o : record.options) {
    if (!options.empty()) options += '\n';
    options += std::string(1, o.label) + ". " + (lang == Lang::en ? o.text_en : o.text_zh);
  }
  std::string out = prompt_template;
  replace_all(out, "{statement}", lang == Lang::en ? record.statement_en : record.statement_zh);
  replace_all(out, "{options}", options);
  return out;
}

std::vector<Prediction> run_model(const EndpointConfig& endpoint, std::span<const CorpusRecord> corpus,
                                  const RunOptions& options) {
  validate(endpoint);
  if (options.ledger.empty()) throw Error(ErrorCode::InvalidConfig, "run needs a ledger path");
  if (options.modality == Modality::text_image)
    for (const auto& r : corpus)
      if (r.figure_path.empty() || !std::filesystem::exists(options.corpus_dir / r.figure_path))
        throw Error(ErrorCode::MissingImage, r.id + ": " + (options.corpus_dir / r.figure_path).string());

  Ledger ledger(options.ledger);
  const auto completed = ledger.completed();
  std::vector<const CorpusRecord*> todo;
  for (const auto& r : corpus)
    if (!completed.count(r.id)) todo.push_back(&r);
  const std::size_t budget = std::min(todo.size(), options.max_requests.value_or(todo.size()));

  const Client client(endpoint);
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < budget;) {
      const CorpusRecord& r = *todo[i];
      Prediction p;
      p.problem_id = r.id;
      try {
        const std::string prompt = build_prompt(r, options.prompt_template, options.lang);
        Json content = prompt;
        if (options.modality == Modality::text_image) {
          const std::string svg = read_file(options.corpus_dir / r.figure_path);
          content = Json::array({Json{{"type", "text"}, {"text", prompt}},
                                 Json{{"type", "image_url"},
                                      {"image_url", {{"url", "data:image/svg+xml;base64," + base64(svg)}}}}});
        }
        const auto t0 = std::chrono::steady_clock::now();
        const Reply reply = client.complete(content);
        p.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        p.raw_text = reply.text;
        p.truncated = reply.truncated;
        p.prompt_tokens = reply.prompt_tokens;
        p.completion_tokens = reply.completion_tokens;
        p.predicted = parse_answer(reply.text);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EndpointError) {
          std::lock_guard lock(err_mu);
          if (!failure) failure = std::current_exception();
          return;
        }
        p.error = e.what();
      }
      ledger.append(p);
    }
  };
  std::vector<std::thread> pool;
  const int width = std::max(1, std::min<int>(endpoint.jobs, static_cast<int>(budget)));
  for (int t = 0; t < width; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::unordered_map<std::string, Prediction> by_id;
  for (auto& p : read_predictions(options.ledger)) by_id[p.problem_id] = std::move(p);
  std::vector<Prediction> out;
  for (const auto& r : corpus)
    if (const auto it = by_id.find(r.id); it != by_id.end()) out.push_back(it->second);
  return out;
}

}  // namespace geoforge
