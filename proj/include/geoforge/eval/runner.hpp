#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "geoforge/dataset/corpus.hpp"
#include "geoforge/eval/metrics.hpp"
#include "geoforge/renderer/text.hpp"

namespace geoforge {

enum class Modality { text_only, text_image };

struct EndpointConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8000/v1; requests go to <base>/chat/completions
  std::string model;
  std::string auth_header = "Authorization";
  std::string api_key_env;  // environment variable holding the key; sent as "Bearer <key>"
  double temperature = 0.0;
  int max_tokens = 16384;
  int timeout_s = 600;
  int retries = 4;
  int backoff_ms = 500;       // doubled per retry
  int backoff_cap_ms = 8000;
  int jobs = 1;               // concurrent requests
};

void validate(const EndpointConfig& config);

struct RunOptions {
  Modality modality = Modality::text_only;
  Lang lang = Lang::en;
  std::string prompt_template;               // {statement} and {options} are substituted
  std::filesystem::path corpus_dir;          // figure paths resolve against it
  std::filesystem::path ledger;              // predictions JSONL, appended to and resumed from
  std::optional<std::size_t> max_requests;   // stop after this many new requests
};

// The user message for one problem.
std::string build_prompt(const CorpusRecord& record, const std::string& prompt_template, Lang lang);

// One request per problem not yet completed in the ledger (ids recorded with an
// error are retried). Returns the ledger's predictions for the corpus, in corpus
// order. Throws Error(MissingImage) before any request when a figure is absent
// for text_image, Error(InvalidConfig) for a bad endpoint, Error(Io).
std::vector<Prediction> run_model(const EndpointConfig& endpoint, std::span<const CorpusRecord> corpus,
                                  const RunOptions& options);

}  // namespace geoforge
