#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <string>

#include <nlohmann/json.hpp>

namespace geoforge {

using Json = nlohmann::json;

// JSONL with a header line {"schema": kind, "version": v}. Every artifact the
// pipeline writes goes through this pair.
class JsonlWriter {
public:
  // Writes to `path`.tmp and renames on close(), so a killed run never leaves
  // a half-written artifact under the final name. Throws Error(Io).
  JsonlWriter(std::filesystem::path path, const std::string& kind, int version);
  ~JsonlWriter();
  JsonlWriter(const JsonlWriter&) = delete;
  JsonlWriter& operator=(const JsonlWriter&) = delete;

  void write(const Json& row);
  void close();

private:
  std::filesystem::path path_, tmp_;
  std::ofstream out_;
  bool open_ = false;
};

// Calls `row(json, line_number)` for each body line (1-based, header is line 1).
// Throws Error(Io), Error(SchemaMismatch) naming both kinds or versions, and
// Error(MalformedLine) with the line number for unparsable lines.
void read_jsonl(const std::filesystem::path& path, const std::string& kind, int version,
                const std::function<void(const Json&, int)>& row);
// Same, over a stream; `source` names it in messages.
void read_jsonl(std::istream& in, const std::string& source, const std::string& kind, int version,
                const std::function<void(const Json&, int)>& row);

// Canonical dump used for every artifact line.
std::string dump_line(const Json& j);

}  // namespace geoforge
