#include "geoforge/dataset/jsonl.hpp"

#include <system_error>

#include "geoforge/common/error.hpp"

namespace geoforge {

JsonlWriter::JsonlWriter(std::filesystem::path path, const std::string& kind, int version)
    : path_(std::move(path)), tmp_(path_.string() + ".tmp") {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(tmp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(ErrorCode::Io, "cannot write " + tmp_.string());
  open_ = true;
  write(Json{{"schema", kind}, {"version", version}});
}

JsonlWriter::~JsonlWriter() {
  if (!open_) return;
  out_.close();
  std::error_code ec;
  std::filesystem::remove(tmp_, ec);
}

void JsonlWriter::write(const Json& row) {
  out_ << dump_line(row) << '\n';
  if (!out_) throw Error(ErrorCode::Io, "write failed: " + tmp_.string());
}

void JsonlWriter::close() {
  if (!open_) return;
  out_.close();
  open_ = false;
  if (!out_) throw Error(ErrorCode::Io, "write failed: " + tmp_.string());
  std::error_code ec;
  std::filesystem::rename(tmp_, path_, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp_.string() + ": " + ec.message());
}

std::string dump_line(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::strict); }

void read_jsonl(const std::filesystem::path& path, const std::string& kind, int version,
                const std::function<void(const Json&, int)>& row) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  read_jsonl(in, path.string(), kind, version, row);
}

void read_jsonl(std::istream& in, const std::string& source, const std::string& kind, int version,
                const std::function<void(const Json&, int)>& row) {
  std::string line;
  int no = 0;
  auto parse = [&](int n) {
    try {
      return Json::parse(line);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::MalformedLine, source + ":" + std::to_string(n) + ": " + e.what());
    }
  };
  if (!std::getline(in, line)) throw Error(ErrorCode::MalformedLine, source + ":1: missing header");
  ++no;
  const Json header = parse(no);
  if (!header.is_object() || !header.contains("schema") || !header.contains("version") ||
      !header["schema"].is_string() || !header["version"].is_number_integer())
    throw Error(ErrorCode::MalformedLine, source + ":1: bad header");
  if (header["schema"] != kind)
    throw Error(ErrorCode::SchemaMismatch,
                source + ": schema " + header["schema"].get<std::string>() + ", reader expects " + kind);
  if (header["version"] != version)
    throw Error(ErrorCode::SchemaMismatch, source + ": " + kind + " v" +
                                               std::to_string(header["version"].get<int>()) + ", reader expects v" +
                                               std::to_string(version));
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    const Json j = parse(no);
    if (!j.is_object()) throw Error(ErrorCode::MalformedLine, source + ":" + std::to_string(no) + ": not an object");
    try {
      row(j, no);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::MalformedLine, source + ":" + std::to_string(no) + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedLine) throw;
      throw Error(ErrorCode::MalformedLine, source + ":" + std::to_string(no) + ": " + e.what());
    }
  }
}

}  // namespace geoforge
