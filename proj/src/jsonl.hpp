#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <string>

#include <json.hpp>

#include "ragjack/error.hpp"

namespace ragjack::detail {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

/// Calls fn(object, line_number) for every non-blank line. Blank lines are
/// skipped; anything that is not a JSON object raises ParseError.
inline void for_each_jsonl(std::istream& in, const std::string& source,
                           const std::function<void(const Json&, std::size_t)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(source, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(source, line_no, "expected a JSON object");
    try {
      fn(obj, line_no);
    } catch (const Json::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
}

inline void for_each_jsonl(const std::filesystem::path& path,
                           const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  for_each_jsonl(in, path.string(), fn);
}

inline const std::string& required_string(const Json& obj, const char* key,
                                          const std::string& source, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(source, line, std::string("missing field \"") + key + "\"");
  if (!it->is_string()) {
    throw ParseError(source, line, std::string("field \"") + key + "\" must be a string");
  }
  return it->get_ref<const std::string&>();
}

inline std::string dump_line(const OrderedJson& obj) {
  try {
    return obj.dump();
  } catch (const OrderedJson::exception& e) {
    throw ValidationError(std::string("cannot serialize record: ") + e.what());
  }
}

/// Writes `content` to `path`, creating parent directories.
inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace ragjack::detail
