#include "ragjack/malicious_text.hpp"

#include <charconv>

namespace ragjack {

std::string assemble(std::string_view retrieval, std::string_view hijack_template,
                     std::string_view instruction) {
  std::string suffix;
  if (auto pos = hijack_template.find(kInstructionPlaceholder); pos != std::string_view::npos) {
    suffix.append(hijack_template.substr(0, pos));
    suffix.append(instruction);
    suffix.append(hijack_template.substr(pos + kInstructionPlaceholder.size()));
  } else if (hijack_template.empty()) {
    suffix = std::string(instruction);
  } else if (instruction.empty()) {
    suffix = std::string(hijack_template);
  } else {
    suffix.append(hijack_template).append(" ").append(instruction);
  }
  if (retrieval.empty()) return suffix;
  if (suffix.empty()) return std::string(retrieval);
  std::string out(retrieval);
  out.push_back(' ');
  out += suffix;
  return out;
}

std::string malicious_document_id(std::string_view query_id, int j) {
  std::string id = "mal-";
  id.append(query_id);
  id.push_back('-');
  id += std::to_string(j);
  return id;
}

bool parse_malicious_document_id(std::string_view id, std::string* query_id, int* j) {
  constexpr std::string_view prefix = "mal-";
  if (id.size() <= prefix.size() || id.substr(0, prefix.size()) != prefix) return false;
  const auto dash = id.rfind('-');
  if (dash == std::string_view::npos || dash < prefix.size() + 1 || dash + 1 >= id.size()) {
    return false;
  }
  int value = 0;
  const char* first = id.data() + dash + 1;
  const char* last = id.data() + id.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return false;
  if (query_id) *query_id = std::string(id.substr(prefix.size(), dash - prefix.size()));
  if (j) *j = value;
  return true;
}

}  // namespace ragjack
