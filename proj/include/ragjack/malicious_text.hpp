#pragma once

#include <string>
#include <string_view>

namespace ragjack {

inline constexpr std::string_view kInstructionPlaceholder = "{instruction}";

/// Joins retrieval text R, hijack template H and instruction I. I replaces the
/// placeholder in H when present, otherwise it is appended after H. Non-empty
/// pieces are separated by a single space; nothing else is normalized.
std::string assemble(std::string_view retrieval, std::string_view hijack_template,
                     std::string_view instruction);

/// One injected text m_i^j together with the pieces it was assembled from.
struct MaliciousText {
  std::string query_id;
  int j = 1;
  std::string retrieval_text;
  std::string hijack_text;  ///< template, still carrying the placeholder if it had one
  std::string instruction_text;
  std::string assembled;

  bool operator==(const MaliciousText&) const = default;
};

/// "mal-<query_id>-<j>"
std::string malicious_document_id(std::string_view query_id, int j);

/// Inverse of malicious_document_id; returns false for ids outside the scheme.
bool parse_malicious_document_id(std::string_view id, std::string* query_id, int* j);

}  // namespace ragjack
