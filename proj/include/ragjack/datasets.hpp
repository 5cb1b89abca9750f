#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ragjack/attack.hpp"
#include "ragjack/defense.hpp"

namespace ragjack {

/// id, question, desired_answer, optional ground_truth.
std::vector<TargetQuery> load_queries(const std::filesystem::path& path);
/// id, template.
std::vector<HijackText> load_hijack_pool(const std::filesystem::path& path);
/// objective, template, expected_answer, optional id (defaults to the objective name).
std::vector<InstructionText> load_instructions(const std::filesystem::path& path);

std::string queries_to_jsonl(std::span<const TargetQuery> queries);
std::string hijack_pool_to_jsonl(std::span<const HijackText> pool);
std::string instructions_to_jsonl(std::span<const InstructionText> instructions);
std::string malicious_texts_to_jsonl(std::span<const MaliciousText> texts);
std::vector<MaliciousText> load_malicious_texts(const std::filesystem::path& path);

/// Handwritten hijack templates in the style of public prompt-injection
/// collections. Includes near-duplicates and one overlong entry so that
/// curation has something to remove.
std::vector<HijackText> bundled_hijack_pool();
/// One instruction per objective; ids equal the objective names.
std::vector<InstructionText> bundled_instructions();
const InstructionText& find_instruction(std::span<const InstructionText> set, std::string_view id);
/// Small English synonym table; no synonym is itself a key.
SynonymTable bundled_synonyms();

}  // namespace ragjack
