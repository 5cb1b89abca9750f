#include "ragjack/corpus.hpp"

#include <fstream>
#include <sstream>

#include "jsonl.hpp"
#include "ragjack/error.hpp"
#include "ragjack/hash.hpp"

namespace ragjack {

using detail::Json;
using detail::OrderedJson;

std::string to_string(Provenance p) { return p == Provenance::clean ? "clean" : "malicious"; }

CorpusStore::CorpusStore(std::vector<Document> documents) : docs_(std::move(documents)) {
  index_.reserve(docs_.size());
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    const Document& d = docs_[i];
    if (!index_.emplace(d.id, i).second) throw DuplicateIdError(d.id);
    const bool malicious = d.provenance == Provenance::malicious;
    if (malicious != d.origin_query_id.has_value()) {
      throw ValidationError("document '" + d.id +
                            "': origin_query_id must be set exactly for malicious documents");
    }
    if (!malicious) ++clean_;
  }
}

CorpusStore CorpusStore::parse_jsonl(std::istream& in, const std::string& source_name) {
  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> seen;
  detail::for_each_jsonl(in, source_name, [&](const Json& obj, std::size_t line) {
    Document d;
    d.id = detail::required_string(obj, "id", source_name, line);
    d.text = detail::required_string(obj, "text", source_name, line);
    if (auto it = obj.find("provenance"); it != obj.end() && !it->is_null()) {
      const auto& p = it->get_ref<const std::string&>();
      if (p == "malicious") {
        d.provenance = Provenance::malicious;
      } else if (p != "clean") {
        throw ParseError(source_name, line, "provenance must be \"clean\" or \"malicious\"");
      }
    }
    if (auto it = obj.find("origin_query_id"); it != obj.end() && !it->is_null()) {
      d.origin_query_id = it->get<std::string>();
    }
    if (auto it = obj.find("origin_index"); it != obj.end() && !it->is_null()) {
      d.origin_index = it->get<int>();
    }
    if ((d.provenance == Provenance::malicious) != d.origin_query_id.has_value()) {
      throw ParseError(source_name, line,
                       "origin_query_id must be present exactly when provenance is malicious");
    }
    if (!seen.emplace(d.id, line).second) throw DuplicateIdError(d.id);
    docs.push_back(std::move(d));
  });
  return CorpusStore(std::move(docs));
}

CorpusStore CorpusStore::ingest_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus '" + path.string() + "'");
  return parse_jsonl(in, path.string());
}

std::string CorpusStore::to_jsonl() const {
  std::string out;
  for (const auto& d : docs_) {
    OrderedJson obj;
    obj["id"] = d.id;
    obj["text"] = d.text;
    obj["provenance"] = to_string(d.provenance);
    if (d.origin_query_id) obj["origin_query_id"] = *d.origin_query_id;
    if (d.origin_index) obj["origin_index"] = *d.origin_index;
    out += detail::dump_line(obj);
    out.push_back('\n');
  }
  return out;
}

void CorpusStore::persist(const std::filesystem::path& path) const {
  detail::write_file(path, to_jsonl());
}

CorpusStore CorpusStore::inject(std::span<const MaliciousText> texts) const {
  std::vector<Document> docs = docs_;
  docs.reserve(docs.size() + texts.size());
  for (const auto& m : texts) {
    Document d;
    d.id = malicious_document_id(m.query_id, m.j);
    d.text = m.assembled;
    d.provenance = Provenance::malicious;
    d.origin_query_id = m.query_id;
    d.origin_index = m.j;
    docs.push_back(std::move(d));
  }
  return CorpusStore(std::move(docs));
}

const Document* CorpusStore::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &docs_[it->second];
}

std::uint64_t CorpusStore::content_hash() const { return fnv1a64(to_jsonl()); }

}  // namespace ragjack
