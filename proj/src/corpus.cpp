#include "sumalign/corpus.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "sumalign/error.hpp"

namespace sumalign {

const TokenizedText& ExampleRecord::field(const FieldId& f) const {
  switch (f.kind) {
    case FieldKind::Document:
      return document;
    case FieldKind::Reference:
      return reference;
    case FieldKind::Generated:
      return generated.at(f.index).text;
  }
  return document;
}

std::string_view to_string(PairType type) {
  switch (type) {
    case PairType::DocGenerated:
      return "doc_generated";
    case PairType::DocReference:
      return "doc_reference";
    case PairType::ReferenceGenerated:
      return "reference_generated";
  }
  return "unknown";
}

std::optional<PairType> parse_pair_type(std::string_view name) {
  for (const PairType t :
       {PairType::DocGenerated, PairType::DocReference, PairType::ReferenceGenerated}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

std::vector<PairRef> enumerate_pairs(const ExampleRecord& example) {
  std::vector<PairRef> out;
  const std::size_t n = example.generated.size();
  out.reserve(1 + 2 * n);
  if (example.has_reference()) out.push_back({PairType::DocReference, 0});
  for (std::size_t k = 0; k < n; ++k) out.push_back({PairType::DocGenerated, k});
  if (example.has_reference()) {
    for (std::size_t k = 0; k < n; ++k) out.push_back({PairType::ReferenceGenerated, k});
  }
  return out;
}

PairTexts pair_texts(const ExampleRecord& example, const PairRef& pair) {
  switch (pair.type) {
    case PairType::DocGenerated:
      return {example.document, example.generated.at(pair.gen).text};
    case PairType::DocReference:
      return {example.document, example.reference};
    case PairType::ReferenceGenerated:
      return {example.reference, example.generated.at(pair.gen).text};
  }
  return {example.document, example.reference};
}

std::vector<ExampleRecord> parse_jsonl(std::istream& in, const StopList& stoplist) {
  std::vector<ExampleRecord> corpus;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");

    auto required_text = [&](const char* key) -> std::string {
      if (!obj.contains(key)) throw SchemaError(line_no, key, "missing");
      if (!obj[key].is_string()) throw SchemaError(line_no, key, "must be a string");
      return obj[key].get<std::string>();
    };

    ExampleRecord rec;
    if (obj.contains("id")) {
      if (!obj["id"].is_string()) throw SchemaError(line_no, "id", "must be a string");
      rec.id = obj["id"].get<std::string>();
    } else {
      rec.id = std::to_string(line_no);
    }
    rec.document = tokenize(required_text("document"), stoplist, FieldId::document());
    rec.reference = tokenize(required_text("reference"), stoplist, FieldId::reference());

    if (obj.contains("generated")) {
      const auto& gen = obj["generated"];
      if (!gen.is_array()) throw SchemaError(line_no, "generated", "must be an array");
      for (std::size_t k = 0; k < gen.size(); ++k) {
        const auto& item = gen[k];
        const std::string field = "generated[" + std::to_string(k) + "]";
        std::string model;
        std::string text;
        if (item.is_string()) {
          model = "model_" + std::to_string(k);
          text = item.get<std::string>();
        } else if (item.is_object()) {
          if (!item.contains("model") || !item["model"].is_string()) {
            throw SchemaError(line_no, field + ".model", "missing or not a string");
          }
          if (!item.contains("text") || !item["text"].is_string()) {
            throw SchemaError(line_no, field + ".text", "missing or not a string");
          }
          model = item["model"].get<std::string>();
          text = item["text"].get<std::string>();
        } else {
          throw SchemaError(line_no, field, "must be a string or {\"model\",\"text\"} object");
        }
        rec.generated.push_back({std::move(model), tokenize(text, stoplist, FieldId::generated(k))});
      }
    }

    if (!seen.insert(rec.id).second) {
      throw DuplicateId("line " + std::to_string(line_no) + ": duplicate id '" + rec.id + "'");
    }
    corpus.push_back(std::move(rec));
  }
  return corpus;
}

std::vector<ExampleRecord> load_jsonl(const std::filesystem::path& path, const StopList& stoplist) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus " + path.string());
  return parse_jsonl(in, stoplist);
}

}  // namespace sumalign
