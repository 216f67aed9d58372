#pragma once

// Corpus records and the three analysis pair types.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sumalign/text.hpp"

namespace sumalign {

struct GeneratedSummary {
  std::string model;
  TokenizedText text;

  friend bool operator==(const GeneratedSummary&, const GeneratedSummary&) = default;
};

struct ExampleRecord {
  std::string id;
  TokenizedText document;
  TokenizedText reference;  // may be empty
  std::vector<GeneratedSummary> generated;

  bool has_reference() const noexcept { return !reference.empty(); }
  const TokenizedText& field(const FieldId& f) const;

  friend bool operator==(const ExampleRecord&, const ExampleRecord&) = default;
};

enum class PairType { DocGenerated, DocReference, ReferenceGenerated };

/// "doc_generated" | "doc_reference" | "reference_generated"
std::string_view to_string(PairType type);
std::optional<PairType> parse_pair_type(std::string_view name);

struct PairRef {
  PairType type = PairType::DocReference;
  std::size_t gen = 0;  // generated index; 0 for doc_reference

  friend bool operator==(const PairRef&, const PairRef&) = default;
};

/// DocReference once (when a reference exists), then DocGenerated for each
/// generated summary, then ReferenceGenerated for each (when a reference
/// exists).
std::vector<PairRef> enumerate_pairs(const ExampleRecord& example);

/// The compared texts of a pair: `source` plays the document role (columns,
/// lexical source), `summary` the summary role.
struct PairTexts {
  const TokenizedText& source;
  const TokenizedText& summary;
};
PairTexts pair_texts(const ExampleRecord& example, const PairRef& pair);

/// One record per non-blank line. Ids default to the 1-based line number.
/// Throws ParseError, SchemaError, DuplicateId.
std::vector<ExampleRecord> parse_jsonl(std::istream& in,
                                       const StopList& stoplist = StopList::english());
std::vector<ExampleRecord> load_jsonl(const std::filesystem::path& path,
                                      const StopList& stoplist = StopList::english());

}  // namespace sumalign
