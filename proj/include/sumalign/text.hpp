#pragma once

// Tokenization, normalization and the text/span model shared by every
// other module. All character offsets are Unicode scalar indices.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace sumalign {

enum class FieldKind { Document, Reference, Generated };

/// Which text of an example a TokenizedText holds. `index` is only
/// meaningful for generated summaries.
struct FieldId {
  FieldKind kind = FieldKind::Document;
  std::size_t index = 0;

  static FieldId document() { return {FieldKind::Document, 0}; }
  static FieldId reference() { return {FieldKind::Reference, 0}; }
  static FieldId generated(std::size_t k) { return {FieldKind::Generated, k}; }

  friend bool operator==(const FieldId&, const FieldId&) = default;
};

std::string to_string(const FieldId& field);

struct Token {
  std::string surface;
  std::size_t start = 0;  // scalar offsets into raw, half-open
  std::size_t end = 0;
  std::size_t byte_start = 0;  // the same range in UTF-8 bytes
  std::size_t byte_end = 0;
  std::string norm;
  bool is_stop = false;
  bool is_punct = false;

  /// Neither a stopword nor punctuation.
  bool is_content() const noexcept { return !is_stop && !is_punct; }

  friend bool operator==(const Token&, const Token&) = default;
};

/// Half-open token range [start_token, end_token).
struct Span {
  std::size_t start_token = 0;
  std::size_t end_token = 0;

  std::size_t size() const noexcept { return end_token - start_token; }
  bool contains(std::size_t token) const noexcept {
    return token >= start_token && token < end_token;
  }

  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

struct TokenizedText {
  std::string raw;
  std::vector<Token> tokens;
  FieldId field;
  std::string normalizer_version;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  std::size_t content_token_count() const noexcept;

  friend bool operator==(const TokenizedText&, const TokenizedText&) = default;
};

/// A set of normalized stopwords. Entries are normalized on construction.
class StopList {
 public:
  StopList() = default;

  /// The bundled English list (data/stopwords-en-v1.txt).
  static const StopList& english();
  /// One token per line; blank lines and lines starting with '#' ignored.
  static StopList parse(std::string_view text, std::string name = "custom");
  static StopList from_file(const std::filesystem::path& path);

  bool contains(std::string_view norm) const;
  std::size_t size() const noexcept { return words_.size(); }
  const std::string& name() const noexcept { return name_; }
  /// SHA-256 over the sorted entries; identifies the list in cache configs.
  std::string digest() const;

 private:
  std::string name_;
  std::unordered_set<std::string> words_;
};

/// Identifies tokenizer rules plus the Unicode tables used for normalization.
const std::string& normalizer_version();

/// NFKC normalization followed by full case folding (ICU NFKC_Casefold).
std::string normalize(std::string_view surface);

bool is_stopword(std::string_view norm, const StopList& stoplist);

/// True iff every scalar of `surface` is Unicode punctuation or symbol.
bool is_punctuation(std::string_view surface);

/// Splits on Unicode whitespace, and splits runs of punctuation/symbol
/// characters from adjacent word characters.
TokenizedText tokenize(std::string_view text,
                       const StopList& stoplist = StopList::english(),
                       FieldId field = FieldId::document());

/// Rebuilds a TokenizedText from stored token offsets (used when loading
/// caches). Throws Error if the offsets do not fit `raw`.
TokenizedText restore_tokens(std::string raw, FieldId field,
                             std::string normalizer_version,
                             const std::vector<Token>& offsets_and_flags);

/// Normalized forms of tokens[span].
std::vector<std::string> span_norms(const TokenizedText& text, const Span& span);

}  // namespace sumalign
