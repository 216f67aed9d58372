#pragma once

// Lexical alignment: maximal shared n-gram spans between a summary and its
// source text, compared on normalized token forms.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sumalign/text.hpp"

namespace sumalign {

struct AlignConfig {
  std::size_t min_n = 1;
  bool drop_stopword_only = true;  // drop spans with no content token
};

struct LexMatch {
  Span summary_span;
  std::vector<Span> source_spans;  // sorted by start_token, never empty
  std::size_t length = 0;

  friend bool operator==(const LexMatch&, const LexMatch&) = default;
};

struct LexicalAlignment {
  std::vector<LexMatch> matches;  // sorted by summary_span.start_token
  // Covered fraction of the summary's content tokens; empty when the
  // summary has no content tokens.
  std::optional<double> coverage;

  friend bool operator==(const LexicalAlignment&, const LexicalAlignment&) = default;
};

using NGramKey = std::vector<std::string>;

/// Every n-gram of a text (1 <= n <= max_n) mapped to its occurrences.
struct NGramIndex {
  std::map<NGramKey, std::vector<Span>> entries;

  const std::vector<Span>* find(const NGramKey& key) const;
  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
};

inline constexpr std::size_t kUnboundedN = std::numeric_limits<std::size_t>::max();

/// Throws std::invalid_argument when max_n == 0.
NGramIndex build_ngram_index(const TokenizedText& source, std::size_t max_n);

/// Suffix automaton over the normalized tokens of a source text. Answers
/// "longest source substring ending here" queries in amortized O(1) per
/// summary token and enumerates all occurrences of a matched substring in
/// time proportional to their number. Immutable once built.
class SourceIndex {
 public:
  explicit SourceIndex(const TokenizedText& source);

  std::size_t source_size() const noexcept { return source_size_; }
  const std::string& normalizer_version() const noexcept { return normalizer_version_; }

  /// Token id in the source vocabulary, or -1 if the form never occurs.
  std::int32_t token_id(const std::string& norm) const;

  struct Cursor {
    std::int32_t state = 0;
    std::size_t length = 0;
  };
  /// Extends the current match by one token (id from token_id()).
  Cursor advance(Cursor cur, std::int32_t token) const;

  /// All source spans of the `length`-token string represented by `state`,
  /// sorted by start.
  std::vector<Span> occurrences(std::int32_t state, std::size_t length) const;

 private:
  struct State {
    std::size_t len = 0;
    std::int32_t link = -1;
    std::size_t first_end = 0;  // token index where the first occurrence ends
    bool cloned = false;
  };

  std::int32_t transition(std::int32_t state, std::int32_t token) const;
  void set_transition(std::int32_t state, std::int32_t token, std::int32_t target);
  void extend(std::int32_t token, std::size_t position);

  static std::uint64_t edge_key(std::int32_t state, std::int32_t token) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(state)) << 32) |
           static_cast<std::uint32_t>(token);
  }

  std::size_t source_size_ = 0;
  std::string normalizer_version_;
  std::unordered_map<std::string, std::int32_t> vocab_;
  std::vector<State> states_;
  std::unordered_map<std::uint64_t, std::int32_t> edges_;
  std::vector<std::vector<std::int32_t>> edge_labels_;
  std::int32_t last_ = 0;
  // suffix-link tree in CSR form
  std::vector<std::size_t> child_offsets_;
  std::vector<std::int32_t> children_;
};

LexicalAlignment align_lexical(const SourceIndex& index, const TokenizedText& summary,
                               const AlignConfig& cfg = {});
LexicalAlignment align_lexical(const TokenizedText& source, const TokenizedText& summary,
                               const AlignConfig& cfg = {});

/// Fraction of the summary's content tokens covered by some match span.
/// Throws NoContentTokens when the summary has none.
double coverage_fraction(const LexicalAlignment& alignment, const TokenizedText& summary);

}  // namespace sumalign
