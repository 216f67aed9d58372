#pragma once

// ROUGE-n, novel-content detection, and the lexical/semantic quadrant
// taxonomy.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sumalign/text.hpp"

namespace sumalign {

struct RougeScore {
  std::size_t n = 1;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  friend bool operator==(const RougeScore&, const RougeScore&) = default;
};

/// Multiset-clipped n-gram overlap over normalized tokens; no stemming and
/// no stopword removal. Throws TooShort if either text has fewer than n
/// tokens, std::invalid_argument if n == 0.
RougeScore rouge_n(const TokenizedText& reference, const TokenizedText& generated, std::size_t n);

enum class Quadrant { Extraction, Abstraction, Hallucination, Misinterpretation };

std::string_view to_string(Quadrant q);
std::optional<Quadrant> parse_quadrant(std::string_view name);

struct Thresholds {
  double tau_lex = 0.5;  // on lexical coverage, [0, 1]
  double tau_sem = 0.5;  // on BERTScore f1, [-1, 1]

  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

/// Scores at or above a threshold count as "high".
Quadrant classify_quadrant(double lexical_score, double semantic_score,
                           const Thresholds& thresholds = {});

struct NovelNgram {
  std::vector<std::string> ngram;  // normalized forms
  std::vector<Span> spans;         // summary occurrences, ascending

  friend bool operator==(const NovelNgram&, const NovelNgram&) = default;
};

struct NovelContentReport {
  std::size_t n = 1;
  bool content_only = true;
  std::vector<NovelNgram> ngrams;  // ordered by first occurrence

  friend bool operator==(const NovelContentReport&, const NovelContentReport&) = default;
};

/// Summary n-grams that never occur in the source. With content_only,
/// n-grams made solely of stopwords/punctuation are dropped.
NovelContentReport novel_ngrams(const TokenizedText& source, const TokenizedText& summary,
                                std::size_t n, bool content_only);

}  // namespace sumalign
