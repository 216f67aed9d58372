#include "sumalign/metrics.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "sumalign/error.hpp"
#include "sumalign/lexalign.hpp"
#include "sumalign/semalign.hpp"

namespace sumalign {

namespace {

using IdGram = std::vector<std::size_t>;

std::map<IdGram, std::size_t> count_ngrams(const TokenizedText& text, std::size_t n,
                                           std::unordered_map<std::string, std::size_t>& vocab) {
  std::vector<std::size_t> ids;
  ids.reserve(text.size());
  for (const auto& tok : text.tokens) {
    ids.push_back(vocab.try_emplace(tok.norm, vocab.size()).first->second);
  }
  std::map<IdGram, std::size_t> counts;
  for (std::size_t i = 0; i + n <= ids.size(); ++i) {
    ++counts[IdGram(ids.begin() + static_cast<std::ptrdiff_t>(i),
                    ids.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

RougeScore rouge_n(const TokenizedText& reference, const TokenizedText& generated, std::size_t n) {
  if (n == 0) throw std::invalid_argument("rouge_n: n must be >= 1");
  if (reference.size() < n || generated.size() < n) {
    throw TooShort("rouge-" + std::to_string(n) + " needs at least " + std::to_string(n) +
                   " tokens per text (reference " + std::to_string(reference.size()) +
                   ", generated " + std::to_string(generated.size()) + ")");
  }
  std::unordered_map<std::string, std::size_t> vocab;
  const auto ref_counts = count_ngrams(reference, n, vocab);
  const auto gen_counts = count_ngrams(generated, n, vocab);

  std::size_t overlap = 0;
  for (const auto& [gram, count] : gen_counts) {
    const auto it = ref_counts.find(gram);
    if (it != ref_counts.end()) overlap += std::min(count, it->second);
  }
  RougeScore out;
  out.n = n;
  out.precision = static_cast<double>(overlap) / static_cast<double>(generated.size() - n + 1);
  out.recall = static_cast<double>(overlap) / static_cast<double>(reference.size() - n + 1);
  out.f1 = harmonic_f1(out.precision, out.recall);
  return out;
}

std::string_view to_string(Quadrant q) {
  switch (q) {
    case Quadrant::Extraction:
      return "extraction";
    case Quadrant::Abstraction:
      return "abstraction";
    case Quadrant::Hallucination:
      return "hallucination";
    case Quadrant::Misinterpretation:
      return "misinterpretation";
  }
  return "unknown";
}

std::optional<Quadrant> parse_quadrant(std::string_view name) {
  for (const Quadrant q : {Quadrant::Extraction, Quadrant::Abstraction, Quadrant::Hallucination,
                           Quadrant::Misinterpretation}) {
    if (to_string(q) == name) return q;
  }
  return std::nullopt;
}

Quadrant classify_quadrant(double lexical_score, double semantic_score,
                           const Thresholds& thresholds) {
  const bool high_lex = lexical_score >= thresholds.tau_lex;
  const bool high_sem = semantic_score >= thresholds.tau_sem;
  if (high_lex) return high_sem ? Quadrant::Extraction : Quadrant::Misinterpretation;
  return high_sem ? Quadrant::Abstraction : Quadrant::Hallucination;
}

NovelContentReport novel_ngrams(const TokenizedText& source, const TokenizedText& summary,
                                std::size_t n, bool content_only) {
  if (n == 0) throw std::invalid_argument("novel_ngrams: n must be >= 1");
  NovelContentReport report;
  report.n = n;
  report.content_only = content_only;
  if (summary.size() < n) return report;

  const NGramIndex source_index = build_ngram_index(source, n);
  std::map<NGramKey, std::size_t> slot;  // n-gram -> position in report
  for (std::size_t i = 0; i + n <= summary.size(); ++i) {
    const Span span{i, i + n};
    if (content_only) {
      bool has_content = false;
      for (std::size_t t = i; t < i + n && !has_content; ++t) {
        has_content = summary.tokens[t].is_content();
      }
      if (!has_content) continue;
    }
    NGramKey key = span_norms(summary, span);
    if (source_index.find(key) != nullptr) continue;
    const auto [it, inserted] = slot.try_emplace(key, report.ngrams.size());
    if (inserted) report.ngrams.push_back(NovelNgram{std::move(key), {}});
    report.ngrams[it->second].spans.push_back(span);
  }
  return report;
}

}  // namespace sumalign
