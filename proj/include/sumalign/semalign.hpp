#pragma once

// Embedding providers, cosine similarity matrices, ranked per-token matches
// and BERTScore-style greedy aggregation.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "sumalign/text.hpp"

namespace sumalign {

struct ExampleRecord;

enum class EmbeddingKind { Static, Contextual };

/// Token -> vector lookup. Static providers answer by normalized form;
/// contextual providers answer by (field, token position).
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual EmbeddingKind kind() const noexcept = 0;
  virtual std::size_t dim() const noexcept = 0;
  /// Empty when the token has no vector.
  virtual std::optional<std::span<const float>> lookup(const FieldId& field,
                                                       std::size_t token_index,
                                                       std::string_view norm) const = 0;
};

class StaticEmbeddings final : public EmbeddingProvider {
 public:
  /// "<vocab_size> <dim>" header, then "token f1 ... f_dim" per line.
  /// Tokens are normalized on load.
  static std::shared_ptr<const StaticEmbeddings> parse(std::istream& in);
  static std::shared_ptr<const StaticEmbeddings> load(const std::filesystem::path& path);

  EmbeddingKind kind() const noexcept override { return EmbeddingKind::Static; }
  std::size_t dim() const noexcept override { return dim_; }
  std::optional<std::span<const float>> lookup(const FieldId& field, std::size_t token_index,
                                               std::string_view norm) const override;
  std::optional<std::span<const float>> lookup(std::string_view norm) const;

  std::size_t vocab_size() const noexcept { return rows_.size(); }
  /// {"kind":"static","dim":..,"vocab":..,"sha256":..}
  nlohmann::json descriptor() const;

 private:
  std::size_t dim_ = 0;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> rows_;
  std::string sha256_;
};

std::shared_ptr<const StaticEmbeddings> load_static_embeddings(const std::filesystem::path& path);

/// Positional vectors for a single example, word-aligned with this
/// library's tokenizer output.
class ContextualEmbeddings final : public EmbeddingProvider {
 public:
  using Vectors = std::vector<std::vector<float>>;

  ContextualEmbeddings(Vectors document, Vectors reference, std::vector<Vectors> generated);

  /// Parses one contextual JSON object and checks it against `example`.
  /// Throws TokenCountMismatch or DimensionMismatch.
  static std::shared_ptr<const ContextualEmbeddings> from_json(const nlohmann::json& obj,
                                                               const ExampleRecord& example);

  EmbeddingKind kind() const noexcept override { return EmbeddingKind::Contextual; }
  std::size_t dim() const noexcept override { return dim_; }
  std::optional<std::span<const float>> lookup(const FieldId& field, std::size_t token_index,
                                               std::string_view norm) const override;

 private:
  const Vectors* field_vectors(const FieldId& field) const;

  std::size_t dim_ = 0;
  Vectors document_;
  Vectors reference_;
  std::vector<Vectors> generated_;
};

/// A contextual embedding file indexed by example id. Lines are parsed on
/// demand, so the file must stay in place while this object lives.
class ContextualEmbeddingFile {
 public:
  static std::shared_ptr<const ContextualEmbeddingFile> open(const std::filesystem::path& path);

  bool contains(const std::string& id) const { return offsets_.count(id) != 0; }
  std::size_t size() const noexcept { return offsets_.size(); }
  /// Throws MissingExample, TokenCountMismatch, DimensionMismatch.
  std::shared_ptr<const ContextualEmbeddings> provider_for(const ExampleRecord& example) const;
  /// {"kind":"contextual","sha256":..}
  nlohmann::json descriptor() const;

 private:
  std::filesystem::path path_;
  std::map<std::string, std::streamoff> offsets_;
  std::string sha256_;
};

std::shared_ptr<const ContextualEmbeddings> load_contextual_embeddings(
    const std::filesystem::path& path, const ExampleRecord& example);

/// u.v / (|u||v|) clamped to [-1, 1]. Throws ZeroVector or DimensionMismatch.
double cosine(std::span<const float> u, std::span<const float> v);

/// Rows are summary tokens, columns source tokens. Masked entries hold NaN
/// and must not be read.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t rows, std::size_t cols);
  /// Row-major scores with no masking; for fixtures and tests.
  static SimilarityMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double at(std::size_t r, std::size_t c) const { return scores_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, double v) { scores_[r * cols_ + c] = v; }
  bool row_masked(std::size_t r) const { return row_mask_[r]; }
  bool col_masked(std::size_t c) const { return col_mask_[c]; }
  void mask_row(std::size_t r) { row_mask_[r] = true; }
  void mask_col(std::size_t c) { col_mask_[c] = true; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> scores_;
  std::vector<bool> row_mask_;
  std::vector<bool> col_mask_;
};

/// Scores every unmasked (summary, source) pair. Punctuation tokens and
/// tokens without a (nonzero) vector are masked.
SimilarityMatrix similarity_matrix(const TokenizedText& source, const TokenizedText& summary,
                                   const EmbeddingProvider& provider);

struct ScoredIndex {
  std::size_t index = 0;
  double score = 0.0;

  friend bool operator==(const ScoredIndex&, const ScoredIndex&) = default;
};

/// Per row: the k best unmasked columns, score-descending, ties broken by
/// ascending column. Masked rows get an empty list.
std::vector<std::vector<ScoredIndex>> best_matches(const SimilarityMatrix& matrix, std::size_t k);

/// Max over unmasked columns for each unmasked row.
std::vector<std::optional<double>> row_maxima(const SimilarityMatrix& matrix);
/// Max over unmasked rows for each unmasked column.
std::vector<std::optional<double>> column_maxima(const SimilarityMatrix& matrix);

struct BertScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  friend bool operator==(const BertScore&, const BertScore&) = default;
};

/// Harmonic mean, 0 when p + r <= 0.
double harmonic_f1(double precision, double recall);

/// Greedy max-then-average, no idf weighting. Throws EmptyComparison.
BertScore bertscore(const SimilarityMatrix& matrix);

struct TokenMatches {
  std::vector<ScoredIndex> ranked;
  std::optional<double> best_score;

  friend bool operator==(const TokenMatches&, const TokenMatches&) = default;
};

struct SemanticAlignment {
  std::vector<TokenMatches> tokens;   // one entry per summary token
  std::optional<BertScore> aggregate;  // empty if nothing comparable

  friend bool operator==(const SemanticAlignment&, const SemanticAlignment&) = default;
};

SemanticAlignment align_semantic(const SimilarityMatrix& matrix, std::size_t k);

}  // namespace sumalign
