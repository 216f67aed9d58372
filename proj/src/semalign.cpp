#include "sumalign/semalign.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sumalign/corpus.hpp"
#include "sumalign/digest.hpp"
#include "sumalign/error.hpp"

namespace sumalign {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double squared_norm(std::span<const float> v) {
  double s = 0.0;
  for (const float x : v) s += static_cast<double>(x) * x;
  return s;
}

double dot(std::span<const float> u, std::span<const float> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += static_cast<double>(u[i]) * v[i];
  return s;
}

// Shared by cosine() and similarity_matrix() so both report identical values.
double cosine_with_norms(std::span<const float> u, std::span<const float> v, double norm_u,
                         double norm_v) {
  return std::clamp(dot(u, v) / (norm_u * norm_v), -1.0, 1.0);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

ContextualEmbeddings::Vectors vectors_from_json(const nlohmann::json& arr, const std::string& what) {
  if (!arr.is_array()) throw Error("contextual field '" + what + "' is not an array");
  ContextualEmbeddings::Vectors out;
  out.reserve(arr.size());
  for (const auto& row : arr) {
    if (!row.is_array()) throw Error("contextual field '" + what + "' has a non-array vector");
    std::vector<float> v;
    v.reserve(row.size());
    for (const auto& x : row) {
      if (!x.is_number()) throw Error("contextual field '" + what + "' has a non-numeric entry");
      v.push_back(x.get<float>());
    }
    out.push_back(std::move(v));
  }
  return out;
}

void expect_count(const ContextualEmbeddings::Vectors& v, std::size_t tokens,
                  const std::string& what) {
  if (v.size() != tokens) {
    throw TokenCountMismatch(what + ": " + std::to_string(v.size()) + " vectors for " +
                             std::to_string(tokens) + " tokens");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Static embeddings

std::shared_ptr<const StaticEmbeddings> StaticEmbeddings::parse(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();

  auto out = std::make_shared<StaticEmbeddings>();
  out->sha256_ = sha256_hex(content);

  const std::string_view text(content);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) throw BadHeader("empty embedding file");
  const auto header = split_fields(trim(line));
  std::size_t vocab = 0;
  if (header.size() != 2 || !parse_number(header[0], vocab) ||
      !parse_number(header[1], out->dim_) || out->dim_ == 0) {
    throw BadHeader("expected '<vocab_size> <dim>' on line 1, got '" + std::string(line) + "'");
  }

  out->rows_.reserve(vocab);
  out->data_.reserve(vocab * out->dim_);
  while (next_line(line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != out->dim_ + 1) {
      throw DimensionMismatch("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(out->dim_) + " values, got " +
                              std::to_string(fields.size() - 1));
    }
    std::string norm = normalize(fields[0]);
    const std::size_t row = out->rows_.size();
    if (!out->rows_.emplace(norm, row).second) {
      throw DuplicateToken("line " + std::to_string(line_no) + ": duplicate token '" + norm + "'");
    }
    for (std::size_t i = 1; i < fields.size(); ++i) {
      float x = 0.0f;
      if (!parse_number(fields[i], x)) {
        throw BadHeader("line " + std::to_string(line_no) + ": bad number '" +
                        std::string(fields[i]) + "'");
      }
      out->data_.push_back(x);
    }
  }
  if (out->rows_.size() != vocab) {
    throw BadHeader("header declares " + std::to_string(vocab) + " rows, file has " +
                    std::to_string(out->rows_.size()));
  }
  return out;
}

std::shared_ptr<const StaticEmbeddings> StaticEmbeddings::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embeddings " + path.string());
  return parse(in);
}

std::optional<std::span<const float>> StaticEmbeddings::lookup(std::string_view norm) const {
  const auto it = rows_.find(std::string(norm));
  if (it == rows_.end()) return std::nullopt;
  return std::span<const float>(data_.data() + it->second * dim_, dim_);
}

std::optional<std::span<const float>> StaticEmbeddings::lookup(const FieldId&, std::size_t,
                                                               std::string_view norm) const {
  return lookup(norm);
}

nlohmann::json StaticEmbeddings::descriptor() const {
  return {{"kind", "static"}, {"dim", dim_}, {"vocab", rows_.size()}, {"sha256", sha256_}};
}

std::shared_ptr<const StaticEmbeddings> load_static_embeddings(const std::filesystem::path& path) {
  return StaticEmbeddings::load(path);
}

// ---------------------------------------------------------------------------
// Contextual embeddings

ContextualEmbeddings::ContextualEmbeddings(Vectors document, Vectors reference,
                                           std::vector<Vectors> generated)
    : document_(std::move(document)),
      reference_(std::move(reference)),
      generated_(std::move(generated)) {
  bool have_dim = false;
  auto check = [&](const Vectors& vs, const std::string& what) {
    for (const auto& v : vs) {
      if (!have_dim) {
        dim_ = v.size();
        have_dim = true;
      } else if (v.size() != dim_) {
        throw DimensionMismatch(what + ": vector of length " + std::to_string(v.size()) +
                                ", expected " + std::to_string(dim_));
      }
    }
  };
  check(document_, "document");
  check(reference_, "reference");
  for (std::size_t k = 0; k < generated_.size(); ++k) {
    check(generated_[k], "generated[" + std::to_string(k) + "]");
  }
}

std::shared_ptr<const ContextualEmbeddings> ContextualEmbeddings::from_json(
    const nlohmann::json& obj, const ExampleRecord& example) {
  if (!obj.is_object() || !obj.contains("fields") || !obj["fields"].is_object()) {
    throw Error("contextual record for '" + example.id + "' lacks a 'fields' object");
  }
  const auto& fields = obj["fields"];
  const nlohmann::json empty = nlohmann::json::array();
  auto get = [&](const char* key) -> const nlohmann::json& {
    return fields.contains(key) ? fields[key] : empty;
  };

  Vectors document = vectors_from_json(get("document"), "document");
  expect_count(document, example.document.size(), "document");
  Vectors reference = vectors_from_json(get("reference"), "reference");
  expect_count(reference, example.reference.size(), "reference");

  const auto& gen = get("generated");
  if (!gen.is_array()) throw Error("contextual field 'generated' is not an array");
  if (gen.size() != example.generated.size()) {
    throw TokenCountMismatch("generated: " + std::to_string(gen.size()) + " summaries for " +
                             std::to_string(example.generated.size()));
  }
  std::vector<Vectors> generated;
  for (std::size_t k = 0; k < gen.size(); ++k) {
    const std::string what = "generated[" + std::to_string(k) + "]";
    generated.push_back(vectors_from_json(gen[k], what));
    expect_count(generated.back(), example.generated[k].text.size(), what);
  }
  return std::make_shared<ContextualEmbeddings>(std::move(document), std::move(reference),
                                                std::move(generated));
}

const ContextualEmbeddings::Vectors* ContextualEmbeddings::field_vectors(const FieldId& f) const {
  switch (f.kind) {
    case FieldKind::Document:
      return &document_;
    case FieldKind::Reference:
      return &reference_;
    case FieldKind::Generated:
      return f.index < generated_.size() ? &generated_[f.index] : nullptr;
  }
  return nullptr;
}

std::optional<std::span<const float>> ContextualEmbeddings::lookup(const FieldId& field,
                                                                   std::size_t token_index,
                                                                   std::string_view) const {
  const Vectors* vs = field_vectors(field);
  if (vs == nullptr || token_index >= vs->size()) return std::nullopt;
  return std::span<const float>((*vs)[token_index]);
}

std::shared_ptr<const ContextualEmbeddingFile> ContextualEmbeddingFile::open(
    const std::filesystem::path& path) {
  const std::string content = read_file(path);
  auto out = std::make_shared<ContextualEmbeddingFile>();
  out->path_ = path;
  out->sha256_ = sha256_hex(content);

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string::npos) eol = content.size();
    const std::string_view line = trim(std::string_view(content).substr(pos, eol - pos));
    const std::size_t start = pos;
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string()) {
      throw SchemaError(line_no, "id", "missing or not a string");
    }
    const std::string id = obj["id"].get<std::string>();
    if (!out->offsets_.emplace(id, static_cast<std::streamoff>(start)).second) {
      throw DuplicateId("contextual file repeats id '" + id + "'");
    }
  }
  return out;
}

std::shared_ptr<const ContextualEmbeddings> ContextualEmbeddingFile::provider_for(
    const ExampleRecord& example) const {
  const auto it = offsets_.find(example.id);
  if (it == offsets_.end()) {
    throw MissingExample("no contextual vectors for example '" + example.id + "'");
  }
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw IoError("cannot reopen " + path_.string());
  in.seekg(it->second);
  std::string line;
  std::getline(in, line);
  return ContextualEmbeddings::from_json(nlohmann::json::parse(line), example);
}

nlohmann::json ContextualEmbeddingFile::descriptor() const {
  return {{"kind", "contextual"}, {"sha256", sha256_}};
}

std::shared_ptr<const ContextualEmbeddings> load_contextual_embeddings(
    const std::filesystem::path& path, const ExampleRecord& example) {
  return ContextualEmbeddingFile::open(path)->provider_for(example);
}

// ---------------------------------------------------------------------------
// Similarity

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw DimensionMismatch("cosine: dimensions " + std::to_string(u.size()) + " and " +
                            std::to_string(v.size()));
  }
  const double nu = std::sqrt(squared_norm(u));
  const double nv = std::sqrt(squared_norm(v));
  if (nu == 0.0 || nv == 0.0) throw ZeroVector("cosine of a zero vector is undefined");
  return cosine_with_norms(u, v, nu, nv);
}

SimilarityMatrix::SimilarityMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows),
      cols_(cols),
      scores_(rows * cols, std::numeric_limits<double>::quiet_NaN()),
      row_mask_(rows, false),
      col_mask_(cols, false) {}

SimilarityMatrix SimilarityMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  SimilarityMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw std::invalid_argument("from_rows: ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m.set(r, c, rows[r][c]);
  }
  return m;
}

namespace {

struct Embedded {
  std::span<const float> vec;
  double norm = 0.0;
  bool masked = true;
};

std::vector<Embedded> embed(const TokenizedText& text, const EmbeddingProvider& provider) {
  std::vector<Embedded> out(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const Token& tok = text.tokens[i];
    if (tok.is_punct) continue;
    const auto v = provider.lookup(text.field, i, tok.norm);
    if (!v) continue;
    if (v->size() != provider.dim()) {
      throw DimensionMismatch(to_string(text.field) + " token " + std::to_string(i) +
                              ": vector of length " + std::to_string(v->size()) + ", expected " +
                              std::to_string(provider.dim()));
    }
    const double n = std::sqrt(squared_norm(*v));
    if (n == 0.0) continue;
    out[i] = Embedded{*v, n, false};
  }
  return out;
}

}  // namespace

SimilarityMatrix similarity_matrix(const TokenizedText& source, const TokenizedText& summary,
                                   const EmbeddingProvider& provider) {
  const auto rows = embed(summary, provider);
  const auto cols = embed(source, provider);
  SimilarityMatrix m(rows.size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c].masked) m.mask_col(c);
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].masked) {
      m.mask_row(r);
      continue;
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (cols[c].masked) continue;
      m.set(r, c, cosine_with_norms(rows[r].vec, cols[c].vec, rows[r].norm, cols[c].norm));
    }
  }
  return m;
}

std::vector<std::vector<ScoredIndex>> best_matches(const SimilarityMatrix& matrix, std::size_t k) {
  if (k == 0) throw std::invalid_argument("best_matches: k must be >= 1");
  std::vector<std::vector<ScoredIndex>> out(matrix.rows());
  std::vector<ScoredIndex> row;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    if (matrix.row_masked(r)) continue;
    row.clear();
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      if (!matrix.col_masked(c)) row.push_back({c, matrix.at(r, c)});
    }
    const std::size_t take = std::min(k, row.size());
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(take), row.end(),
                      [](const ScoredIndex& a, const ScoredIndex& b) {
                        return a.score != b.score ? a.score > b.score : a.index < b.index;
                      });
    out[r].assign(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

std::vector<std::optional<double>> row_maxima(const SimilarityMatrix& matrix) {
  std::vector<std::optional<double>> out(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    if (matrix.row_masked(r)) continue;
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      if (matrix.col_masked(c)) continue;
      const double s = matrix.at(r, c);
      if (!out[r] || s > *out[r]) out[r] = s;
    }
  }
  return out;
}

std::vector<std::optional<double>> column_maxima(const SimilarityMatrix& matrix) {
  std::vector<std::optional<double>> out(matrix.cols());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    if (matrix.row_masked(r)) continue;
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      if (matrix.col_masked(c)) continue;
      const double s = matrix.at(r, c);
      if (!out[c] || s > *out[c]) out[c] = s;
    }
  }
  return out;
}

double harmonic_f1(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

namespace {

std::optional<double> mean_of_present(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (!v) continue;
    sum += *v;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

BertScore bertscore(const SimilarityMatrix& matrix) {
  const auto precision = mean_of_present(row_maxima(matrix));
  const auto recall = mean_of_present(column_maxima(matrix));
  if (!precision || !recall) {
    throw EmptyComparison("no unmasked summary/source token pair to compare");
  }
  return {*precision, *recall, harmonic_f1(*precision, *recall)};
}

SemanticAlignment align_semantic(const SimilarityMatrix& matrix, std::size_t k) {
  SemanticAlignment out;
  auto ranked = best_matches(matrix, k);
  const auto best = row_maxima(matrix);
  out.tokens.resize(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out.tokens[r].ranked = std::move(ranked[r]);
    out.tokens[r].best_score = best[r];
  }
  try {
    out.aggregate = bertscore(matrix);
  } catch (const EmptyComparison&) {
  }
  return out;
}

}  // namespace sumalign
