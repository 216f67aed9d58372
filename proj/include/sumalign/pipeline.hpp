#pragma once

// Full precomputation of every annotation the viewer needs, per example and
// per analysis pair, plus the configuration fingerprint that keys a cache.

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sumalign/corpus.hpp"
#include "sumalign/error.hpp"
#include "sumalign/lexalign.hpp"
#include "sumalign/metrics.hpp"
#include "sumalign/semalign.hpp"

namespace sumalign {

struct PipelineConfig {
  AlignConfig align;
  Thresholds taxonomy;
  std::size_t top_k = 10;  // ranked semantic matches kept per summary token
  std::size_t novel_n = 1;
  bool novel_content_only = true;
  StopList stoplist = StopList::english();

  // Execution knobs; they do not change the output and are not fingerprinted.
  std::size_t jobs = 1;
  bool fail_fast = false;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Reads a JSON config file. Recognized keys: align.min_n,
/// align.drop_stopword_only, taxonomy.tau_lex, taxonomy.tau_sem,
/// semantic.top_k, novel.n, novel.content_only, stopwords (path, relative
/// to the config file). Missing keys keep their defaults.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig pipeline_config_from_json(const nlohmann::json& obj,
                                         const std::filesystem::path& base_dir = {});

/// Where per-example embedding providers come from.
class EmbeddingSource {
 public:
  virtual ~EmbeddingSource() = default;
  virtual nlohmann::json descriptor() const = 0;
  virtual std::shared_ptr<const EmbeddingProvider> provider_for(
      const ExampleRecord& example) const = 0;
};

std::unique_ptr<EmbeddingSource> static_source(std::shared_ptr<const StaticEmbeddings> emb);
std::unique_ptr<EmbeddingSource> contextual_source(
    std::shared_ptr<const ContextualEmbeddingFile> file);

/// The configuration block stored in a cache header.
nlohmann::json config_json(const PipelineConfig& cfg, const nlohmann::json& provider_descriptor);
/// SHA-256 of the canonical serialization of a config block.
std::string fingerprint(const nlohmann::json& config);

struct PairAnnotation {
  PairRef pair;
  LexicalAlignment lexical;
  SemanticAlignment semantic;
  std::optional<RougeScore> rouge1;  // empty when a text is too short
  std::optional<RougeScore> rouge2;
  std::optional<Quadrant> quadrant;  // empty when either axis is undefined
  NovelContentReport novel;

  friend bool operator==(const PairAnnotation&, const PairAnnotation&) = default;
};

struct CachedExample {
  ExampleRecord record;
  std::vector<PairAnnotation> pairs;  // in enumerate_pairs order

  const PairAnnotation* find(const PairRef& pair) const;

  friend bool operator==(const CachedExample&, const CachedExample&) = default;
};

PairAnnotation annotate_pair(const ExampleRecord& example, const PairRef& pair,
                             const SourceIndex& source_index, const EmbeddingProvider& provider,
                             const PipelineConfig& cfg);
CachedExample annotate_example(const ExampleRecord& example, const EmbeddingProvider& provider,
                               const PipelineConfig& cfg);

struct ExampleFailure {
  std::size_t index = 0;
  std::string id;
  std::string message;
};

struct BuildReport {
  std::string fingerprint;
  std::size_t written = 0;
  std::vector<ExampleFailure> failures;  // in input order
};

/// Raised by build_cache under fail_fast; names the first failing example.
class BuildAborted : public Error {
 public:
  explicit BuildAborted(ExampleFailure failure)
      : Error("example '" + failure.id + "': " + failure.message), failure_(std::move(failure)) {}
  const ExampleFailure& failure() const noexcept { return failure_; }

 private:
  ExampleFailure failure_;
};

struct BuildResult {
  nlohmann::json config;
  std::vector<CachedExample> examples;
  BuildReport report;
};

/// Annotates every example (in parallel when cfg.jobs > 1). Failing
/// examples are skipped and reported unless cfg.fail_fast.
BuildResult annotate_corpus(const std::vector<ExampleRecord>& corpus, const EmbeddingSource& source,
                            const PipelineConfig& cfg);

/// annotate_corpus + write_cache to `out` (written via a temporary file and
/// renamed into place).
BuildReport build_cache(const std::vector<ExampleRecord>& corpus, const EmbeddingSource& source,
                        const PipelineConfig& cfg, const std::filesystem::path& out);

}  // namespace sumalign
