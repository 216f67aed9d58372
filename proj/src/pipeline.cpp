#include "sumalign/pipeline.hpp"

#include <atomic>
#include <fstream>
#include <thread>

#include "sumalign/cache.hpp"
#include "sumalign/digest.hpp"

namespace sumalign {

void PipelineConfig::validate() const {
  if (align.min_n < 1) throw ConfigError("align.min_n must be >= 1");
  if (!(taxonomy.tau_lex >= 0.0 && taxonomy.tau_lex <= 1.0)) {
    throw ConfigError("taxonomy.tau_lex must lie in [0, 1]");
  }
  if (!(taxonomy.tau_sem >= -1.0 && taxonomy.tau_sem <= 1.0)) {
    throw ConfigError("taxonomy.tau_sem must lie in [-1, 1]");
  }
  if (top_k < 1) throw ConfigError("semantic.top_k must be >= 1");
  if (novel_n < 1) throw ConfigError("novel.n must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

namespace {

const nlohmann::json* section(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key)) return nullptr;
  if (!obj[key].is_object()) throw ConfigError(std::string(key) + " must be an object");
  return &obj[key];
}

template <typename T>
void read_key(const nlohmann::json* sec, const char* sec_name, const char* key, T& out) {
  if (sec == nullptr || !sec->contains(key)) return;
  try {
    out = (*sec)[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(sec_name) + "." + key + " has the wrong type");
  }
}

void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) throw ConfigError("unknown config key '" + where + k + "'");
  }
}

}  // namespace

PipelineConfig pipeline_config_from_json(const nlohmann::json& obj,
                                         const std::filesystem::path& base_dir) {
  if (!obj.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(obj, {"align", "taxonomy", "semantic", "novel", "stopwords"}, "");
  PipelineConfig cfg;
  if (const auto* s = section(obj, "align")) {
    reject_unknown(*s, {"min_n", "drop_stopword_only"}, "align.");
    read_key(s, "align", "min_n", cfg.align.min_n);
    read_key(s, "align", "drop_stopword_only", cfg.align.drop_stopword_only);
  }
  if (const auto* s = section(obj, "taxonomy")) {
    reject_unknown(*s, {"tau_lex", "tau_sem"}, "taxonomy.");
    read_key(s, "taxonomy", "tau_lex", cfg.taxonomy.tau_lex);
    read_key(s, "taxonomy", "tau_sem", cfg.taxonomy.tau_sem);
  }
  if (const auto* s = section(obj, "semantic")) {
    reject_unknown(*s, {"top_k"}, "semantic.");
    read_key(s, "semantic", "top_k", cfg.top_k);
  }
  if (const auto* s = section(obj, "novel")) {
    reject_unknown(*s, {"n", "content_only"}, "novel.");
    read_key(s, "novel", "n", cfg.novel_n);
    read_key(s, "novel", "content_only", cfg.novel_content_only);
  }
  if (obj.contains("stopwords")) {
    if (!obj["stopwords"].is_string()) throw ConfigError("stopwords must be a path string");
    std::filesystem::path p = obj["stopwords"].get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    cfg.stoplist = StopList::from_file(p);
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return pipeline_config_from_json(obj, path.parent_path());
}

namespace {

class StaticSource final : public EmbeddingSource {
 public:
  explicit StaticSource(std::shared_ptr<const StaticEmbeddings> emb) : emb_(std::move(emb)) {}
  nlohmann::json descriptor() const override { return emb_->descriptor(); }
  std::shared_ptr<const EmbeddingProvider> provider_for(const ExampleRecord&) const override {
    return emb_;
  }

 private:
  std::shared_ptr<const StaticEmbeddings> emb_;
};

class ContextualSource final : public EmbeddingSource {
 public:
  explicit ContextualSource(std::shared_ptr<const ContextualEmbeddingFile> file)
      : file_(std::move(file)) {}
  nlohmann::json descriptor() const override { return file_->descriptor(); }
  std::shared_ptr<const EmbeddingProvider> provider_for(const ExampleRecord& ex) const override {
    return file_->provider_for(ex);
  }

 private:
  std::shared_ptr<const ContextualEmbeddingFile> file_;
};

}  // namespace

std::unique_ptr<EmbeddingSource> static_source(std::shared_ptr<const StaticEmbeddings> emb) {
  return std::make_unique<StaticSource>(std::move(emb));
}

std::unique_ptr<EmbeddingSource> contextual_source(
    std::shared_ptr<const ContextualEmbeddingFile> file) {
  return std::make_unique<ContextualSource>(std::move(file));
}

nlohmann::json config_json(const PipelineConfig& cfg, const nlohmann::json& provider_descriptor) {
  return {
      {"tokenizer", normalizer_version()},
      {"stoplist", {{"name", cfg.stoplist.name()}, {"sha256", cfg.stoplist.digest()}}},
      {"align", {{"min_n", cfg.align.min_n}, {"drop_stopword_only", cfg.align.drop_stopword_only}}},
      {"semantic", {{"provider", provider_descriptor}, {"top_k", cfg.top_k}, {"idf", false}}},
      {"taxonomy", {{"tau_lex", cfg.taxonomy.tau_lex}, {"tau_sem", cfg.taxonomy.tau_sem}}},
      {"novel", {{"n", cfg.novel_n}, {"content_only", cfg.novel_content_only}}},
  };
}

std::string fingerprint(const nlohmann::json& config) { return sha256_hex(config.dump()); }

const PairAnnotation* CachedExample::find(const PairRef& pair) const {
  for (const auto& p : pairs) {
    if (p.pair.type != pair.type) continue;
    if (pair.type == PairType::DocReference || p.pair.gen == pair.gen) return &p;
  }
  return nullptr;
}

namespace {

std::optional<RougeScore> try_rouge(const TokenizedText& ref, const TokenizedText& gen,
                                    std::size_t n) {
  try {
    return rouge_n(ref, gen, n);
  } catch (const TooShort&) {
    return std::nullopt;
  }
}

}  // namespace

PairAnnotation annotate_pair(const ExampleRecord& example, const PairRef& pair,
                             const SourceIndex& source_index, const EmbeddingProvider& provider,
                             const PipelineConfig& cfg) {
  const auto [source, summary] = pair_texts(example, pair);
  PairAnnotation out;
  out.pair = pair;
  out.lexical = align_lexical(source_index, summary, cfg.align);
  out.semantic = align_semantic(similarity_matrix(source, summary, provider), cfg.top_k);
  out.rouge1 = try_rouge(source, summary, 1);
  out.rouge2 = try_rouge(source, summary, 2);
  if (out.lexical.coverage && out.semantic.aggregate) {
    out.quadrant =
        classify_quadrant(*out.lexical.coverage, out.semantic.aggregate->f1, cfg.taxonomy);
  }
  out.novel = novel_ngrams(source, summary, cfg.novel_n, cfg.novel_content_only);
  return out;
}

CachedExample annotate_example(const ExampleRecord& example, const EmbeddingProvider& provider,
                               const PipelineConfig& cfg) {
  CachedExample out;
  out.record = example;
  const SourceIndex doc_index(example.document);
  std::optional<SourceIndex> ref_index;
  if (example.has_reference()) ref_index.emplace(example.reference);
  for (const PairRef& pair : enumerate_pairs(example)) {
    const SourceIndex& idx = pair.type == PairType::ReferenceGenerated ? *ref_index : doc_index;
    out.pairs.push_back(annotate_pair(example, pair, idx, provider, cfg));
  }
  return out;
}

BuildResult annotate_corpus(const std::vector<ExampleRecord>& corpus, const EmbeddingSource& source,
                            const PipelineConfig& cfg) {
  cfg.validate();
  BuildResult result;
  result.config = config_json(cfg, source.descriptor());
  result.report.fingerprint = fingerprint(result.config);

  const std::size_t n = corpus.size();
  std::vector<std::optional<CachedExample>> done(n);
  std::vector<std::optional<std::string>> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        const auto provider = source.provider_for(corpus[i]);
        done[i] = annotate_example(corpus[i], *provider, cfg);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        if (cfg.fail_fast) stop.store(true);
      }
    }
  };

  const std::size_t jobs = std::min(cfg.jobs, std::max<std::size_t>(n, 1));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  // Every index below a claimed one was claimed too and has finished, so
  // the first recorded error is the first in input order.
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) {
      ExampleFailure f{i, corpus[i].id, *errors[i]};
      if (cfg.fail_fast) throw BuildAborted(std::move(f));
      result.report.failures.push_back(std::move(f));
    } else if (done[i]) {
      result.examples.push_back(std::move(*done[i]));
    }
  }
  result.report.written = result.examples.size();
  return result;
}

BuildReport build_cache(const std::vector<ExampleRecord>& corpus, const EmbeddingSource& source,
                        const PipelineConfig& cfg, const std::filesystem::path& out) {
  BuildResult result = annotate_corpus(corpus, source, cfg);
  std::filesystem::path tmp = out;
  tmp += ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot write " + tmp.string());
    write_cache(file, result.config, result.examples);
    file.flush();
    if (!file) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, out);
  return std::move(result.report);
}

}  // namespace sumalign
