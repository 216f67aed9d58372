#include <doctest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "sumalign/cache.hpp"
#include "sumalign/error.hpp"
#include "sumalign/pipeline.hpp"

using namespace sumalign;
using testing::TempDir;

namespace {

constexpr std::size_t kVocab = 60;

struct Built {
  TempDir dir;
  std::vector<ExampleRecord> corpus;
  std::shared_ptr<const StaticEmbeddings> emb;
};

std::unique_ptr<Built> small_setup(std::uint64_t seed = 1, std::size_t examples = 6) {
  auto b = std::make_unique<Built>();
  b->corpus = testing::parse_corpus(testing::synthetic_corpus(seed, examples, 120, 3, 20, kVocab));
  b->emb = testing::parse_embeddings(testing::synthetic_embeddings(seed, kVocab, 16));
  return b;
}

// Contextual vectors for every token of every field; optionally skip an id.
std::string contextual_lines(const std::vector<ExampleRecord>& corpus, const std::string& skip) {
  std::mt19937_64 rng(5);
  std::normal_distribution<float> g(0.0f, 1.0f);
  auto vectors = [&](const TokenizedText& t) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::vector<float> v(8);
      for (auto& x : v) x = g(rng);
      arr.push_back(v);
    }
    return arr;
  };
  std::string out;
  for (const auto& ex : corpus) {
    if (ex.id == skip) continue;
    nlohmann::json gen = nlohmann::json::array();
    for (const auto& s : ex.generated) gen.push_back(vectors(s.text));
    nlohmann::json obj = {{"id", ex.id},
                          {"fields",
                           {{"document", vectors(ex.document)},
                            {"reference", vectors(ex.reference)},
                            {"generated", gen}}}};
    out += obj.dump() + "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("load_jsonl parses the documented record shape") {
  const auto corpus = testing::parse_corpus(
      R"({"document":"a b","reference":"a","generated":[{"model":"m1","text":"a b"}]})"
      "\n");
  REQUIRE(corpus.size() == 1);
  const auto& ex = corpus[0];
  CHECK(ex.id == "1");
  CHECK(ex.document.size() == 2);
  CHECK(ex.reference.size() == 1);
  REQUIRE(ex.generated.size() == 1);
  CHECK(ex.generated[0].model == "m1");
  CHECK(ex.generated[0].text.raw == "a b");
  CHECK(ex.generated[0].text.field == FieldId::generated(0));
}

TEST_CASE("load_jsonl accepts bare strings and skips blank lines") {
  const auto corpus = testing::parse_corpus(
      "\n"
      R"({"id":"x","document":"d","reference":"","generated":["one","two"]})"
      "\n\n");
  REQUIRE(corpus.size() == 1);
  CHECK(corpus[0].id == "x");
  CHECK(corpus[0].generated[1].model == "model_1");
  CHECK_FALSE(corpus[0].has_reference());
}

TEST_CASE("load_jsonl errors name the line") {
  CHECK(testing::parse_corpus("").empty());
  try {
    testing::parse_corpus("{\"document\":\"a\",\"reference\":\"b\"}\n{\"reference\":\"b\"}\n");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 2);
    CHECK(e.field() == "document");
  }
  try {
    testing::parse_corpus("{\"document\":\"a\",\"reference\":\"b\"}\n{not json\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(testing::parse_corpus(R"({"id":"q","document":"a","reference":""})"
                                        "\n"
                                        R"({"id":"q","document":"b","reference":""})"),
                  DuplicateId);
  CHECK_THROWS_AS(testing::parse_corpus(R"({"document":"a","reference":"","generated":[3]})"),
                  SchemaError);
  CHECK_THROWS_AS(load_jsonl("/nonexistent/corpus.jsonl"), IoError);
}

TEST_CASE("enumerate_pairs") {
  auto corpus = testing::parse_corpus(
      R"({"document":"d","reference":"r","generated":["a","b","c","d"]})"
      "\n"
      R"({"document":"d","reference":"r"})"
      "\n"
      R"({"document":"d","reference":"","generated":["a","b"]})");
  const auto four = enumerate_pairs(corpus[0]);
  REQUIRE(four.size() == 9);
  CHECK(four[0] == PairRef{PairType::DocReference, 0});
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(four[1 + k] == PairRef{PairType::DocGenerated, k});
    CHECK(four[5 + k] == PairRef{PairType::ReferenceGenerated, k});
  }
  CHECK(enumerate_pairs(corpus[1]) == std::vector<PairRef>{{PairType::DocReference, 0}});
  const auto noref = enumerate_pairs(corpus[2]);
  CHECK(noref == std::vector<PairRef>{{PairType::DocGenerated, 0}, {PairType::DocGenerated, 1}});

  const auto texts = pair_texts(corpus[0], {PairType::ReferenceGenerated, 2});
  CHECK(&texts.source == &corpus[0].reference);
  CHECK(&texts.summary == &corpus[0].generated[2].text);
  for (const char* name : {"doc_generated", "doc_reference", "reference_generated"}) {
    CHECK(to_string(*parse_pair_type(name)) == name);
  }
  CHECK_FALSE(parse_pair_type("doc").has_value());
}

TEST_CASE("annotate_pair fills every annotation") {
  auto corpus = testing::parse_corpus(
      R"({"document":"the quick brown fox jumps","reference":"a brown fox","generated":["quick fox leaps"]})");
  const auto emb = testing::parse_embeddings(
      "6 3\nquick 1 0 0\nbrown 0 1 0\nfox 0 0 1\njumps 1 1 0\nleaps 1 1 0.1\nthe 1 1 1\n");
  const auto ex = annotate_example(corpus[0], *emb, PipelineConfig{});
  REQUIRE(ex.pairs.size() == 3);
  const auto* p = ex.find({PairType::DocGenerated, 0});
  REQUIRE(p != nullptr);
  CHECK(p->lexical.coverage == doctest::Approx(2.0 / 3));
  REQUIRE(p->semantic.aggregate.has_value());
  CHECK(p->semantic.tokens.size() == 3);
  REQUIRE(p->rouge1.has_value());
  CHECK(p->rouge1->precision == doctest::Approx(2.0 / 3));
  CHECK(p->rouge2.has_value());
  CHECK(p->quadrant.has_value());
  REQUIRE(p->novel.ngrams.size() == 1);
  CHECK(p->novel.ngrams[0].ngram == std::vector<std::string>{"leaps"});

  // Reference pair aligns against the reference, not the document.
  const auto* rg = ex.find({PairType::ReferenceGenerated, 0});
  REQUIRE(rg != nullptr);
  CHECK(rg->lexical.coverage == doctest::Approx(1.0 / 3));
  CHECK(ex.find({PairType::DocGenerated, 1}) == nullptr);
}

TEST_CASE("config json and fingerprint") {
  const auto b = small_setup();
  PipelineConfig cfg;
  const auto c1 = config_json(cfg, b->emb->descriptor());
  CHECK(c1["tokenizer"] == normalizer_version());
  CHECK(c1["semantic"]["idf"] == false);
  CHECK(c1["semantic"]["provider"]["kind"] == "static");
  CHECK(fingerprint(c1).size() == 64);
  CHECK(fingerprint(c1) == fingerprint(config_json(cfg, b->emb->descriptor())));
  cfg.jobs = 8;
  CHECK(fingerprint(c1) == fingerprint(config_json(cfg, b->emb->descriptor())));
  cfg.align.min_n = 2;
  CHECK(fingerprint(c1) != fingerprint(config_json(cfg, b->emb->descriptor())));
}

TEST_CASE("pipeline config file") {
  TempDir dir;
  testing::spit(dir / "stop.txt", "# tiny\nalpha\nbeta\n");
  testing::spit(dir / "cfg.json", R"({"align":{"min_n":2},"taxonomy":{"tau_sem":0.3},
      "semantic":{"top_k":4},"novel":{"n":2,"content_only":false},"stopwords":"stop.txt"})");
  const auto cfg = load_pipeline_config(dir / "cfg.json");
  CHECK(cfg.align.min_n == 2);
  CHECK(cfg.align.drop_stopword_only);
  CHECK(cfg.taxonomy.tau_lex == 0.5);
  CHECK(cfg.taxonomy.tau_sem == 0.3);
  CHECK(cfg.top_k == 4);
  CHECK(cfg.novel_n == 2);
  CHECK_FALSE(cfg.novel_content_only);
  CHECK(cfg.stoplist.contains("alpha"));
  CHECK_FALSE(cfg.stoplist.contains("the"));

  CHECK_THROWS_AS(pipeline_config_from_json({{"align", {{"min_m", 2}}}}), ConfigError);
  CHECK_THROWS_AS(pipeline_config_from_json({{"taxonomy", {{"tau_lex", 1.5}}}}), ConfigError);
  CHECK_THROWS_AS(pipeline_config_from_json({{"semantic", {{"top_k", 0}}}}), ConfigError);
  CHECK_THROWS_AS(pipeline_config_from_json({{"align", {{"min_n", "two"}}}}), ConfigError);
  testing::spit(dir / "bad.json", "{");
  CHECK_THROWS_AS(load_pipeline_config(dir / "bad.json"), ConfigError);
}

TEST_CASE("cache builds are byte-identical and independent of the job count") {
  const auto b = small_setup(3, 9);
  const auto src = static_source(b->emb);
  PipelineConfig cfg;
  const auto r1 = build_cache(b->corpus, *src, cfg, b->dir / "a.cache");
  const auto r2 = build_cache(b->corpus, *src, cfg, b->dir / "b.cache");
  cfg.jobs = 4;
  const auto r3 = build_cache(b->corpus, *src, cfg, b->dir / "c.cache");
  CHECK(r1.written == 9);
  CHECK(r1.failures.empty());
  CHECK(r1.fingerprint == r3.fingerprint);
  const auto a = testing::slurp(b->dir / "a.cache");
  CHECK(!a.empty());
  CHECK(a == testing::slurp(b->dir / "b.cache"));
  CHECK(a == testing::slurp(b->dir / "c.cache"));
  CHECK_FALSE(std::filesystem::exists(b->dir / "a.cache.tmp"));
}

TEST_CASE("cache round trip reproduces every annotation") {
  const auto b = small_setup(4, 5);
  const auto src = static_source(b->emb);
  PipelineConfig cfg;
  cfg.top_k = 3;
  const auto built = annotate_corpus(b->corpus, *src, cfg);
  build_cache(b->corpus, *src, cfg, b->dir / "x.cache");
  const Cache cache = read_cache(b->dir / "x.cache", built.report.fingerprint);
  CHECK(cache.header.version == kCacheVersion);
  CHECK(cache.header.fingerprint == built.report.fingerprint);
  CHECK(cache.header.config == built.config);
  CHECK(cache.header.examples == 5);
  REQUIRE(cache.examples.size() == built.examples.size());
  for (std::size_t i = 0; i < built.examples.size(); ++i) {
    CHECK(cache.examples[i] == built.examples[i]);
  }
}

TEST_CASE("cache reader rejects stale, truncated, and foreign files") {
  const auto b = small_setup(5, 4);
  const auto src = static_source(b->emb);
  PipelineConfig cfg;
  const auto report = build_cache(b->corpus, *src, cfg, b->dir / "x.cache");

  PipelineConfig other = cfg;
  other.align.min_n = 2;
  const auto expected = fingerprint(config_json(other, b->emb->descriptor()));
  CHECK_THROWS_AS(read_cache(b->dir / "x.cache", expected), FingerprintMismatch);
  CHECK_NOTHROW(read_cache(b->dir / "x.cache", report.fingerprint));

  const std::string text = testing::slurp(b->dir / "x.cache");
  const auto last_line = text.rfind('\n', text.size() - 2);
  testing::spit(b->dir / "trunc.cache", text.substr(0, last_line + 1));
  CHECK_THROWS_AS(read_cache(b->dir / "trunc.cache"), ParseError);
  testing::spit(b->dir / "cut.cache", text.substr(0, text.size() - 40));
  CHECK_THROWS_AS(read_cache(b->dir / "cut.cache"), ParseError);
  testing::spit(b->dir / "empty.cache", "");
  CHECK_THROWS_AS(read_cache(b->dir / "empty.cache"), ParseError);

  auto header_line = text.substr(0, text.find('\n'));
  auto header = nlohmann::json::parse(header_line);
  const std::string rest = text.substr(text.find('\n'));

  auto bumped = header;
  bumped["version"] = 2;
  testing::spit(b->dir / "v2.cache", bumped.dump() + rest);
  CHECK_THROWS_AS(read_cache(b->dir / "v2.cache"), VersionError);

  auto foreign = header;
  foreign["format"] = "something-else";
  testing::spit(b->dir / "f.cache", foreign.dump() + rest);
  CHECK_THROWS_AS(read_cache(b->dir / "f.cache"), VersionError);

  auto tampered = header;
  tampered["config"]["align"]["min_n"] = 3;
  testing::spit(b->dir / "t.cache", tampered.dump() + rest);
  CHECK_THROWS_AS(read_cache(b->dir / "t.cache"), FingerprintMismatch);
}

TEST_CASE("a missing contextual example is reported, the rest are cached") {
  auto b = small_setup(6, 10);
  const std::string missing = b->corpus[7].id;
  testing::spit(b->dir / "ctx.jsonl", contextual_lines(b->corpus, missing));
  const auto src = contextual_source(ContextualEmbeddingFile::open(b->dir / "ctx.jsonl"));

  PipelineConfig cfg;
  cfg.jobs = 3;
  const auto report = build_cache(b->corpus, *src, cfg, b->dir / "ctx.cache");
  CHECK(report.written == 9);
  REQUIRE(report.failures.size() == 1);
  CHECK(report.failures[0].index == 7);
  CHECK(report.failures[0].id == missing);
  CHECK(report.failures[0].message.find(missing) != std::string::npos);
  const auto cache = read_cache(b->dir / "ctx.cache");
  CHECK(cache.examples.size() == 9);
  for (const auto& ex : cache.examples) CHECK(ex.record.id != missing);
  CHECK(cache.header.config["semantic"]["provider"]["kind"] == "contextual");

  cfg.fail_fast = true;
  try {
    build_cache(b->corpus, *src, cfg, b->dir / "ff.cache");
    FAIL("expected BuildAborted");
  } catch (const BuildAborted& e) {
    CHECK(e.failure().index == 7);
  }
  CHECK_FALSE(std::filesystem::exists(b->dir / "ff.cache"));
}

TEST_CASE("property: random corpora survive a cache round trip") {
  for (std::uint64_t seed = 10; seed < 25; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> len(0, 60), gens(0, 4), n(1, 3);
    TempDir dir;
    auto corpus = testing::parse_corpus(
        testing::synthetic_corpus(seed, 3, len(rng), gens(rng), len(rng) / 2 + 1, 12));
    const auto emb = testing::parse_embeddings(testing::synthetic_embeddings(seed, 12, 4));
    PipelineConfig cfg;
    cfg.novel_n = n(rng);
    cfg.align.min_n = n(rng);
    cfg.top_k = n(rng);
    const auto src = static_source(emb);
    const auto built = annotate_corpus(corpus, *src, cfg);
    std::stringstream buf;
    write_cache(buf, built.config, built.examples);
    const auto cache = read_cache(buf, built.report.fingerprint);
    REQUIRE(cache.examples.size() == built.examples.size());
    for (std::size_t i = 0; i < cache.examples.size(); ++i) {
      CHECK(cache.examples[i] == built.examples[i]);
      for (const auto& p : cache.examples[i].pairs) {
        for (const auto& t : p.semantic.tokens) CHECK(t.ranked.size() <= cfg.top_k);
      }
    }
  }
}
