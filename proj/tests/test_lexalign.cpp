#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sumalign/error.hpp"
#include "sumalign/lexalign.hpp"

using namespace sumalign;

namespace {

std::vector<oracle::Match> as_oracle(const LexicalAlignment& a) {
  std::vector<oracle::Match> out;
  for (const auto& m : a.matches) {
    oracle::Match om{m.summary_span.start_token, m.summary_span.end_token, {}};
    for (const auto& s : m.source_spans) om.sources.emplace_back(s.start_token, s.end_token);
    out.push_back(std::move(om));
  }
  return out;
}

}  // namespace

TEST_CASE("build_ngram_index enumerates every n-gram") {
  const auto src = tokenize("a b a");
  const auto idx = build_ngram_index(src, 2);
  // Exhaustive enumeration: unigrams at 0,1,2; bigrams at 0,1.
  CHECK(idx.size() == 4);
  CHECK(*idx.find({"a"}) == std::vector<Span>{{0, 1}, {2, 3}});
  CHECK(*idx.find({"b"}) == std::vector<Span>{{1, 2}});
  CHECK(*idx.find({"a", "b"}) == std::vector<Span>{{0, 2}});
  CHECK(*idx.find({"b", "a"}) == std::vector<Span>{{1, 3}});
  CHECK(idx.find({"a", "b", "a"}) == nullptr);
}

TEST_CASE("build_ngram_index edge cases") {
  CHECK(build_ngram_index(tokenize(""), 3).empty());
  const auto one = build_ngram_index(tokenize("x"), 5);
  CHECK(one.size() == 1);
  CHECK(one.find({"x"}) != nullptr);
  CHECK_THROWS_AS(build_ngram_index(tokenize("x"), 0), std::invalid_argument);
}

TEST_CASE("build_ngram_index keys match their spans") {
  const auto src = tokenize("The cat saw the Cat and the cat ran");
  const auto idx = build_ngram_index(src, kUnboundedN);
  for (const auto& [key, spans] : idx.entries) {
    CHECK(std::is_sorted(spans.begin(), spans.end()));
    for (const auto& s : spans) CHECK(span_norms(src, s) == key);
  }
  CHECK(idx.find({"the", "cat"})->size() == 3);
}

TEST_CASE("align_lexical finds the copied span") {
  const auto src = tokenize("the quick brown fox jumps over");
  const auto sum = tokenize("quick brown fox leaps");
  const auto a = align_lexical(src, sum);
  REQUIRE(a.matches.size() == 1);
  CHECK(a.matches[0].summary_span == Span{0, 3});
  CHECK(a.matches[0].source_spans == std::vector<Span>{{1, 4}});
  CHECK(a.matches[0].length == 3);
  REQUIRE(a.coverage.has_value());
  CHECK(*a.coverage == doctest::Approx(0.75));
  CHECK(coverage_fraction(a, sum) == doctest::Approx(0.75));
}

TEST_CASE("self-alignment is one full-length match") {
  const auto t = tokenize("Sharks were spotted near the pier, officials said.");
  const auto a = align_lexical(t, t);
  REQUIRE(a.matches.size() == 1);
  CHECK(a.matches[0].summary_span == Span{0, t.size()});
  CHECK(a.matches[0].source_spans == std::vector<Span>{{0, t.size()}});
  CHECK(coverage_fraction(a, t) == 1.0);
}

TEST_CASE("disjoint vocabularies") {
  const auto a = align_lexical(tokenize("alpha beta gamma"), tokenize("delta epsilon"));
  CHECK(a.matches.empty());
  CHECK(*a.coverage == 0.0);
}

TEST_CASE("coverage_fraction needs content tokens") {
  const auto sum = tokenize("the of , and");
  const auto a = align_lexical(tokenize("the of , and"), sum);
  CHECK_FALSE(a.coverage.has_value());
  CHECK_THROWS_AS(coverage_fraction(a, sum), NoContentTokens);
}

TEST_CASE("stopword-only spans are dropped by default") {
  const auto src = tokenize("of the river bank");
  const auto sum = tokenize("of the sea");
  CHECK(align_lexical(src, sum).matches.empty());
  AlignConfig keep;
  keep.drop_stopword_only = false;
  const auto a = align_lexical(src, sum, keep);
  REQUIRE(a.matches.size() == 1);
  CHECK(a.matches[0].summary_span == Span{0, 2});
}

TEST_CASE("repeated n-grams list every source occurrence in order") {
  const auto src = tokenize("red car , blue car , red car");
  const auto sum = tokenize("a red car");
  const auto a = align_lexical(src, sum);
  REQUIRE(a.matches.size() == 1);
  CHECK(a.matches[0].source_spans == std::vector<Span>{{0, 2}, {6, 8}});
}

TEST_CASE("overlapping maximal matches are all reported") {
  // "b c" and "c d" both occur, "b c d" does not.
  const auto src = tokenize("x b c y c d z");
  const auto sum = tokenize("b c d");
  const auto a = align_lexical(src, sum);
  REQUIRE(a.matches.size() == 2);
  CHECK(a.matches[0].summary_span == Span{0, 2});
  CHECK(a.matches[1].summary_span == Span{1, 3});
}

TEST_CASE("min_n filters short matches") {
  const auto src = tokenize("quick brown fox and a lazy dog");
  const auto sum = tokenize("quick brown fox saw dog");
  AlignConfig cfg;
  cfg.min_n = 2;
  const auto a = align_lexical(src, sum, cfg);
  REQUIRE(a.matches.size() == 1);
  CHECK(a.matches[0].length == 3);
  cfg.min_n = 0;
  CHECK_THROWS_AS(align_lexical(src, sum, cfg), std::invalid_argument);
}

TEST_CASE("mismatched normalizer versions are rejected") {
  const auto src = tokenize("a b");
  auto sum = tokenize("a b");
  sum.normalizer_version = "other";
  CHECK_THROWS_AS(align_lexical(src, sum), MismatchedNormalization);
}

TEST_CASE("property: align_lexical equals the brute-force oracle") {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<std::size_t> alpha(1, 8);
  std::uniform_int_distribution<std::size_t> min_n(1, 3);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t k = alpha(rng);
    const std::string src_raw = oracle::random_text(rng, 50, k);
    const std::string sum_raw = oracle::random_text(rng, 50, k);
    const auto src = tokenize(src_raw);
    const auto sum = tokenize(sum_raw);
    AlignConfig cfg;
    cfg.min_n = min_n(rng);
    cfg.drop_stopword_only = trial % 2 == 0;

    const auto o_src = oracle::lower_words(src_raw);
    const auto o_sum = oracle::lower_words(sum_raw);
    const auto expected = oracle::maximal_matches(o_src, o_sum, [&](std::size_t a, std::size_t b) {
      if (b - a < cfg.min_n) return false;
      if (!cfg.drop_stopword_only) return true;
      for (std::size_t i = a; i < b; ++i) {
        if (o_sum[i] != "the" && o_sum[i] != ",") return true;
      }
      return false;
    });
    REQUIRE(as_oracle(align_lexical(src, sum, cfg)) == expected);
  }
}

TEST_CASE("property: shared n-grams occur in both texts; raising min_n never adds matches") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto src = tokenize(oracle::random_text(rng, 40, 5));
    const auto sum = tokenize(oracle::random_text(rng, 40, 5));
    const SourceIndex index(src);
    std::vector<LexMatch> previous;
    for (std::size_t n = 1; n <= 5; ++n) {
      AlignConfig cfg;
      cfg.min_n = n;
      const auto a = align_lexical(index, sum, cfg);
      for (const auto& m : a.matches) {
        for (const auto& s : m.source_spans) {
          CHECK(span_norms(src, s) == span_norms(sum, m.summary_span));
        }
      }
      if (n > 1) {
        for (const auto& m : a.matches) {
          CHECK(std::find(previous.begin(), previous.end(), m) != previous.end());
        }
      }
      previous = a.matches;
    }
  }
}

TEST_CASE("performance: 10k-token source, 200-token summary") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> word(0, 2999);
  std::string src_raw;
  for (int i = 0; i < 10000; ++i) src_raw += "w" + std::to_string(word(rng)) + " ";
  const auto src = tokenize(src_raw);
  // Summary copies a few source stretches and adds novel words.
  std::string sum_raw;
  for (int i = 0; i < 200; ++i) {
    sum_raw += (i % 40 < 25 ? src.tokens[1000 + i].surface : "novel" + std::to_string(i)) + " ";
  }
  const auto sum = tokenize(sum_raw);

  const auto t0 = std::chrono::steady_clock::now();
  const auto a = align_lexical(src, sum);
  const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("align 10000x200 tokens: " << ms << " ms");
  CHECK(!a.matches.empty());
  CHECK(ms < 50.0);
}
