#pragma once

// Fixtures shared by the pipeline, server, and acceptance tests: scratch
// directories and synthetic corpora with matching static embeddings.

#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sumalign/corpus.hpp"
#include "sumalign/semalign.hpp"

namespace testing {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("sumalign-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

/// Vocabulary of pseudo-words w0..w{n-1} plus a few stopwords and
/// punctuation, so every filter sees traffic.
inline std::vector<std::string> vocabulary(std::size_t n) {
  std::vector<std::string> v = {"the", "of", "and", "a", ",", "."};
  for (std::size_t i = 0; i < n; ++i) v.push_back("w" + std::to_string(i));
  return v;
}

inline std::string random_words(std::mt19937_64& rng, const std::vector<std::string>& vocab,
                                std::size_t count) {
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i) out.push_back(' ');
    out += vocab[pick(rng)];
  }
  return out;
}

/// Summary that copies a few runs from `doc` and fills the rest with
/// random words, so alignments are non-trivial.
inline std::string summary_of(std::mt19937_64& rng, const std::vector<std::string>& vocab,
                              const std::string& doc, std::size_t count) {
  std::vector<std::string> words;
  {
    std::istringstream in(doc);
    std::string w;
    while (in >> w) words.push_back(w);
  }
  std::string out;
  std::uniform_int_distribution<int> coin(0, 2);
  std::size_t emitted = 0;
  while (emitted < count) {
    if (!out.empty()) out.push_back(' ');
    if (coin(rng) != 0 && !words.empty()) {
      std::uniform_int_distribution<std::size_t> at(0, words.size() - 1);
      std::size_t p = at(rng);
      const std::size_t run = std::min<std::size_t>(count - emitted, 1 + coin(rng) * 3);
      for (std::size_t k = 0; k < run && p < words.size(); ++k, ++p, ++emitted) {
        if (k) out.push_back(' ');
        out += words[p];
      }
    } else {
      out += random_words(rng, vocab, 1);
      ++emitted;
    }
  }
  return out;
}

/// JSON Lines corpus with `examples` records of `doc_len` document tokens
/// and `gens` generated summaries each.
inline std::string synthetic_corpus(std::uint64_t seed, std::size_t examples, std::size_t doc_len,
                                    std::size_t gens, std::size_t sum_len = 40,
                                    std::size_t vocab_size = 400) {
  std::mt19937_64 rng(seed);
  const auto vocab = vocabulary(vocab_size);
  std::string out;
  for (std::size_t i = 0; i < examples; ++i) {
    const std::string doc = random_words(rng, vocab, doc_len);
    nlohmann::json obj;
    obj["id"] = "ex" + std::to_string(i);
    obj["document"] = doc;
    obj["reference"] = summary_of(rng, vocab, doc, sum_len / 2);
    nlohmann::json gen = nlohmann::json::array();
    for (std::size_t k = 0; k < gens; ++k) {
      gen.push_back({{"model", "model-" + std::to_string(k)},
                     {"text", summary_of(rng, vocab, doc, sum_len)}});
    }
    obj["generated"] = gen;
    out += obj.dump() + "\n";
  }
  return out;
}

/// Static embeddings covering `vocabulary(vocab_size)`.
inline std::string synthetic_embeddings(std::uint64_t seed, std::size_t vocab_size,
                                        std::size_t dim = 32) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  const auto vocab = vocabulary(vocab_size);
  std::ostringstream out;
  std::size_t rows = 0;
  std::ostringstream body;
  for (const auto& w : vocab) {
    if (w == "," || w == ".") continue;
    body << w;
    for (std::size_t i = 0; i < dim; ++i) body << ' ' << g(rng);
    body << '\n';
    ++rows;
  }
  out << rows << ' ' << dim << '\n' << body.str();
  return out.str();
}

inline std::shared_ptr<const sumalign::StaticEmbeddings> parse_embeddings(const std::string& text) {
  std::istringstream in(text);
  return sumalign::StaticEmbeddings::parse(in);
}

inline std::vector<sumalign::ExampleRecord> parse_corpus(const std::string& text) {
  std::istringstream in(text);
  return sumalign::parse_jsonl(in);
}

}  // namespace testing
