#include "sumalign/cache.hpp"

#include <fstream>

#include "sumalign/error.hpp"

namespace sumalign {

using nlohmann::json;

namespace {

constexpr int kStopFlag = 1;
constexpr int kPunctFlag = 2;

json span_json(const Span& s) { return json::array({s.start_token, s.end_token}); }

Span span_from(const json& j) {
  const Span s{j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
  if (j.size() != 2 || s.start_token >= s.end_token) throw Error("malformed span " + j.dump());
  return s;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json rouge_json(const std::optional<RougeScore>& r) {
  if (!r) return nullptr;
  return {{"n", r->n}, {"precision", r->precision}, {"recall", r->recall}, {"f1", r->f1}};
}

std::optional<RougeScore> rouge_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return RougeScore{j.at("n").get<std::size_t>(), j.at("precision").get<double>(),
                    j.at("recall").get<double>(), j.at("f1").get<double>()};
}

TokenizedText text_from(const json& j, FieldId field, const std::string& version) {
  std::vector<Token> stored;
  for (const auto& t : j.at("tokens")) {
    if (!t.is_array() || t.size() != 4) throw Error("malformed token " + t.dump());
    Token tok;
    tok.start = t[0].get<std::size_t>();
    tok.end = t[1].get<std::size_t>();
    tok.norm = t[2].get<std::string>();
    const int flags = t[3].get<int>();
    tok.is_stop = (flags & kStopFlag) != 0;
    tok.is_punct = (flags & kPunctFlag) != 0;
    stored.push_back(std::move(tok));
  }
  return restore_tokens(j.at("raw").get<std::string>(), field, version, stored);
}

json pair_json(const PairAnnotation& p) {
  json j;
  j["pair"] = std::string(to_string(p.pair.type));
  if (p.pair.type != PairType::DocReference) j["gen"] = p.pair.gen;

  json matches = json::array();
  for (const auto& m : p.lexical.matches) {
    json sources = json::array();
    for (const auto& s : m.source_spans) sources.push_back(span_json(s));
    matches.push_back({{"summary", span_json(m.summary_span)}, {"sources", sources}, {"length", m.length}});
  }
  j["lexical"] = {{"coverage", optional_json(p.lexical.coverage)}, {"matches", matches}};

  json tokens = json::array();
  for (const auto& t : p.semantic.tokens) {
    json ranked = json::array();
    for (const auto& r : t.ranked) ranked.push_back(json::array({r.index, r.score}));
    tokens.push_back({{"best", optional_json(t.best_score)}, {"matches", ranked}});
  }
  json aggregate = nullptr;
  if (p.semantic.aggregate) {
    aggregate = {{"precision", p.semantic.aggregate->precision},
                 {"recall", p.semantic.aggregate->recall},
                 {"f1", p.semantic.aggregate->f1}};
  }
  j["semantic"] = {{"tokens", tokens}, {"bertscore", aggregate}};
  j["rouge1"] = rouge_json(p.rouge1);
  j["rouge2"] = rouge_json(p.rouge2);
  j["quadrant"] = p.quadrant ? json(std::string(to_string(*p.quadrant))) : json(nullptr);

  json ngrams = json::array();
  for (const auto& g : p.novel.ngrams) {
    json spans = json::array();
    for (const auto& s : g.spans) spans.push_back(span_json(s));
    ngrams.push_back({{"ngram", g.ngram}, {"spans", spans}});
  }
  j["novel"] = {{"n", p.novel.n}, {"content_only", p.novel.content_only}, {"ngrams", ngrams}};
  return j;
}

PairAnnotation pair_from(const json& j) {
  PairAnnotation p;
  const auto type = parse_pair_type(j.at("pair").get<std::string>());
  if (!type) throw Error("unknown pair type " + j.at("pair").dump());
  p.pair.type = *type;
  p.pair.gen = j.contains("gen") ? j["gen"].get<std::size_t>() : 0;

  const auto& lex = j.at("lexical");
  if (!lex.at("coverage").is_null()) p.lexical.coverage = lex["coverage"].get<double>();
  for (const auto& m : lex.at("matches")) {
    LexMatch lm;
    lm.summary_span = span_from(m.at("summary"));
    for (const auto& s : m.at("sources")) lm.source_spans.push_back(span_from(s));
    lm.length = m.at("length").get<std::size_t>();
    p.lexical.matches.push_back(std::move(lm));
  }

  const auto& sem = j.at("semantic");
  for (const auto& t : sem.at("tokens")) {
    TokenMatches tm;
    if (!t.at("best").is_null()) tm.best_score = t["best"].get<double>();
    for (const auto& r : t.at("matches")) {
      tm.ranked.push_back({r.at(0).get<std::size_t>(), r.at(1).get<double>()});
    }
    p.semantic.tokens.push_back(std::move(tm));
  }
  if (const auto& b = sem.at("bertscore"); !b.is_null()) {
    p.semantic.aggregate =
        BertScore{b.at("precision").get<double>(), b.at("recall").get<double>(), b.at("f1").get<double>()};
  }

  p.rouge1 = rouge_from(j.at("rouge1"));
  p.rouge2 = rouge_from(j.at("rouge2"));
  if (!j.at("quadrant").is_null()) {
    p.quadrant = parse_quadrant(j["quadrant"].get<std::string>());
    if (!p.quadrant) throw Error("unknown quadrant " + j["quadrant"].dump());
  }

  const auto& nov = j.at("novel");
  p.novel.n = nov.at("n").get<std::size_t>();
  p.novel.content_only = nov.at("content_only").get<bool>();
  for (const auto& g : nov.at("ngrams")) {
    NovelNgram ng;
    ng.ngram = g.at("ngram").get<std::vector<std::string>>();
    for (const auto& s : g.at("spans")) ng.spans.push_back(span_from(s));
    p.novel.ngrams.push_back(std::move(ng));
  }
  return p;
}

}  // namespace

json text_to_json(const TokenizedText& text) {
  json tokens = json::array();
  for (const auto& t : text.tokens) {
    const int flags = (t.is_stop ? kStopFlag : 0) | (t.is_punct ? kPunctFlag : 0);
    tokens.push_back(json::array({t.start, t.end, t.norm, flags}));
  }
  return {{"raw", text.raw}, {"tokens", tokens}};
}

json example_to_json(const CachedExample& example) {
  const ExampleRecord& rec = example.record;
  json generated = json::array();
  for (const auto& g : rec.generated) {
    generated.push_back({{"model", g.model}, {"text", text_to_json(g.text)}});
  }
  json pairs = json::array();
  for (const auto& p : example.pairs) pairs.push_back(pair_json(p));
  return {{"id", rec.id},
          {"document", text_to_json(rec.document)},
          {"reference", text_to_json(rec.reference)},
          {"generated", generated},
          {"pairs", pairs}};
}

CachedExample example_from_json(const json& obj, const std::string& version) {
  CachedExample out;
  ExampleRecord& rec = out.record;
  rec.id = obj.at("id").get<std::string>();
  rec.document = text_from(obj.at("document"), FieldId::document(), version);
  rec.reference = text_from(obj.at("reference"), FieldId::reference(), version);
  const auto& gen = obj.at("generated");
  for (std::size_t k = 0; k < gen.size(); ++k) {
    rec.generated.push_back({gen[k].at("model").get<std::string>(),
                             text_from(gen[k].at("text"), FieldId::generated(k), version)});
  }
  for (const auto& p : obj.at("pairs")) out.pairs.push_back(pair_from(p));

  const auto expected = enumerate_pairs(rec);
  if (expected.size() != out.pairs.size()) throw Error("pair list does not match the example");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const PairAnnotation& p = out.pairs[i];
    if (!(p.pair == expected[i])) throw Error("pair list does not match the example");
    const auto [source, summary] = pair_texts(rec, p.pair);
    if (p.semantic.tokens.size() != summary.size()) {
      throw Error("semantic annotation length does not match the summary");
    }
    for (const auto& m : p.lexical.matches) {
      if (m.summary_span.end_token > summary.size()) throw Error("lexical span out of range");
      for (const auto& s : m.source_spans) {
        if (s.end_token > source.size()) throw Error("lexical source span out of range");
      }
    }
    for (const auto& t : p.semantic.tokens) {
      for (const auto& r : t.ranked) {
        if (r.index >= source.size()) throw Error("semantic match index out of range");
      }
    }
  }
  return out;
}

void write_cache(std::ostream& out, const json& config, const std::vector<CachedExample>& examples) {
  const json header = {{"format", std::string(kCacheFormat)},
                       {"version", kCacheVersion},
                       {"fingerprint", fingerprint(config)},
                       {"config", config},
                       {"examples", examples.size()}};
  out << header.dump() << '\n';
  for (const auto& ex : examples) out << example_to_json(ex).dump() << '\n';
}

Cache read_cache(std::istream& in, const std::optional<std::string>& expected_fingerprint) {
  Cache cache;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing cache header");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(1, std::string("cache header: ") + e.what());
  }
  if (!header.is_object() || header.value("format", std::string()) != kCacheFormat) {
    throw VersionError("not a sumalign cache (format tag missing or different)");
  }
  if (!header.contains("version") || !header["version"].is_number_integer() ||
      header["version"].get<int>() != kCacheVersion) {
    throw VersionError("unsupported cache version " +
                       (header.contains("version") ? header["version"].dump() : "<none>"));
  }
  try {
    cache.header.version = kCacheVersion;
    cache.header.fingerprint = header.at("fingerprint").get<std::string>();
    cache.header.config = header.at("config");
    cache.header.examples = header.at("examples").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ParseError(1, std::string("cache header: ") + e.what());
  }
  if (fingerprint(cache.header.config) != cache.header.fingerprint) {
    throw FingerprintMismatch("cache header config does not hash to its fingerprint");
  }
  if (expected_fingerprint && *expected_fingerprint != cache.header.fingerprint) {
    throw FingerprintMismatch("cache fingerprint " + cache.header.fingerprint +
                              " differs from expected " + *expected_fingerprint);
  }
  std::string version;
  try {
    version = cache.header.config.at("tokenizer").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(1, std::string("cache config: ") + e.what());
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (cache.examples.size() == cache.header.examples) {
      throw ParseError(line_no, "more examples than the header declares");
    }
    try {
      cache.examples.push_back(example_from_json(json::parse(line), version));
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (cache.examples.size() != cache.header.examples) {
    throw ParseError(line_no, "truncated cache: header declares " +
                                  std::to_string(cache.header.examples) + " examples, found " +
                                  std::to_string(cache.examples.size()));
  }
  return cache;
}

Cache read_cache(const std::filesystem::path& path,
                 const std::optional<std::string>& expected_fingerprint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open cache " + path.string());
  return read_cache(in, expected_fingerprint);
}

}  // namespace sumalign
