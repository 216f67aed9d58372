#include "sumalign/server.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include <httplib.h>

namespace sumalign {

using nlohmann::json;

namespace {

HttpResponse json_response(int status, const json& body) { return {status, body.dump()}; }

HttpResponse error_response(int status, const std::string& message) {
  return json_response(status, {{"error", message}, {"status", status}});
}

std::optional<std::size_t> parse_index(std::string_view s) {
  if (s.empty() || s.size() > 19) return std::nullopt;
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::string> query_value(const QueryParams& q, const std::string& key) {
  const auto it = q.find(key);
  if (it == q.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = i;
    while (j < path.size() && path[j] != '/') ++j;
    if (j > i) parts.push_back(path.substr(i, j - i));
    i = j;
  }
  return parts;
}

json char_range(const TokenizedText& text, const Span& span) {
  return json::array({text.tokens[span.start_token].start, text.tokens[span.end_token - 1].end});
}

json span_payload(const TokenizedText& text, const Span& span) {
  return {{"tokens", json::array({span.start_token, span.end_token})},
          {"chars", char_range(text, span)}};
}

json text_payload(const TokenizedText& text) {
  json tokens = json::array();
  for (const auto& t : text.tokens) {
    tokens.push_back({{"text", t.surface},
                      {"start", t.start},
                      {"end", t.end},
                      {"stop", t.is_stop},
                      {"punct", t.is_punct}});
  }
  return {{"raw", text.raw}, {"tokens", tokens}};
}

json pair_ref_json(const PairRef& p) {
  json j = {{"pair", std::string(to_string(p.type))}};
  if (p.type != PairType::DocReference) j["gen"] = p.gen;
  return j;
}

json match_payload(const TokenizedText& source, const ScoredIndex& m) {
  const Token& t = source.tokens[m.index];
  return {{"index", m.index}, {"text", t.surface}, {"start", t.start}, {"end", t.end},
          {"score", m.score}};
}

template <typename T>
json nullable(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json rouge_payload(const std::optional<RougeScore>& r) {
  if (!r) return nullptr;
  return {{"n", r->n}, {"precision", r->precision}, {"recall", r->recall}, {"f1", r->f1}};
}

json alignment_payload(const CachedExample& ex, const PairAnnotation& p) {
  const auto [source, summary] = pair_texts(ex.record, p.pair);
  json out = pair_ref_json(p.pair);

  json matches = json::array();
  for (const auto& m : p.lexical.matches) {
    json sources = json::array();
    for (const auto& s : m.source_spans) sources.push_back(span_payload(source, s));
    matches.push_back({{"summary", span_payload(summary, m.summary_span)},
                       {"sources", sources},
                       {"length", m.length}});
  }
  out["lexical"] = {{"coverage", nullable(p.lexical.coverage)}, {"matches", matches}};

  json tokens = json::array();
  for (const auto& t : p.semantic.tokens) {
    json ranked = json::array();
    for (const auto& r : t.ranked) ranked.push_back(match_payload(source, r));
    tokens.push_back({{"best_score", nullable(t.best_score)}, {"matches", ranked}});
  }
  json bert = nullptr;
  if (p.semantic.aggregate) {
    bert = {{"precision", p.semantic.aggregate->precision},
            {"recall", p.semantic.aggregate->recall},
            {"f1", p.semantic.aggregate->f1}};
  }
  out["semantic"] = {{"tokens", tokens}, {"bertscore", bert}};
  out["rouge1"] = rouge_payload(p.rouge1);
  out["rouge2"] = rouge_payload(p.rouge2);
  out["quadrant"] = p.quadrant ? json(std::string(to_string(*p.quadrant))) : json(nullptr);
  out["scores"] = {{"lexical", nullable(p.lexical.coverage)},
                   {"semantic", p.semantic.aggregate ? json(p.semantic.aggregate->f1) : json(nullptr)}};

  json ngrams = json::array();
  for (const auto& g : p.novel.ngrams) {
    json spans = json::array();
    for (const auto& s : g.spans) spans.push_back(span_payload(summary, s));
    ngrams.push_back({{"ngram", g.ngram}, {"spans", spans}});
  }
  out["novel"] = {{"n", p.novel.n}, {"content_only", p.novel.content_only}, {"ngrams", ngrams}};
  return out;
}

}  // namespace

std::vector<GlobalViewBucket> global_view(const PairAnnotation& pair, std::size_t source_tokens,
                                          std::size_t buckets) {
  const std::size_t count = std::min(buckets, source_tokens);
  std::vector<GlobalViewBucket> out(count);
  if (count == 0) return out;

  std::vector<bool> covered(source_tokens, false);
  for (const auto& m : pair.lexical.matches) {
    for (const auto& s : m.source_spans) {
      for (std::size_t t = s.start_token; t < s.end_token && t < source_tokens; ++t) covered[t] = true;
    }
  }
  auto bucket_of = [&](std::size_t i) { return i * count / source_tokens; };
  std::vector<std::size_t> hits(count, 0);
  for (std::size_t i = 0; i < source_tokens; ++i) {
    auto& b = out[bucket_of(i)];
    ++b.tokens;
    if (covered[i]) ++hits[bucket_of(i)];
  }
  for (std::size_t b = 0; b < count; ++b) {
    out[b].density = static_cast<double>(hits[b]) / static_cast<double>(out[b].tokens);
  }
  for (const auto& t : pair.semantic.tokens) {
    if (t.ranked.empty() || !t.best_score || t.ranked.front().index >= source_tokens) continue;
    auto& slot = out[bucket_of(t.ranked.front().index)].max_best_score;
    if (!slot || *t.best_score > *slot) slot = *t.best_score;
  }
  return out;
}

void AnnotationService::publish(std::shared_ptr<const Cache> cache) {
  if (!cache || published_.exchange(true)) return;
  owned_ = std::move(cache);
  cache_.store(owned_.get(), std::memory_order_release);
}

HttpResponse AnnotationService::handle(std::string_view path, const QueryParams& query) const {
  const Cache* cache = cache_.load(std::memory_order_acquire);
  if (cache == nullptr) return error_response(503, "corpus is still loading");

  const auto parts = split_path(path);
  if (parts.size() == 1 && parts[0] == "corpus") {
    std::set<std::string> models;
    for (const auto& ex : cache->examples) {
      for (const auto& g : ex.record.generated) models.insert(g.model);
    }
    return json_response(200, {{"examples", cache->examples.size()},
                               {"fingerprint", cache->header.fingerprint},
                               {"models", models},
                               {"config", cache->header.config},
                               {"format", std::string(kCacheFormat)},
                               {"version", cache->header.version}});
  }
  if (parts.empty() || parts[0] != "example" || parts.size() < 2 || parts.size() > 3) {
    return error_response(404, "no such route");
  }

  const auto index = parse_index(parts[1]);
  if (!index) return error_response(400, "example index must be a non-negative integer");
  if (*index >= cache->examples.size()) {
    return error_response(404, "example " + std::to_string(*index) + " out of range");
  }
  const CachedExample& ex = cache->examples[*index];

  if (parts.size() == 2) {
    json generated = json::array();
    for (const auto& g : ex.record.generated) {
      generated.push_back({{"model", g.model}, {"text", text_payload(g.text)}});
    }
    json pairs = json::array();
    for (const auto& p : ex.pairs) pairs.push_back(pair_ref_json(p.pair));
    return json_response(200, {{"index", *index},
                               {"id", ex.record.id},
                               {"document", text_payload(ex.record.document)},
                               {"reference", text_payload(ex.record.reference)},
                               {"generated", generated},
                               {"pairs", pairs}});
  }

  const std::string_view action = parts[2];
  if (action != "alignment" && action != "hover" && action != "globalview") {
    return error_response(404, "no such route");
  }

  const auto pair_name = query_value(query, "pair");
  if (!pair_name) return error_response(400, "missing 'pair' parameter");
  const auto type = parse_pair_type(*pair_name);
  if (!type) return error_response(400, "unknown pair type '" + *pair_name + "'");
  PairRef ref{*type, 0};
  if (*type != PairType::DocReference) {
    if (const auto gen = query_value(query, "gen")) {
      const auto g = parse_index(*gen);
      if (!g) return error_response(400, "'gen' must be a non-negative integer");
      ref.gen = *g;
    }
  }
  const PairAnnotation* pair = ex.find(ref);
  if (pair == nullptr) {
    return error_response(404, "pair " + *pair_name + " (gen " + std::to_string(ref.gen) +
                                   ") is not available for example " + std::to_string(*index));
  }
  const auto [source, summary] = pair_texts(ex.record, pair->pair);

  if (action == "alignment") return json_response(200, alignment_payload(ex, *pair));

  if (action == "hover") {
    const auto token_param = query_value(query, "token");
    if (!token_param) return error_response(400, "missing 'token' parameter");
    const auto token = parse_index(*token_param);
    if (!token) return error_response(400, "'token' must be a non-negative integer");
    if (*token >= summary.size()) {
      return error_response(404, "token " + std::to_string(*token) + " out of range");
    }
    std::size_t k = kDefaultHoverK;
    if (const auto kp = query_value(query, "k")) {
      const auto parsed = parse_index(*kp);
      if (!parsed || *parsed < 1) return error_response(400, "'k' must be a positive integer");
      k = *parsed;
    }
    const TokenMatches& tm = pair->semantic.tokens[*token];
    json matches = json::array();
    for (std::size_t r = 0; r < std::min(k, tm.ranked.size()); ++r) {
      matches.push_back(match_payload(source, tm.ranked[r]));
    }
    const Token& tok = summary.tokens[*token];
    json out = pair_ref_json(pair->pair);
    out["token"] = *token;
    out["text"] = tok.surface;
    out["start"] = tok.start;
    out["end"] = tok.end;
    out["best_score"] = nullable(tm.best_score);
    out["matches"] = matches;
    return json_response(200, out);
  }

  std::size_t buckets = kDefaultBuckets;
  if (const auto bp = query_value(query, "buckets")) {
    const auto parsed = parse_index(*bp);
    if (!parsed || *parsed < 1) return error_response(400, "'buckets' must be a positive integer");
    buckets = *parsed;
  }
  json arr = json::array();
  for (const auto& b : global_view(*pair, source.size(), buckets)) {
    arr.push_back({{"tokens", b.tokens}, {"density", b.density},
                   {"max_best_score", nullable(b.max_best_score)}});
  }
  json out = pair_ref_json(pair->pair);
  out["source_tokens"] = source.size();
  out["buckets"] = arr;
  return json_response(200, out);
}

bool origin_allowed(std::string_view origin, const std::vector<std::string>& allowlist) {
  for (const auto& entry : allowlist) {
    if (entry == "*" || origin == entry) return true;
    if (origin.size() > entry.size() + 1 && origin.substr(0, entry.size()) == entry &&
        origin[entry.size()] == ':') {
      const auto port = origin.substr(entry.size() + 1);
      if (std::all_of(port.begin(), port.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        return true;
      }
    }
  }
  return false;
}

HttpServer::HttpServer(const AnnotationService& service, ServerOptions options)
    : service_(service), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  auto cors = [this](const httplib::Request& req, httplib::Response& res) {
    const auto origin = req.get_header_value("Origin");
    if (origin.empty() || !origin_allowed(origin, options_.allowed_origins)) return;
    const bool any = std::find(options_.allowed_origins.begin(), options_.allowed_origins.end(),
                               "*") != options_.allowed_origins.end();
    res.set_header("Access-Control-Allow-Origin", any ? "*" : origin);
    res.set_header("Vary", "Origin");
  };

  if (options_.static_dir) server_->set_mount_point("/ui", options_.static_dir->string());

  server_->Get(R"(/(corpus|example/.*))", [this, cors](const httplib::Request& req,
                                                        httplib::Response& res) {
    QueryParams query(req.params.begin(), req.params.end());
    const HttpResponse r = service_.handle(req.path, query);
    res.status = r.status;
    res.set_content(r.body, "application/json; charset=utf-8");
    cors(req, res);
  });
  server_->Options(R"(/.*)", [cors](const httplib::Request& req, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    cors(req, res);
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  if (options_.port == 0) return server_->bind_to_any_port(options_.host);
  return server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
}

bool HttpServer::serve() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

}  // namespace sumalign
