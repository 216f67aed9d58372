// sumalign: build annotation caches for a summarization corpus and serve
// them to the browser viewer.
//
//   sumalign build --input corpus.jsonl --embeddings vectors.txt --out corpus.cache
//   sumalign serve --cache corpus.cache --port 8050

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <thread>

#include "sumalign/cache.hpp"
#include "sumalign/pipeline.hpp"
#include "sumalign/server.hpp"

namespace {

constexpr int kExitPartial = 2;

struct BuildArgs {
  std::string input;
  std::string embeddings;
  std::string contextual;
  std::string out;
  std::string config;
  std::string stopwords;
  std::optional<std::size_t> min_n;
  std::optional<double> tau_lex;
  std::optional<double> tau_sem;
  std::optional<std::size_t> top_k;
  std::size_t jobs = 1;
  bool fail_fast = false;
};

int run_build(const BuildArgs& args) {
  using namespace sumalign;
  PipelineConfig cfg = args.config.empty() ? PipelineConfig{} : load_pipeline_config(args.config);
  if (!args.stopwords.empty()) cfg.stoplist = StopList::from_file(args.stopwords);
  if (args.min_n) cfg.align.min_n = *args.min_n;
  if (args.tau_lex) cfg.taxonomy.tau_lex = *args.tau_lex;
  if (args.tau_sem) cfg.taxonomy.tau_sem = *args.tau_sem;
  if (args.top_k) cfg.top_k = *args.top_k;
  cfg.jobs = args.jobs;
  cfg.fail_fast = args.fail_fast;
  cfg.validate();

  std::unique_ptr<EmbeddingSource> source;
  if (!args.contextual.empty()) {
    source = contextual_source(ContextualEmbeddingFile::open(args.contextual));
  } else {
    source = static_source(load_static_embeddings(args.embeddings));
  }

  const auto corpus = load_jsonl(args.input, cfg.stoplist);
  const BuildReport report = build_cache(corpus, *source, cfg, args.out);

  std::cerr << "wrote " << report.written << " of " << corpus.size() << " examples to "
            << args.out << " (fingerprint " << report.fingerprint << ")\n";
  for (const auto& f : report.failures) {
    std::cerr << "  failed: example '" << f.id << "' (#" << f.index << "): " << f.message << '\n';
  }
  return report.failures.empty() ? 0 : kExitPartial;
}

sumalign::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

int run_serve(const std::string& cache_path, const sumalign::ServerOptions& options) {
  using namespace sumalign;
  AnnotationService service;
  HttpServer server(service, options);
  const int port = server.bind();
  if (port < 0) {
    std::cerr << "cannot bind " << options.host << ":" << options.port << '\n';
    return 1;
  }
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  // Requests are answered with 503 until the cache is in memory.
  std::jthread loader([&] {
    try {
      auto cache = std::make_shared<const Cache>(read_cache(cache_path));
      std::cerr << "loaded " << cache->examples.size() << " examples from " << cache_path << '\n';
      service.publish(std::move(cache));
    } catch (const std::exception& e) {
      std::cerr << "failed to load " << cache_path << ": " << e.what() << '\n';
      server.stop();
    }
  });
  std::cerr << "listening on http://" << options.host << ":" << port << '\n';
  const bool ok = server.serve();
  g_server = nullptr;
  return ok && service.ready() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lexical and semantic alignment analysis for summarization corpora"};
  app.require_subcommand(1);

  BuildArgs build;
  auto* b = app.add_subcommand("build", "Precompute all annotations into a cache file");
  b->add_option("--input", build.input, "Corpus, one JSON object per line")->required()->check(CLI::ExistingFile);
  auto* emb = b->add_option("--embeddings", build.embeddings, "Static embedding file")->check(CLI::ExistingFile);
  auto* ctx = b->add_option("--contextual", build.contextual, "Precomputed contextual embeddings (JSON lines)")
                  ->check(CLI::ExistingFile);
  b->add_option("--out", build.out, "Cache file to write")->required();
  b->add_option("--config", build.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  b->add_option("--stopwords", build.stopwords, "Stopword list overriding the built-in one")
      ->check(CLI::ExistingFile);
  b->add_option("--min-n", build.min_n, "Shortest lexical match kept");
  b->add_option("--tau-lex", build.tau_lex, "Lexical coverage threshold");
  b->add_option("--tau-sem", build.tau_sem, "Semantic (BERTScore f1) threshold");
  b->add_option("--top-k", build.top_k, "Ranked semantic matches stored per token");
  b->add_option("--jobs", build.jobs, "Worker threads")->check(CLI::PositiveNumber);
  b->add_flag("--fail-fast", build.fail_fast, "Abort on the first failing example");
  b->callback([&] {
    if (emb->count() == 0 && ctx->count() == 0) {
      throw CLI::ValidationError("--embeddings", "one of --embeddings or --contextual is required");
    }
  });

  std::string cache_path;
  sumalign::ServerOptions serve_opts;
  std::vector<std::string> origins;
  std::string static_dir;
  auto* s = app.add_subcommand("serve", "Serve a cache over HTTP");
  s->add_option("--cache", cache_path, "Cache file from 'build'")->required()->check(CLI::ExistingFile);
  s->add_option("--port", serve_opts.port, "TCP port")->required();
  s->add_option("--host", serve_opts.host, "Interface to bind");
  s->add_option("--allow-origin", origins, "CORS origin allowlist (repeatable, '*' for any)");
  s->add_option("--static-dir", static_dir, "Directory served under /ui/")->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (b->parsed()) return run_build(build);
    if (!origins.empty()) serve_opts.allowed_origins = origins;
    if (!static_dir.empty()) serve_opts.static_dir = static_dir;
    return run_serve(cache_path, serve_opts);
  } catch (const sumalign::BuildAborted& e) {
    std::cerr << "aborted: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
