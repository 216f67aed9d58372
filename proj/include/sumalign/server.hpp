#pragma once

// Read-only JSON API over a loaded cache. Request handling is independent of
// the HTTP transport so it can be exercised directly.

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sumalign/cache.hpp"

namespace httplib {
class Server;
}

namespace sumalign {

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON, UTF-8
};

using QueryParams = std::multimap<std::string, std::string>;

inline constexpr std::size_t kDefaultHoverK = 10;
inline constexpr std::size_t kDefaultBuckets = 100;

/// Routes:
///   GET /corpus
///   GET /example/{i}
///   GET /example/{i}/alignment?pair=<type>&gen=<k>
///   GET /example/{i}/hover?pair=<type>&gen=<k>&token=<t>&k=<K>
///   GET /example/{i}/globalview?pair=<type>&gen=<k>&buckets=<B>
/// Every route answers 503 until a cache has been published.
class AnnotationService {
 public:
  AnnotationService() = default;
  explicit AnnotationService(std::shared_ptr<const Cache> cache) { publish(std::move(cache)); }

  /// May be called once; later calls are ignored.
  void publish(std::shared_ptr<const Cache> cache);
  bool ready() const noexcept { return cache_.load(std::memory_order_acquire) != nullptr; }

  HttpResponse handle(std::string_view path, const QueryParams& query) const;

 private:
  std::shared_ptr<const Cache> owned_;
  std::atomic<const Cache*> cache_{nullptr};
  std::atomic<bool> published_{false};
};

struct GlobalViewBucket {
  std::size_t tokens = 0;
  double density = 0.0;                 // covered fraction of the bucket's tokens
  std::optional<double> max_best_score;  // over summary tokens whose best match falls here
};

/// Buckets min(B, T) over the T source tokens of a pair; token i goes to
/// bucket floor(i * B / T).
std::vector<GlobalViewBucket> global_view(const PairAnnotation& pair, std::size_t source_tokens,
                                          std::size_t buckets);

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8050;
  // Origins allowed by CORS. An entry without a port also admits that
  // origin with any port; "*" admits everything.
  std::vector<std::string> allowed_origins = {"http://localhost", "http://127.0.0.1"};
  std::optional<std::filesystem::path> static_dir;  // served under /ui/
};

bool origin_allowed(std::string_view origin, const std::vector<std::string>& allowlist);

class HttpServer {
 public:
  HttpServer(const AnnotationService& service, ServerOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds (port 0 picks a free port) and returns the bound port, or -1.
  int bind();
  /// Serves until stop(); call after bind().
  bool serve();
  void stop();

 private:
  const AnnotationService& service_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace sumalign
