#pragma once

// The cache file: a JSON Lines file whose first line is a header
//   {"format":"sumalign-cache","version":1,"fingerprint":hex,"config":{..},"examples":N}
// followed by exactly N CachedExample objects, one per line.

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sumalign/pipeline.hpp"

namespace sumalign {

inline constexpr std::string_view kCacheFormat = "sumalign-cache";
inline constexpr int kCacheVersion = 1;

struct CacheHeader {
  int version = kCacheVersion;
  std::string fingerprint;
  nlohmann::json config;
  std::size_t examples = 0;
};

struct Cache {
  CacheHeader header;
  std::vector<CachedExample> examples;
};

nlohmann::json text_to_json(const TokenizedText& text);
nlohmann::json example_to_json(const CachedExample& example);
CachedExample example_from_json(const nlohmann::json& obj, const std::string& normalizer_version);

void write_cache(std::ostream& out, const nlohmann::json& config,
                 const std::vector<CachedExample>& examples);

/// Throws ParseError (malformed or truncated), VersionError (unknown format
/// or version), FingerprintMismatch (header does not hash to its
/// fingerprint, or differs from `expected_fingerprint`).
Cache read_cache(std::istream& in, const std::optional<std::string>& expected_fingerprint = {});
Cache read_cache(const std::filesystem::path& path,
                 const std::optional<std::string>& expected_fingerprint = {});

}  // namespace sumalign
