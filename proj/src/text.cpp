#include "sumalign/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>
#include <unicode/uversion.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "sumalign/digest.hpp"
#include "sumalign/error.hpp"

namespace sumalign {

namespace detail {
extern const std::string_view kEnglishStopwordsV1;
}

namespace {

enum class CharClass { Space, Punct, Word };

struct Scalar {
  UChar32 cp;
  std::size_t byte_start;
  std::size_t byte_end;
};

// Invalid UTF-8 bytes decode to a negative code point; they are kept as
// one-byte word characters so offsets still cover every input byte.
std::vector<Scalar> decode(std::string_view text) {
  std::vector<Scalar> out;
  out.reserve(text.size());
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t begin = i;
    UChar32 c = 0;
    U8_NEXT(s, i, length, c);
    out.push_back({c, static_cast<std::size_t>(begin), static_cast<std::size_t>(i)});
  }
  return out;
}

bool is_punct_or_symbol(UChar32 c) {
  if (c < 0) return false;
  return (U_GET_GC_MASK(c) & (U_GC_P_MASK | U_GC_S_MASK)) != 0;
}

CharClass classify(UChar32 c) {
  if (c >= 0 && u_isUWhiteSpace(c)) return CharClass::Space;
  if (is_punct_or_symbol(c)) return CharClass::Punct;
  return CharClass::Word;
}

const icu::Normalizer2& nfkc_casefold() {
  static const icu::Normalizer2* instance = [] {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFKCCasefoldInstance(status);
    if (U_FAILURE(status) || n == nullptr) {
      throw Error(std::string("ICU NFKC_Casefold unavailable: ") + u_errorName(status));
    }
    return n;
  }();
  return *instance;
}

}  // namespace

std::string to_string(const FieldId& field) {
  switch (field.kind) {
    case FieldKind::Document:
      return "document";
    case FieldKind::Reference:
      return "reference";
    case FieldKind::Generated:
      return "generated[" + std::to_string(field.index) + "]";
  }
  return "unknown";
}

std::size_t TokenizedText::content_token_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return t.is_content(); }));
}

const std::string& normalizer_version() {
  static const std::string version =
      std::string("ws-punct-1/nfkc_cf/unicode-") + U_UNICODE_VERSION + "/icu-" + U_ICU_VERSION;
  return version;
}

std::string normalize(std::string_view surface) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(surface.data(), static_cast<int32_t>(surface.size())));
  const icu::UnicodeString folded = nfkc_casefold().normalize(in, status);
  if (U_FAILURE(status)) {
    throw Error(std::string("normalize: ") + u_errorName(status));
  }
  std::string out;
  folded.toUTF8String(out);
  return out;
}

bool is_punctuation(std::string_view surface) {
  if (surface.empty()) return false;
  const auto scalars = decode(surface);
  return std::all_of(scalars.begin(), scalars.end(),
                     [](const Scalar& s) { return is_punct_or_symbol(s.cp); });
}

const StopList& StopList::english() {
  static const StopList list = parse(detail::kEnglishStopwordsV1, "en-v1");
  return list;
}

StopList StopList::parse(std::string_view text, std::string name) {
  StopList list;
  list.name_ = std::move(name);
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    list.words_.insert(normalize(line));
  }
  return list;
}

StopList StopList::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open stopword list " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.filename().string());
}

bool StopList::contains(std::string_view norm) const {
  return words_.find(std::string(norm)) != words_.end();
}

std::string StopList::digest() const {
  std::vector<std::string> sorted(words_.begin(), words_.end());
  std::sort(sorted.begin(), sorted.end());
  std::string joined;
  for (const auto& w : sorted) {
    joined += w;
    joined.push_back('\n');
  }
  return sha256_hex(joined);
}

bool is_stopword(std::string_view norm, const StopList& stoplist) {
  return !norm.empty() && stoplist.contains(norm);
}

TokenizedText tokenize(std::string_view text, const StopList& stoplist, FieldId field) {
  TokenizedText out;
  out.raw = std::string(text);
  out.field = field;
  out.normalizer_version = normalizer_version();

  const auto scalars = decode(text);
  std::size_t i = 0;
  while (i < scalars.size()) {
    const CharClass cls = classify(scalars[i].cp);
    if (cls == CharClass::Space) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < scalars.size() && classify(scalars[j].cp) == cls) ++j;

    Token tok;
    tok.start = i;
    tok.end = j;
    tok.byte_start = scalars[i].byte_start;
    tok.byte_end = scalars[j - 1].byte_end;
    tok.surface = out.raw.substr(tok.byte_start, tok.byte_end - tok.byte_start);
    tok.norm = normalize(tok.surface);
    tok.is_punct = cls == CharClass::Punct;
    tok.is_stop = is_stopword(tok.norm, stoplist);
    out.tokens.push_back(std::move(tok));
    i = j;
  }
  return out;
}

TokenizedText restore_tokens(std::string raw, FieldId field, std::string version,
                             const std::vector<Token>& stored) {
  TokenizedText out;
  out.raw = std::move(raw);
  out.field = field;
  out.normalizer_version = std::move(version);

  const auto scalars = decode(out.raw);
  std::size_t prev_end = 0;
  out.tokens.reserve(stored.size());
  for (const Token& s : stored) {
    if (s.start >= s.end || s.end > scalars.size() || s.start < prev_end) {
      throw Error("stored token offsets [" + std::to_string(s.start) + "," +
                  std::to_string(s.end) + ") do not fit the text");
    }
    Token tok = s;
    tok.byte_start = scalars[s.start].byte_start;
    tok.byte_end = scalars[s.end - 1].byte_end;
    tok.surface = out.raw.substr(tok.byte_start, tok.byte_end - tok.byte_start);
    prev_end = s.end;
    out.tokens.push_back(std::move(tok));
  }
  return out;
}

std::vector<std::string> span_norms(const TokenizedText& text, const Span& span) {
  std::vector<std::string> out;
  out.reserve(span.size());
  for (std::size_t i = span.start_token; i < span.end_token; ++i) out.push_back(text.tokens[i].norm);
  return out;
}

}  // namespace sumalign
