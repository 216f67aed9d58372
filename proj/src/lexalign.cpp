#include "sumalign/lexalign.hpp"

#include <algorithm>
#include <stdexcept>

#include "sumalign/error.hpp"

namespace sumalign {

const std::vector<Span>* NGramIndex::find(const NGramKey& key) const {
  const auto it = entries.find(key);
  return it == entries.end() ? nullptr : &it->second;
}

NGramIndex build_ngram_index(const TokenizedText& source, std::size_t max_n) {
  if (max_n == 0) throw std::invalid_argument("build_ngram_index: max_n must be >= 1");
  NGramIndex index;
  const std::size_t len = source.size();
  const std::size_t top = std::min(max_n, len);
  for (std::size_t n = 1; n <= top; ++n) {
    for (std::size_t i = 0; i + n <= len; ++i) {
      const Span span{i, i + n};
      index.entries[span_norms(source, span)].push_back(span);
    }
  }
  return index;
}

SourceIndex::SourceIndex(const TokenizedText& source)
    : source_size_(source.size()), normalizer_version_(source.normalizer_version) {
  states_.reserve(2 * source_size_ + 1);
  edge_labels_.reserve(2 * source_size_ + 1);
  edges_.reserve(3 * source_size_ + 1);
  states_.push_back(State{});
  edge_labels_.emplace_back();

  for (std::size_t pos = 0; pos < source.size(); ++pos) {
    const auto [it, inserted] =
        vocab_.try_emplace(source.tokens[pos].norm, static_cast<std::int32_t>(vocab_.size()));
    extend(it->second, pos);
  }

  // Children of each state in the suffix-link tree, for occurrence listing.
  child_offsets_.assign(states_.size() + 1, 0);
  for (std::size_t s = 1; s < states_.size(); ++s) ++child_offsets_[states_[s].link + 1];
  for (std::size_t s = 1; s <= states_.size(); ++s) child_offsets_[s] += child_offsets_[s - 1];
  children_.resize(states_.size() > 0 ? states_.size() - 1 : 0);
  std::vector<std::size_t> fill(child_offsets_.begin(), child_offsets_.end() - 1);
  for (std::size_t s = 1; s < states_.size(); ++s) {
    children_[fill[states_[s].link]++] = static_cast<std::int32_t>(s);
  }
}

std::int32_t SourceIndex::token_id(const std::string& norm) const {
  const auto it = vocab_.find(norm);
  return it == vocab_.end() ? -1 : it->second;
}

std::int32_t SourceIndex::transition(std::int32_t state, std::int32_t token) const {
  const auto it = edges_.find(edge_key(state, token));
  return it == edges_.end() ? -1 : it->second;
}

void SourceIndex::set_transition(std::int32_t state, std::int32_t token, std::int32_t target) {
  const auto [it, inserted] = edges_.insert_or_assign(edge_key(state, token), target);
  if (inserted) edge_labels_[state].push_back(token);
}

void SourceIndex::extend(std::int32_t token, std::size_t position) {
  const auto cur = static_cast<std::int32_t>(states_.size());
  states_.push_back(State{states_[last_].len + 1, -1, position, false});
  edge_labels_.emplace_back();

  std::int32_t p = last_;
  while (p != -1 && transition(p, token) < 0) {
    set_transition(p, token, cur);
    p = states_[p].link;
  }
  if (p == -1) {
    states_[cur].link = 0;
  } else {
    const std::int32_t q = transition(p, token);
    if (states_[p].len + 1 == states_[q].len) {
      states_[cur].link = q;
    } else {
      const auto clone = static_cast<std::int32_t>(states_.size());
      states_.push_back(State{states_[p].len + 1, states_[q].link, states_[q].first_end, true});
      edge_labels_.emplace_back();
      const std::vector<std::int32_t> labels = edge_labels_[q];
      for (const std::int32_t label : labels) set_transition(clone, label, transition(q, label));
      while (p != -1 && transition(p, token) == q) {
        set_transition(p, token, clone);
        p = states_[p].link;
      }
      states_[q].link = clone;
      states_[cur].link = clone;
    }
  }
  last_ = cur;
}

SourceIndex::Cursor SourceIndex::advance(Cursor cur, std::int32_t token) const {
  if (token < 0) return {};
  while (cur.state != 0 && transition(cur.state, token) < 0) {
    cur.state = states_[cur.state].link;
    cur.length = states_[cur.state].len;
  }
  const std::int32_t next = transition(cur.state, token);
  if (next < 0) return {};
  return {next, cur.length + 1};
}

std::vector<Span> SourceIndex::occurrences(std::int32_t state, std::size_t length) const {
  std::vector<Span> out;
  std::vector<std::int32_t> stack{state};
  while (!stack.empty()) {
    const std::int32_t s = stack.back();
    stack.pop_back();
    if (s != 0 && !states_[s].cloned) {
      const std::size_t end = states_[s].first_end + 1;
      out.push_back(Span{end - length, end});
    }
    for (std::size_t c = child_offsets_[s]; c < child_offsets_[s + 1]; ++c) {
      stack.push_back(children_[c]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

LexicalAlignment align_lexical(const SourceIndex& index, const TokenizedText& summary,
                               const AlignConfig& cfg) {
  if (cfg.min_n == 0) throw std::invalid_argument("align_lexical: min_n must be >= 1");
  if (index.normalizer_version() != summary.normalizer_version) {
    throw MismatchedNormalization("source normalized with '" + index.normalizer_version() +
                                  "', summary with '" + summary.normalizer_version + "'");
  }

  const std::size_t m = summary.size();
  // Longest source-occurring summary substring ending at each position.
  std::vector<SourceIndex::Cursor> ending(m);
  SourceIndex::Cursor cur;
  for (std::size_t j = 0; j < m; ++j) {
    cur = index.advance(cur, index.token_id(summary.tokens[j].norm));
    ending[j] = cur;
  }

  LexicalAlignment out;
  // A span ending at j is maximal iff it is the longest one ending there
  // and the longest one ending at j+1 does not extend it.
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t len = ending[j].length;
    if (len == 0) continue;
    if (j + 1 < m && ending[j + 1].length == len + 1) continue;
    if (len < cfg.min_n) continue;
    const Span span{j + 1 - len, j + 1};
    if (cfg.drop_stopword_only) {
      bool has_content = false;
      for (std::size_t t = span.start_token; t < span.end_token && !has_content; ++t) {
        has_content = summary.tokens[t].is_content();
      }
      if (!has_content) continue;
    }
    out.matches.push_back(LexMatch{span, index.occurrences(ending[j].state, len), len});
  }
  // Ends are visited in order and maximal spans never share a start, so
  // matches are already sorted by summary start.

  if (summary.content_token_count() > 0) out.coverage = coverage_fraction(out, summary);
  return out;
}

LexicalAlignment align_lexical(const TokenizedText& source, const TokenizedText& summary,
                               const AlignConfig& cfg) {
  return align_lexical(SourceIndex(source), summary, cfg);
}

double coverage_fraction(const LexicalAlignment& alignment, const TokenizedText& summary) {
  const std::size_t content = summary.content_token_count();
  if (content == 0) throw NoContentTokens("summary has no content tokens");
  std::vector<bool> covered(summary.size(), false);
  for (const auto& m : alignment.matches) {
    for (std::size_t t = m.summary_span.start_token; t < m.summary_span.end_token; ++t) {
      covered[t] = true;
    }
  }
  std::size_t hit = 0;
  for (std::size_t t = 0; t < summary.size(); ++t) {
    if (covered[t] && summary.tokens[t].is_content()) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(content);
}

}  // namespace sumalign
