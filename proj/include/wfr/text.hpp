#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wfr {

inline bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

inline char lower_char(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

inline std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(lower_char(c));
  return out;
}

/// Lowercased alphanumeric word runs; every other character separates.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (is_word_char(c)) {
      cur.push_back(lower_char(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

/// Tokens grouped into clause segments. Clause punctuation (.,;:!?) opens a
/// new segment so multi-word phrases never match across it.
inline std::vector<std::vector<std::string>> token_segments(std::string_view text) {
  std::vector<std::vector<std::string>> segments(1);
  std::string cur;
  auto flush_token = [&] {
    if (!cur.empty()) {
      segments.back().push_back(std::move(cur));
      cur.clear();
    }
  };
  for (char c : text) {
    if (is_word_char(c)) {
      cur.push_back(lower_char(c));
    } else {
      flush_token();
      if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?') {
        if (!segments.back().empty()) segments.emplace_back();
      }
    }
  }
  flush_token();
  if (segments.back().empty()) segments.pop_back();
  return segments;
}

/// Lowercase and collapse all whitespace runs to single spaces.
inline std::string normalize_phrase(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty()) pending_space = true;
    } else {
      if (pending_space) {
        out.push_back(' ');
        pending_space = false;
      }
      out.push_back(lower_char(c));
    }
  }
  return out;
}

inline std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

struct SentenceSpan {
  size_t begin = 0;
  size_t end = 0;  // one past the last character, terminator included
};

/// Sentence spans over the raw text. A sentence ends at . ! ? followed by
/// whitespace or end of text; spans cover the whole input in order.
inline std::vector<SentenceSpan> split_sentences(std::string_view text) {
  std::vector<SentenceSpan> spans;
  size_t start = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      bool at_end = (i + 1 == text.size());
      bool before_space = !at_end && std::isspace(static_cast<unsigned char>(text[i + 1]));
      if (at_end || before_space) {
        spans.push_back({start, i + 1});
        start = i + 1;
      }
    }
  }
  if (start < text.size()) spans.push_back({start, text.size()});
  // Drop spans with no word characters ("..." fragments, stray whitespace).
  std::vector<SentenceSpan> kept;
  for (const auto& sp : spans) {
    std::string_view body = text.substr(sp.begin, sp.end - sp.begin);
    bool has_word = false;
    for (char c : body)
      if (is_word_char(c)) {
        has_word = true;
        break;
      }
    if (has_word) kept.push_back(sp);
  }
  return kept;
}

inline std::unordered_map<std::string, long> token_counts(const std::vector<std::string>& tokens) {
  std::unordered_map<std::string, long> counts;
  for (const auto& t : tokens) ++counts[t];
  return counts;
}

}  // namespace wfr
