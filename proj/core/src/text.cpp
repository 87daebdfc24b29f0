#include "ctxalign/text.hpp"

#include <cctype>

namespace ctxalign::text {

namespace {

char lower_char(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = lower_char(c);
  return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::vector<std::size_t> find_whole_word(std::string_view text, std::string_view term) {
  std::vector<std::size_t> hits;
  if (term.empty() || term.size() > text.size()) return hits;
  const std::string hay = to_lower(text);
  const std::string needle = to_lower(term);
  std::size_t pos = 0;
  while ((pos = hay.find(needle, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !is_word_char(hay[pos - 1]);
    const std::size_t end = pos + needle.size();
    const bool right_ok = end == hay.size() || !is_word_char(hay[end]);
    if (left_ok && right_ok) hits.push_back(pos);
    ++pos;
  }
  return hits;
}

std::size_t count_whole_word(std::string_view text, std::string_view term) {
  return find_whole_word(text, term).size();
}

bool contains_whole_word(std::string_view text, std::string_view term) {
  return !find_whole_word(text, term).empty();
}

std::vector<std::string> whitespace_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) tokens.emplace_back(s.substr(start, i - start));
  }
  return tokens;
}

std::size_t word_count(std::string_view s) { return whitespace_tokens(s).size(); }

std::vector<std::string> match_tokens(std::string_view s) {
  std::string cleaned;
  cleaned.reserve(s.size());
  for (char c : s) {
    if (std::ispunct(static_cast<unsigned char>(c))) continue;
    cleaned.push_back(lower_char(c));
  }
  return whitespace_tokens(cleaned);
}

std::string normalize_spaces(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace ctxalign::text
