#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ctxalign::text {

/// ASCII lowercase (reports and vocabularies are treated as ASCII-cased UTF-8;
/// bytes outside A-Z pass through).
std::string to_lower(std::string_view s);

/// Word characters are letters and digits; everything else delimits words.
bool is_word_char(char c);

/// Byte offsets of whole-word occurrences of `term` in `text`, case-insensitive.
/// Multi-word terms match literally across their single spaces; the boundary
/// rule applies at both ends of the full phrase.
std::vector<std::size_t> find_whole_word(std::string_view text, std::string_view term);

/// Occurrence count of `term` in `text`, whole-word, case-insensitive.
std::size_t count_whole_word(std::string_view text, std::string_view term);

bool contains_whole_word(std::string_view text, std::string_view term);

/// Whitespace-delimited tokens (the evidence-length convention).
std::vector<std::string> whitespace_tokens(std::string_view s);

std::size_t word_count(std::string_view s);

/// Lowercase, strip ASCII punctuation, split on whitespace.
std::vector<std::string> match_tokens(std::string_view s);

/// Trims ASCII whitespace at both ends and collapses internal runs to one space.
std::string normalize_spaces(std::string_view s);

}  // namespace ctxalign::text
