#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace twin {

using StopwordSet = std::unordered_set<std::string>;

struct Token {
  std::string lower;
  std::string surface;
  bool sentence_initial = false;
};

// Splits on anything that is not an ASCII letter or digit.
std::vector<Token> tokenize(std::string_view text);

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);
bool contains_ci(std::string_view haystack, std::string_view needle);

// Bundled 175-word English list.
const StopwordSet& default_stopwords();

// Lowercase hyphen-joined non-stopword tokens, at most `max_tokens` of them.
// Used to derive readable routing tags from free text.
std::string slug(std::string_view text, const StopwordSet& stopwords, std::size_t max_tokens = 6);

}  // namespace twin
