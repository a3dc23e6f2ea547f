#include "twin/text.hpp"

#include <algorithm>
#include <cctype>

namespace twin {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool ends_sentence(char c) { return c == '.' || c == '!' || c == '?' || c == '\n'; }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  bool at_sentence_start = true;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word_char(text[i])) {
      if (ends_sentence(text[i])) {
        at_sentence_start = true;
      }
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < text.size() && is_word_char(text[i])) {
      ++i;
    }
    Token token;
    token.surface = std::string(text.substr(start, i - start));
    token.lower = to_lower(token.surface);
    token.sentence_initial = at_sentence_start;
    at_sentence_start = false;
    tokens.push_back(std::move(token));
  }
  return tokens;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = text.find_last_not_of(" \t\r\n\f\v");
  return std::string(text.substr(first, last - first + 1));
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) {
    return true;
  }
  return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

const StopwordSet& default_stopwords() {
  static const StopwordSet words{
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours", "yourself",
    "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself", "it", "its", "itself",
    "they", "them", "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that",
    "these", "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had",
    "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or", "because", "as",
    "until", "while", "of", "at", "by", "for", "with", "about", "against", "between", "into", "through",
    "during", "before", "after", "above", "below", "to", "from", "up", "down", "in", "out", "on", "off",
    "over", "under", "again", "further", "then", "once", "here", "there", "when", "where", "why", "how",
    "all", "any", "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not",
    "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will", "just", "don",
    "should", "now", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "couldn", "didn", "doesn",
    "hadn", "hasn", "haven", "isn", "ma", "mightn", "mustn", "needn", "shan", "shouldn", "wasn",
    "weren", "won", "wouldn", "also", "would", "could", "get", "got", "im", "ok", "us", "let", "may",
    "might", "must", "shall", "much", "many", "every", "either", "neither", "yet", "though", "since",
    "whose",
  };
  return words;
}

std::string slug(std::string_view text, const StopwordSet& stopwords, std::size_t max_tokens) {
  std::string out;
  std::size_t used = 0;
  for (const auto& token : tokenize(text)) {
    if (used == max_tokens) {
      break;
    }
    if (stopwords.contains(token.lower)) {
      continue;
    }
    if (!out.empty()) {
      out += '-';
    }
    out += token.lower;
    ++used;
  }
  return out;
}

}  // namespace twin
