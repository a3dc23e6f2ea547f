#include "twin/nlp.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

#include "twin/error.hpp"

namespace twin {

namespace {

constexpr std::array<std::string_view, 22> kDateWords{
    "january", "february", "march", "april", "may",  "june", "july", "august", "september", "october", "november",
    "december", "jan",     "feb",   "mar",   "apr",  "jun",  "jul",  "aug",    "sep",       "oct",     "nov"};

constexpr std::array<std::string_view, 11> kNounSuffixes{"tion", "sion", "ment", "ness", "ity",  "ship",
                                                         "ism",  "ance", "ence", "hood", "ology"};

bool has_digit(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool has_inner_capital(std::string_view s) {
  return std::any_of(s.begin() + (s.empty() ? 0 : 1), s.end(), [](unsigned char c) { return std::isupper(c) != 0; });
}

bool looks_like_noun(std::string_view lower) {
  if (lower.size() < 6) {
    return false;
  }
  return std::any_of(kNounSuffixes.begin(), kNounSuffixes.end(),
                     [&](std::string_view suffix) { return lower.ends_with(suffix); });
}

bool is_keyword_token(const Token& token) {
  if (has_inner_capital(token.surface) || has_digit(token.lower)) {
    return true;
  }
  if (!token.sentence_initial && std::isupper(static_cast<unsigned char>(token.surface.front()))) {
    return true;
  }
  if (std::find(kDateWords.begin(), kDateWords.end(), token.lower) != kDateWords.end()) {
    return true;
  }
  return looks_like_noun(token.lower);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Collapses runs of a repeated character ("yaaaas" -> "yas").
std::string squeeze(std::string_view s) {
  std::string out;
  for (const char c : s) {
    if (out.empty() || out.back() != c) {
      out.push_back(c);
    }
  }
  return out;
}

const std::unordered_map<std::string, std::string>& emotion_lexicon() {
  static const auto table = [] {
    const std::vector<std::pair<std::string_view, std::vector<std::string_view>>> groups{
        {"frustration", {"ugh", "frustrated", "frustrating", "annoyed", "annoying", "stuck", "argh"}},
        {"anger", {"angry", "mad", "furious", "hate", "pissed"}},
        {"sadness", {"sad", "bummed", "lonely", "miserable"}},
        {"disappointment", {"disappointed", "disappointing", "meh"}},
        {"nervousness", {"stressed", "nervous", "anxious", "worried"}},
        {"joy", {"hyped", "yaaas", "yay", "happy", "awesome", "amazing", "stoked", "lit"}},
        {"excitement", {"excited", "exciting", "pumped", "thrilled"}},
        {"love", {"love", "loving", "adore"}},
        {"gratitude", {"thanks", "thank", "grateful"}},
    };
    std::unordered_map<std::string, std::string> out;
    for (const auto& [label, words] : groups) {
      for (const auto w : words) {
        out.emplace(squeeze(w), std::string(label));
      }
    }
    return out;
  }();
  return table;
}

const std::map<std::string, std::vector<std::string>, std::less<>>& topic_terms() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> table{
      {"sports",
       {"sport", "gym", "football", "soccer", "lifting", "workout", "training", "running", "match", "team",
        "basketball", "tennis", "fitness", "exercise", "squat"}},
      {"cooking", {"cook", "recipe", "kitchen", "bake", "baking", "dinner", "meal", "food"}},
      {"interests",
       {"series", "show", "watch", "episode", "music", "band", "concert", "hobby", "movie", "book", "reading",
        "punk", "game", "thriller"}},
      {"plans",
       {"plan", "tomorrow", "tonight", "weekend", "next", "going", "tickets", "march", "soon", "later",
        "schedule", "meet", "upcoming"}},
      {"health",
       {"gym", "sleep", "tired", "workout", "heart", "stress", "sick", "doctor", "health", "exercise", "energy",
        "rest"}},
      {"relationships",
       {"friend", "bro", "dude", "family", "girlfriend", "boyfriend", "together", "miss", "buddy", "mate"}},
      {"work",
       {"work", "project", "job", "code", "coding", "bugs", "bug", "deadline", "office", "boss", "meeting",
        "logic", "chatbot", "agent"}},
  };
  return table;
}

bool term_matches(std::string_view token, std::string_view term) {
  if (token == term) {
    return true;
  }
  if (token.size() >= 4 && term.size() >= 4) {
    return token.starts_with(term) || term.starts_with(token);
  }
  return false;
}

}  // namespace

bool TokenAnalysis::is_keyword(std::string_view token) const {
  return std::find(keywords.begin(), keywords.end(), token) != keywords.end();
}

TokenAnalysis extract_keywords(std::string_view text, const StopwordSet& stopwords) {
  TokenAnalysis analysis;
  const auto tokens = tokenize(text);
  std::set<std::string> seen_keywords;
  for (const auto& token : tokens) {
    analysis.tokens.push_back(token.lower);
    const bool keyword = !stopwords.contains(token.lower) && is_keyword_token(token);
    if (keyword && seen_keywords.insert(token.lower).second) {
      analysis.keywords.push_back(token.lower);
    }
  }
  analysis.weights.reserve(analysis.tokens.size());
  for (const auto& t : analysis.tokens) {
    analysis.weights.push_back(seen_keywords.contains(t) ? kKeywordWeight : kPlainTokenWeight);
  }
  return analysis;
}

bool is_negative_affect(std::string_view label) {
  static const std::set<std::string, std::less<>> negative{
      "anger",   "annoyance", "frustration", "sadness", "disappointment", "nervousness",
      "fear",    "grief",     "disgust",     "remorse", "embarrassment",  "disapproval"};
  return negative.contains(label);
}

StubEmbedder::StubEmbedder(std::size_t dim, std::uint64_t seed, StopwordSet stopwords)
    : dim_(dim), seed_(seed), stopwords_(std::move(stopwords)) {
  if (dim_ == 0) {
    throw Error(ErrorCode::InvariantViolation, "embedding dimension must be positive");
  }
}

std::vector<double> StubEmbedder::token_vector(std::string_view token) const {
  std::mt19937_64 gen(fnv1a(token) ^ seed_);
  std::vector<double> v(dim_);
  double sq = 0.0;
  for (auto& x : v) {
    // top 53 bits -> [0,1) -> [-1,1)
    x = static_cast<double>(gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    sq += x * x;
  }
  const double n = std::sqrt(sq);
  for (auto& x : v) {
    x /= n;
  }
  return v;
}

Embedding StubEmbedder::embed(std::string_view text) const {
  if (trim(text).empty()) {
    throw Error(ErrorCode::EmptyText, "cannot embed blank text");
  }
  const auto analysis = extract_keywords(text, stopwords_);

  // distinct tokens, first occurrence order
  std::vector<std::pair<std::string, double>> terms;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < analysis.tokens.size(); ++i) {
    const auto& t = analysis.tokens[i];
    if (!stopwords_.contains(t) && seen.insert(t).second) {
      terms.emplace_back(t, analysis.weights[i]);
    }
  }
  if (terms.empty()) {
    for (std::size_t i = 0; i < analysis.tokens.size(); ++i) {
      if (seen.insert(analysis.tokens[i]).second) {
        terms.emplace_back(analysis.tokens[i], analysis.weights[i]);
      }
    }
  }
  if (terms.empty()) {
    throw Error(ErrorCode::EmptyText, "text has no embeddable tokens");
  }

  std::vector<double> acc(dim_, 0.0);
  for (const auto& [term, weight] : terms) {
    const auto v = token_vector(term);
    for (std::size_t i = 0; i < dim_; ++i) {
      acc[i] += weight * v[i];
    }
  }
  double sq = 0.0;
  for (const double x : acc) {
    sq += x * x;
  }
  const double n = std::sqrt(sq);
  Embedding out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    out[i] = static_cast<float>(acc[i] / n);
  }
  return out;
}

std::vector<EmotionAnnotation> StubEmotionClassifier::classify_emotion(std::string_view text) const {
  const auto& lexicon = emotion_lexicon();
  std::map<std::string, int> hits;
  for (const auto& token : tokenize(text)) {
    const auto it = lexicon.find(squeeze(token.lower));
    if (it != lexicon.end()) {
      ++hits[it->second];
    }
  }
  std::vector<EmotionAnnotation> out;
  for (const auto& [label, count] : hits) {
    out.push_back({label, std::min(1.0, 0.6 + 0.15 * (count - 1))});
  }
  if (out.empty()) {
    out.push_back({"neutral", 1.0});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.confidence > b.confidence; });
  return out;
}

StubZeroShotClassifier::StubZeroShotClassifier(StopwordSet stopwords) : stopwords_(std::move(stopwords)) {}

std::vector<std::string> StubZeroShotClassifier::label_terms(std::string_view label) const {
  std::vector<std::string> terms;
  for (const auto& token : tokenize(label)) {
    if (!stopwords_.contains(token.lower)) {
      terms.push_back(token.lower);
    }
  }
  const auto& table = topic_terms();
  if (const auto it = table.find(to_lower(label)); it != table.end()) {
    terms.insert(terms.end(), it->second.begin(), it->second.end());
  }
  return terms;
}

std::vector<TopicScore> StubZeroShotClassifier::zero_shot(std::string_view text,
                                                          std::span<const std::string> labels) const {
  if (labels.empty()) {
    throw Error(ErrorCode::EmptyLabelSet, "zero-shot classification needs at least one label");
  }
  std::vector<std::string> content;
  for (const auto& token : tokenize(text)) {
    if (!stopwords_.contains(token.lower)) {
      content.push_back(token.lower);
    }
  }
  std::vector<TopicScore> out;
  out.reserve(labels.size());
  for (const auto& label : labels) {
    const auto terms = label_terms(label);
    std::size_t matched = 0;
    for (const auto& token : content) {
      if (std::any_of(terms.begin(), terms.end(), [&](const std::string& t) { return term_matches(token, t); })) {
        ++matched;
      }
    }
    const double score = content.empty() ? 0.0 : static_cast<double>(matched) / static_cast<double>(content.size());
    out.push_back({label, score});
  }
  std::sort(out.begin(), out.end(), [](const TopicScore& a, const TopicScore& b) {
    if (a.score != b.score) {
      return a.score > b.score;
    }
    return a.label < b.label;
  });
  return out;
}

NlpAdapters NlpAdapters::stub(std::size_t dim, std::uint64_t seed) {
  NlpAdapters adapters;
  adapters.embedder = std::make_shared<StubEmbedder>(dim, seed, adapters.stopwords);
  adapters.emotion = std::make_shared<StubEmotionClassifier>();
  adapters.zero_shot = std::make_shared<StubZeroShotClassifier>(adapters.stopwords);
  return adapters;
}

}  // namespace twin
