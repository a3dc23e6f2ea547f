#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "twin/text.hpp"
#include "twin/types.hpp"

namespace twin {

inline constexpr double kKeywordWeight = 1.5;
inline constexpr double kPlainTokenWeight = 1.0;
inline constexpr std::uint64_t kDefaultStubSeed = 0x7477696eULL;

// Query analysis: lowercased tokens in order, the keyword subset (unique, in
// order of first appearance) and one weight per token.
struct TokenAnalysis {
  std::vector<std::string> tokens;
  std::vector<std::string> keywords;
  std::vector<double> weights;

  bool is_keyword(std::string_view token) const;
};

// Keyword heuristic over non-stopword tokens: capitalized mid-sentence,
// inner capitals (BandZ, AI), numerals and month names, or a noun suffix.
TokenAnalysis extract_keywords(std::string_view text, const StopwordSet& stopwords);

bool is_negative_affect(std::string_view label);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  // Unit-norm embedding. Throws EmptyText for blank input.
  virtual Embedding embed(std::string_view text) const = 0;
};

class EmotionClassifier {
 public:
  virtual ~EmotionClassifier() = default;
  // At least one annotation, sorted by descending confidence.
  virtual std::vector<EmotionAnnotation> classify_emotion(std::string_view text) const = 0;
};

class ZeroShotClassifier {
 public:
  virtual ~ZeroShotClassifier() = default;
  // One score in [0,1] per label, sorted descending (ties by label).
  // Throws EmptyLabelSet.
  virtual std::vector<TopicScore> zero_shot(std::string_view text, std::span<const std::string> labels) const = 0;
};

// Hashing embedder: every token maps to a pseudo-random unit vector drawn
// from a generator seeded by (token, seed); a text maps to the
// keyword-weighted sum of its distinct non-stopword token vectors,
// renormalized.
class StubEmbedder final : public Embedder {
 public:
  explicit StubEmbedder(std::size_t dim = 256, std::uint64_t seed = kDefaultStubSeed,
                        StopwordSet stopwords = default_stopwords());

  std::size_t dimension() const override { return dim_; }
  Embedding embed(std::string_view text) const override;

  std::vector<double> token_vector(std::string_view token) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  StopwordSet stopwords_;
};

// Lexicon lookup; ("neutral", 1.0) when nothing matches.
class StubEmotionClassifier final : public EmotionClassifier {
 public:
  std::vector<EmotionAnnotation> classify_emotion(std::string_view text) const override;
};

// Scores a label by the share of the text's content tokens that match the
// label or its bundled related terms.
class StubZeroShotClassifier final : public ZeroShotClassifier {
 public:
  explicit StubZeroShotClassifier(StopwordSet stopwords = default_stopwords());
  std::vector<TopicScore> zero_shot(std::string_view text, std::span<const std::string> labels) const override;

  std::vector<std::string> label_terms(std::string_view label) const;

 private:
  StopwordSet stopwords_;
};

struct NlpAdapters {
  std::shared_ptr<const Embedder> embedder;
  std::shared_ptr<const EmotionClassifier> emotion;
  std::shared_ptr<const ZeroShotClassifier> zero_shot;
  StopwordSet stopwords = default_stopwords();

  static NlpAdapters stub(std::size_t dim = 256, std::uint64_t seed = kDefaultStubSeed);
};

}  // namespace twin
