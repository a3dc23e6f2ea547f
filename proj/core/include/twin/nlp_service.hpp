#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "twin/nlp.hpp"

namespace twin {

// Remote text-analysis service. Requests are
//   POST <url>  {"task":"embed"|"emotion"|"zero_shot","text":...,"labels":[...]}
// answered by {"values":[...]} for embed and {"labels":[{"label","score"}]}
// for the classifiers.
struct NlpServiceConfig {
  std::string url;  // e.g. http://127.0.0.1:8090/analyze
  std::chrono::milliseconds timeout{2000};
  bool fallback_to_stub = true;
};

class NlpServiceClient {
 public:
  explicit NlpServiceClient(NlpServiceConfig config);
  ~NlpServiceClient();

  const NlpServiceConfig& config() const noexcept { return config_; }

  // Raw request/response as JSON text. Throws BackendUnavailable or Timeout.
  std::string post(const std::string& body) const;

 private:
  NlpServiceConfig config_;
  std::string host_;
  std::string path_;
};

class ServiceEmbedder final : public Embedder {
 public:
  ServiceEmbedder(std::shared_ptr<const NlpServiceClient> client, std::shared_ptr<const Embedder> fallback);
  std::size_t dimension() const override { return fallback_->dimension(); }
  Embedding embed(std::string_view text) const override;

 private:
  std::shared_ptr<const NlpServiceClient> client_;
  std::shared_ptr<const Embedder> fallback_;
};

class ServiceEmotionClassifier final : public EmotionClassifier {
 public:
  ServiceEmotionClassifier(std::shared_ptr<const NlpServiceClient> client,
                           std::shared_ptr<const EmotionClassifier> fallback);
  std::vector<EmotionAnnotation> classify_emotion(std::string_view text) const override;

 private:
  std::shared_ptr<const NlpServiceClient> client_;
  std::shared_ptr<const EmotionClassifier> fallback_;
};

class ServiceZeroShotClassifier final : public ZeroShotClassifier {
 public:
  ServiceZeroShotClassifier(std::shared_ptr<const NlpServiceClient> client,
                            std::shared_ptr<const ZeroShotClassifier> fallback);
  std::vector<TopicScore> zero_shot(std::string_view text, std::span<const std::string> labels) const override;

 private:
  std::shared_ptr<const NlpServiceClient> client_;
  std::shared_ptr<const ZeroShotClassifier> fallback_;
};

// Service-backed adapters over stub fallbacks of the given dimension/seed.
NlpAdapters make_service_adapters(const NlpServiceConfig& config, std::size_t dim = 256,
                                  std::uint64_t seed = kDefaultStubSeed);

}  // namespace twin
