#include "twin/nlp_service.hpp"

#include <algorithm>
#include <cmath>

#include "http_url.hpp"
#include "httplib.h"
#include "json_codec.hpp"
#include "twin/error.hpp"

namespace twin {

namespace {

json call(const NlpServiceClient& client, const json& request) {
  try {
    return json::parse(client.post(request.dump()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BackendUnavailable, std::string("malformed service reply: ") + e.what());
  }
}

bool recoverable(const Error& e) {
  return e.code() == ErrorCode::BackendUnavailable || e.code() == ErrorCode::Timeout;
}

std::vector<TopicScore> parse_labels(const json& reply) {
  std::vector<TopicScore> out;
  for (const auto& item : reply.at("labels")) {
    TopicScore t{require_string(item, "label"), item.at("score").get<double>()};
    t.score = std::clamp(t.score, 0.0, 1.0);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

NlpServiceClient::NlpServiceClient(NlpServiceConfig config) : config_(std::move(config)) {
  const auto parts = split_url(config_.url);
  host_ = parts.origin;
  path_ = parts.path;
}

NlpServiceClient::~NlpServiceClient() = default;

std::string NlpServiceClient::post(const std::string& body) const {
  httplib::Client client(host_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  const auto res = client.Post(path_, body, "application/json");
  if (!res) {
    if (res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout) {
      throw Error(ErrorCode::Timeout, "NLP service timed out: " + httplib::to_string(res.error()));
    }
    throw Error(ErrorCode::BackendUnavailable, "NLP service unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::BackendUnavailable, "NLP service returned HTTP " + std::to_string(res->status));
  }
  return res->body;
}

ServiceEmbedder::ServiceEmbedder(std::shared_ptr<const NlpServiceClient> client,
                                 std::shared_ptr<const Embedder> fallback)
    : client_(std::move(client)), fallback_(std::move(fallback)) {}

Embedding ServiceEmbedder::embed(std::string_view text) const {
  if (trim(text).empty()) {
    throw Error(ErrorCode::EmptyText, "cannot embed blank text");
  }
  try {
    const auto reply = call(*client_, json{{"task", "embed"}, {"text", text}});
    auto values = reply.at("values").get<std::vector<double>>();
    if (values.size() != fallback_->dimension()) {
      throw Error(ErrorCode::BackendUnavailable, "service embedding has dimension " + std::to_string(values.size()));
    }
    double sq = 0.0;
    for (const double x : values) {
      sq += x * x;
    }
    const double n = std::sqrt(sq);
    if (!std::isfinite(n) || n == 0.0) {
      throw Error(ErrorCode::BackendUnavailable, "service embedding is degenerate");
    }
    Embedding out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [n](double x) { return static_cast<float>(x / n); });
    return out;
  } catch (const Error& e) {
    if (!recoverable(e) || !client_->config().fallback_to_stub) {
      throw;
    }
  } catch (const json::exception& e) {
    if (!client_->config().fallback_to_stub) {
      throw Error(ErrorCode::BackendUnavailable, e.what());
    }
  }
  return fallback_->embed(text);
}

ServiceEmotionClassifier::ServiceEmotionClassifier(std::shared_ptr<const NlpServiceClient> client,
                                                   std::shared_ptr<const EmotionClassifier> fallback)
    : client_(std::move(client)), fallback_(std::move(fallback)) {}

std::vector<EmotionAnnotation> ServiceEmotionClassifier::classify_emotion(std::string_view text) const {
  try {
    const auto labels = parse_labels(call(*client_, json{{"task", "emotion"}, {"text", text}}));
    std::vector<EmotionAnnotation> out;
    for (const auto& l : labels) {
      out.push_back({l.label, l.score});
    }
    if (out.empty()) {
      out.push_back({"neutral", 1.0});
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.confidence > b.confidence; });
    return out;
  } catch (const Error& e) {
    if (!recoverable(e) || !client_->config().fallback_to_stub) {
      throw;
    }
  } catch (const json::exception& e) {
    if (!client_->config().fallback_to_stub) {
      throw Error(ErrorCode::BackendUnavailable, e.what());
    }
  }
  return fallback_->classify_emotion(text);
}

ServiceZeroShotClassifier::ServiceZeroShotClassifier(std::shared_ptr<const NlpServiceClient> client,
                                                     std::shared_ptr<const ZeroShotClassifier> fallback)
    : client_(std::move(client)), fallback_(std::move(fallback)) {}

std::vector<TopicScore> ServiceZeroShotClassifier::zero_shot(std::string_view text,
                                                             std::span<const std::string> labels) const {
  if (labels.empty()) {
    throw Error(ErrorCode::EmptyLabelSet, "zero-shot classification needs at least one label");
  }
  try {
    const std::vector<std::string> label_list(labels.begin(), labels.end());
    auto out = parse_labels(call(*client_, json{{"task", "zero_shot"}, {"text", text}, {"labels", label_list}}));
    std::sort(out.begin(), out.end(), [](const TopicScore& a, const TopicScore& b) {
      return a.score != b.score ? a.score > b.score : a.label < b.label;
    });
    return out;
  } catch (const Error& e) {
    if (!recoverable(e) || !client_->config().fallback_to_stub) {
      throw;
    }
  } catch (const json::exception& e) {
    if (!client_->config().fallback_to_stub) {
      throw Error(ErrorCode::BackendUnavailable, e.what());
    }
  }
  return fallback_->zero_shot(text, labels);
}

NlpAdapters make_service_adapters(const NlpServiceConfig& config, std::size_t dim, std::uint64_t seed) {
  auto stub = NlpAdapters::stub(dim, seed);
  auto client = std::make_shared<const NlpServiceClient>(config);
  NlpAdapters adapters;
  adapters.stopwords = stub.stopwords;
  adapters.embedder = std::make_shared<ServiceEmbedder>(client, stub.embedder);
  adapters.emotion = std::make_shared<ServiceEmotionClassifier>(client, stub.emotion);
  adapters.zero_shot = std::make_shared<ServiceZeroShotClassifier>(client, stub.zero_shot);
  return adapters;
}

}  // namespace twin
