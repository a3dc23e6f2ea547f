#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "twin/llm_gateway.hpp"
#include "twin/memory_store.hpp"
#include "twin/nlp.hpp"

namespace twin {

struct VitalsConfig {
  double z_threshold = 2.0;
  std::size_t min_samples = 20;
  std::chrono::milliseconds baseline_window{std::chrono::hours(24)};
  std::chrono::milliseconds eval_window{std::chrono::hours(1)};
  // Window mean above the floor is an event regardless of z.
  std::map<VitalMetric, double> floors{{VitalMetric::HeartRate, 120.0}};
  std::chrono::milliseconds retention{std::chrono::hours(24 * 7)};

  // Throws ConfigError.
  void validate() const;
};

struct DeviationEvent {
  VitalMetric metric = VitalMetric::HeartRate;
  Timestamp window_start{};
  Timestamp window_end{};
  double observed = 0.0;  // mean over the evaluation window
  double baseline_mean = 0.0;
  double baseline_std = 0.0;  // sample standard deviation
  std::size_t baseline_samples = 0;
  // Zero when the baseline has no variance.
  double z = 0.0;
  bool floor_tripped = false;
  std::optional<MemoryId> memory_id;
};

// CSV with header "timestamp,metric,value". Throws ParseError(line) and
// NonFiniteValue(line).
std::vector<VitalSample> parse_vitals_csv(std::istream& in);

// Stages raw wearable samples and promotes only deviations and periodic
// summaries into the memory stream. Detection and rollup jobs are mutually
// exclusive per metric.
class VitalsPipeline {
 public:
  VitalsPipeline(MemoryStore& store, NlpAdapters adapters, std::shared_ptr<const LlmGateway> gateway,
                 VitalsConfig config = {});

  const VitalsConfig& config() const noexcept { return config_; }

  // Returns the number of new samples; rows already staged are skipped.
  std::size_t ingest_samples(const std::filesystem::path& path);
  std::size_t ingest_samples(std::istream& in);

  // Scores one evaluation window [start, end) against the trailing baseline
  // [start - baseline_window, start). Does not write. nullopt when the
  // window has no samples or nothing significant happened. Throws
  // InsufficientBaseline.
  std::optional<DeviationEvent> evaluate(VitalMetric metric, Timestamp start, Timestamp end) const;

  // Evaluates [now - eval_window, now) and stores a VitalEvent memory for a
  // significant deviation.
  std::vector<DeviationEvent> detect_deviations(VitalMetric metric, Timestamp now);

  // Runs detection over consecutive evaluation windows in [from, to).
  // Windows without enough baseline are skipped.
  std::vector<DeviationEvent> scan(VitalMetric metric, Timestamp from, Timestamp to);

  // One VitalSummary per period in [from, to) that has samples. Re-running
  // over the same range reuses existing summaries. A daily rollup then purges
  // raw samples older than now - retention. Throws PreconditionViolation
  // when the range is not aligned to the period.
  std::vector<MemoryId> rollup(VitalPeriod period, Timestamp from, Timestamp to, Timestamp now);

 private:
  std::vector<DeviationEvent> detect_locked(VitalMetric metric, Timestamp start, Timestamp end);
  MemoryId store_event(DeviationEvent& event);
  Embedding embed_or_empty(const std::string& text, std::map<std::string, std::string>& metadata) const;

  MemoryStore& store_;
  NlpAdapters adapters_;
  std::shared_ptr<const LlmGateway> gateway_;
  VitalsConfig config_;

  std::array<std::mutex, 4> metric_jobs_;
};

}  // namespace twin
