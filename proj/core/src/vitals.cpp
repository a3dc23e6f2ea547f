#include "twin/vitals.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>

#include "twin/dialogue.hpp"
#include "twin/error.hpp"
#include "twin/text.hpp"

namespace twin {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(trim(field));
  return out;
}

const char* metric_label(VitalMetric m) {
  switch (m) {
    case VitalMetric::HeartRate: return "Heart rate";
    case VitalMetric::Stress: return "Stress level";
    case VitalMetric::Sleep: return "Sleep quality";
    case VitalMetric::Activity: return "Activity level";
  }
  return "Vital";
}

bool aligned(Timestamp ts, VitalPeriod period) {
  return ts == (period == VitalPeriod::Daily ? floor_to_day(ts) : floor_to_hour(ts));
}

std::string period_label(Timestamp start, VitalPeriod period) {
  return period == VitalPeriod::Daily ? format_date(start) : format_rfc3339(start).substr(0, 13);
}

}  // namespace

void VitalsConfig::validate() const {
  if (!(z_threshold > 0.0) || !std::isfinite(z_threshold)) {
    throw Error(ErrorCode::ConfigError, "z_threshold must be positive");
  }
  if (min_samples < 2) {
    throw Error(ErrorCode::ConfigError, "min_samples must be at least 2");
  }
  if (baseline_window.count() <= 0 || eval_window.count() <= 0 || retention.count() <= 0) {
    throw Error(ErrorCode::ConfigError, "vitals windows must be positive");
  }
}

std::vector<VitalSample> parse_vitals_csv(std::istream& in) {
  std::vector<VitalSample> out;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) {
      continue;
    }
    const auto fields = split_csv(line);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"timestamp", "metric", "value"}) {
        throw Error(ErrorCode::ParseError, "expected header 'timestamp,metric,value'", line_no);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw Error(ErrorCode::ParseError, "expected 3 fields", line_no);
    }
    VitalSample s;
    try {
      s.timestamp = parse_rfc3339(fields[0]);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, e.what(), line_no);
    }
    const auto metric = parse_metric(fields[1]);
    if (!metric) {
      throw Error(ErrorCode::ParseError, "unknown metric '" + fields[1] + "'", line_no);
    }
    s.metric = *metric;
    const auto& v = fields[2];
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, s.value);
    if (ec != std::errc{} || ptr != end) {
      throw Error(ErrorCode::ParseError, "bad value '" + v + "'", line_no);
    }
    if (!std::isfinite(s.value)) {
      throw Error(ErrorCode::NonFiniteValue, "non-finite value '" + v + "'", line_no);
    }
    out.push_back(s);
  }
  if (!header_seen) {
    throw Error(ErrorCode::ParseError, "missing header 'timestamp,metric,value'", line_no == 0 ? 1 : line_no);
  }
  return out;
}

VitalsPipeline::VitalsPipeline(MemoryStore& store, NlpAdapters adapters, std::shared_ptr<const LlmGateway> gateway,
                               VitalsConfig config)
    : store_(store), adapters_(std::move(adapters)), gateway_(std::move(gateway)), config_(std::move(config)) {
  config_.validate();
  if (!gateway_) {
    throw Error(ErrorCode::ConfigError, "vitals pipeline needs a language-model gateway");
  }
}

std::size_t VitalsPipeline::ingest_samples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoFailure, "cannot open vitals file '" + path.string() + "'");
  }
  return ingest_samples(in);
}

std::size_t VitalsPipeline::ingest_samples(std::istream& in) {
  const auto samples = parse_vitals_csv(in);
  return store_.add_vitals(samples);
}

std::optional<DeviationEvent> VitalsPipeline::evaluate(VitalMetric metric, Timestamp start, Timestamp end) const {
  const auto window = store_.vitals_between(metric, start, end);
  if (window.empty()) {
    return std::nullopt;
  }
  const auto baseline = store_.vitals_between(metric, start - config_.baseline_window, start);
  if (baseline.size() < config_.min_samples) {
    throw Error(ErrorCode::InsufficientBaseline, std::to_string(baseline.size()) + " baseline samples for " +
                                                     std::string(to_string(metric)) + ", need " +
                                                     std::to_string(config_.min_samples));
  }

  DeviationEvent ev;
  ev.metric = metric;
  ev.window_start = start;
  ev.window_end = end;
  ev.baseline_samples = baseline.size();

  double sum = 0.0;
  for (const auto& s : window) {
    sum += s.value;
  }
  ev.observed = sum / static_cast<double>(window.size());

  double bsum = 0.0;
  for (const auto& s : baseline) {
    bsum += s.value;
  }
  const auto n = static_cast<double>(baseline.size());
  ev.baseline_mean = bsum / n;
  double ss = 0.0;
  for (const auto& s : baseline) {
    const double d = s.value - ev.baseline_mean;
    ss += d * d;
  }
  ev.baseline_std = std::sqrt(ss / (n - 1.0));

  if (ev.baseline_std > 0.0) {
    ev.z = (ev.observed - ev.baseline_mean) / ev.baseline_std;
  }
  if (const auto it = config_.floors.find(metric); it != config_.floors.end()) {
    ev.floor_tripped = ev.observed > it->second;
  }
  const bool significant = ev.baseline_std > 0.0 && std::abs(ev.z) >= config_.z_threshold;
  if (!significant && !ev.floor_tripped) {
    return std::nullopt;
  }
  return ev;
}

Embedding VitalsPipeline::embed_or_empty(const std::string& text, std::map<std::string, std::string>& metadata) const {
  try {
    return adapters_.embedder->embed(text);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BackendUnavailable && e.code() != ErrorCode::Timeout) {
      throw;
    }
    metadata["embedding"] = "pending";
    return {};
  }
}

MemoryId VitalsPipeline::store_event(DeviationEvent& ev) {
  const auto start = format_rfc3339(ev.window_start);
  const auto metric = std::string(to_string(ev.metric));
  const auto existing = store_.memories_where([&](const MemoryRecord& r) {
    if (r.category != Category::VitalEvent) {
      return false;
    }
    const auto m = r.metadata.find("vital_metric");
    const auto w = r.metadata.find("window_start");
    return m != r.metadata.end() && w != r.metadata.end() && m->second == metric && w->second == start;
  });
  if (!existing.empty()) {
    return existing.front().memory_id;
  }

  const auto window = store_.vitals_between(ev.metric, ev.window_start, ev.window_end);
  char buf[320];
  std::snprintf(buf, sizeof(buf),
                "%s %s: averaged %.1f between %s and %s UTC against a 24h baseline of %.1f (sd %.2f, z %.2f).",
                metric_label(ev.metric), ev.observed > ev.baseline_mean ? "above usual" : "below usual", ev.observed,
                format_minute(ev.window_start).c_str(), format_minute(ev.window_end).substr(11).c_str(),
                ev.baseline_mean, ev.baseline_std, ev.z);

  MemoryRecord record;
  record.stream = Stream::MemoryStream;
  record.category = Category::VitalEvent;
  record.content = buf;
  record.created_at = window.empty() ? ev.window_start : window.back().timestamp;
  record.last_accessed_at = record.created_at;
  record.source = Source::VitalsPipeline;
  record.metadata["vital_metric"] = metric;
  record.metadata["window_start"] = start;
  record.metadata["window_end"] = format_rfc3339(ev.window_end);
  if (ev.floor_tripped) {
    record.metadata["floor_tripped"] = "true";
  }
  record.embedding = embed_or_empty(record.content, record.metadata);
  record.importance_raw = gateway_->score_importance({record.content, importance_context(store_)});
  return store_.insert_memory(std::move(record));
}

std::vector<DeviationEvent> VitalsPipeline::detect_locked(VitalMetric metric, Timestamp start, Timestamp end) {
  auto ev = evaluate(metric, start, end);
  if (!ev) {
    return {};
  }
  ev->memory_id = store_event(*ev);
  return {*ev};
}

std::vector<DeviationEvent> VitalsPipeline::detect_deviations(VitalMetric metric, Timestamp now) {
  std::lock_guard lock(metric_jobs_[static_cast<std::size_t>(metric)]);
  return detect_locked(metric, now - config_.eval_window, now);
}

std::vector<DeviationEvent> VitalsPipeline::scan(VitalMetric metric, Timestamp from, Timestamp to) {
  std::lock_guard lock(metric_jobs_[static_cast<std::size_t>(metric)]);
  std::vector<DeviationEvent> out;
  for (auto start = from; start + config_.eval_window <= to; start += config_.eval_window) {
    try {
      auto found = detect_locked(metric, start, start + config_.eval_window);
      out.insert(out.end(), found.begin(), found.end());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientBaseline) {
        throw;
      }
    }
  }
  return out;
}

std::vector<MemoryId> VitalsPipeline::rollup(VitalPeriod period, Timestamp from, Timestamp to, Timestamp now) {
  if (!aligned(from, period) || !aligned(to, period) || to < from) {
    throw Error(ErrorCode::PreconditionViolation, "rollup range must be aligned to " +
                                                      std::string(period == VitalPeriod::Daily ? "days" : "hours"));
  }
  // A rollup reads every metric, so it excludes all metric jobs.
  std::scoped_lock lock(metric_jobs_[0], metric_jobs_[1], metric_jobs_[2], metric_jobs_[3]);

  const std::chrono::milliseconds step =
      period == VitalPeriod::Daily ? std::chrono::milliseconds(kMillisPerDay) : std::chrono::hours(1);
  const std::string period_name(to_string(period));
  std::vector<MemoryId> ids;
  for (auto start = from; start < to; start += step) {
    const auto label = period_label(start, period);
    const auto existing = store_.memories_where([&](const MemoryRecord& r) {
      if (r.category != Category::VitalSummary) {
        return false;
      }
      const auto p = r.metadata.find("vital_period");
      const auto b = r.metadata.find("bucket");
      return p != r.metadata.end() && b != r.metadata.end() && p->second == period_name && b->second == label;
    });
    if (!existing.empty()) {
      ids.push_back(existing.front().memory_id);
      continue;
    }
    const auto samples = store_.vitals_between(start, start + step);
    if (samples.empty()) {
      continue;
    }
    MemoryRecord record;
    record.stream = Stream::MemoryStream;
    record.category = Category::VitalSummary;
    record.content = gateway_->summarize_vitals(samples, period);
    record.created_at = samples.back().timestamp;
    record.last_accessed_at = record.created_at;
    record.source = Source::VitalsPipeline;
    record.metadata["vital_period"] = period_name;
    record.metadata["bucket"] = label;
    record.embedding = embed_or_empty(record.content, record.metadata);
    record.importance_raw = gateway_->score_importance({record.content, importance_context(store_)});
    ids.push_back(store_.insert_memory(std::move(record)));
  }
  if (period == VitalPeriod::Daily) {
    store_.purge_vitals_before(now - config_.retention);
  }
  return ids;
}

}  // namespace twin
