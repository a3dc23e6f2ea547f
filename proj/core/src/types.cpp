#include "twin/types.hpp"

#include <array>
#include <cmath>
#include <utility>

namespace twin {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view name) {
  for (const auto& [value, text] : table) {
    if (text == name) {
      return value;
    }
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
  for (const auto& [v, text] : table) {
    if (v == value) {
      return text;
    }
  }
  return "unknown";
}

constexpr std::array<std::pair<Stream, std::string_view>, 2> kStreams{{
    {Stream::ProfileStream, "ProfileStream"},
    {Stream::MemoryStream, "MemoryStream"},
}};

constexpr std::array<std::pair<Category, std::string_view>, 12> kCategories{{
    {Category::UserProfile, "UserProfile"},
    {Category::Interests, "Interests"},
    {Category::Preferences, "Preferences"},
    {Category::Knowledge, "Knowledge"},
    {Category::BehavioralTraits, "BehavioralTraits"},
    {Category::Goals, "Goals"},
    {Category::HistoricalData, "HistoricalData"},
    {Category::SocialContactFact, "SocialContactFact"},
    {Category::Dialogue, "Dialogue"},
    {Category::Reflection, "Reflection"},
    {Category::VitalEvent, "VitalEvent"},
    {Category::VitalSummary, "VitalSummary"},
}};

constexpr std::array<std::pair<Source, std::string_view>, 5> kSources{{
    {Source::ManualInput, "ManualInput"},
    {Source::DialogueLog, "DialogueLog"},
    {Source::VitalsPipeline, "VitalsPipeline"},
    {Source::ReflectionJob, "ReflectionJob"},
    {Source::Import, "Import"},
}};

constexpr std::array<std::pair<VitalMetric, std::string_view>, 4> kMetrics{{
    {VitalMetric::HeartRate, "heart_rate"},
    {VitalMetric::Stress, "stress"},
    {VitalMetric::Sleep, "sleep"},
    {VitalMetric::Activity, "activity"},
}};

constexpr std::array<std::pair<VitalPeriod, std::string_view>, 2> kPeriods{{
    {VitalPeriod::Hourly, "hourly"},
    {VitalPeriod::Daily, "daily"},
}};

}  // namespace

Stream stream_of(Category category) noexcept {
  switch (category) {
    case Category::Dialogue:
    case Category::Reflection:
    case Category::VitalEvent:
    case Category::VitalSummary:
      return Stream::MemoryStream;
    default:
      return Stream::ProfileStream;
  }
}

std::string_view to_string(Stream stream) noexcept { return name_of(kStreams, stream); }
std::string_view to_string(Category category) noexcept { return name_of(kCategories, category); }
std::string_view to_string(Source source) noexcept { return name_of(kSources, source); }
std::string_view to_string(VitalMetric metric) noexcept { return name_of(kMetrics, metric); }
std::string_view to_string(VitalPeriod period) noexcept { return name_of(kPeriods, period); }

std::optional<Stream> parse_stream(std::string_view name) noexcept { return lookup(kStreams, name); }
std::optional<Category> parse_category(std::string_view name) noexcept { return lookup(kCategories, name); }
std::optional<Source> parse_source(std::string_view name) noexcept { return lookup(kSources, name); }
std::optional<VitalMetric> parse_metric(std::string_view name) noexcept { return lookup(kMetrics, name); }
std::optional<VitalPeriod> parse_period(std::string_view name) noexcept { return lookup(kPeriods, name); }

bool MemoryRecord::embedded() const noexcept {
  for (const float x : embedding) {
    if (x != 0.0F) {
      return true;
    }
  }
  return false;
}

double norm(const Embedding& v) noexcept {
  double sum = 0.0;
  for (const float x : v) {
    sum += static_cast<double>(x) * static_cast<double>(x);
  }
  return std::sqrt(sum);
}

double cosine(const Embedding& a, const Embedding& b) noexcept {
  if (a.size() != b.size() || a.empty()) {
    return 0.0;
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    const double y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) {
    return 0.0;
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace twin
