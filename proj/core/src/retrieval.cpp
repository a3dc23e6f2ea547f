#include "twin/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "json_codec.hpp"

namespace twin {

RecencyParams::RecencyParams() : lambda_creation(-std::log(0.9)), lambda_access(-std::log(0.6)) {}

void RecencyParams::validate() const {
  if (!(lambda_creation > 0.0) || !(lambda_access > 0.0)) {
    throw Error(ErrorCode::InvariantViolation, "decay rates must be positive");
  }
  if (w_creation < 0.0 || w_access < 0.0 || std::abs(w_creation + w_access - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvariantViolation, "recency weights must be non-negative and sum to 1");
  }
}

void RetrievalWeights::validate() const {
  if (!(recency >= 0.0) || !(importance >= 0.0) || !(relevance >= 0.0)) {
    throw Error(ErrorCode::InvariantViolation, "retrieval weights must be non-negative");
  }
  for (const auto& rule : extra_points) {
    if (!(rule.bonus >= 0.0)) {
      throw Error(ErrorCode::InvariantViolation, "extra-point bonuses must be non-negative");
    }
  }
}

double recency_score(double t_creation_days, double t_access_days, const RecencyParams& params) {
  if (!std::isfinite(t_creation_days) || !std::isfinite(t_access_days)) {
    throw Error(ErrorCode::InvariantViolation, "elapsed times must be finite");
  }
  if (t_creation_days < 0.0 || t_access_days < 0.0) {
    throw Error(ErrorCode::NegativeElapsedTime, "elapsed time must be non-negative");
  }
  if (t_access_days > t_creation_days) {
    throw Error(ErrorCode::InvariantViolation, "a memory cannot be accessed before it was created");
  }
  return params.w_creation * std::exp(-params.lambda_creation * t_creation_days) +
         params.w_access * std::exp(-params.lambda_access * t_access_days);
}

double normalize_importance(int raw) {
  if (raw < 0 || raw > 10) {
    throw Error(ErrorCode::OutOfRange, "importance must be in [0,10], got " + std::to_string(raw));
  }
  return static_cast<double>(raw) / 10.0;
}

double clamped_cosine(const Embedding& a, const Embedding& b) noexcept {
  return std::clamp(cosine(a, b), 0.0, 1.0);
}

double relevance_score(std::string_view query, const MemoryRecord& memory, const NlpAdapters& adapters) {
  if (!memory.embedded()) {
    throw Error(ErrorCode::UnembeddedMemory, "memory '" + memory.memory_id.str() + "' has no embedding");
  }
  return clamped_cosine(adapters.embedder->embed(query), memory.embedding);
}

double extra_points(const MemoryRecord& memory, const std::vector<ExtraPointRule>& rules) {
  double bonus = 0.0;
  for (const auto& rule : rules) {
    const bool hit = rule.kind == ExtraMatchKind::Category ? memory.category == rule.category
                                                           : contains_ci(memory.content, rule.keyword);
    if (hit) {
      bonus += rule.bonus;
    }
  }
  return bonus;
}

RetrievalBreakdown score_memory(const MemoryRecord& memory, const Embedding& query_embedding, Timestamp now,
                                const RetrievalWeights& weights, const RecencyParams& params) {
  if (now < memory.created_at || now < memory.last_accessed_at) {
    throw Error(ErrorCode::ClockRegression,
                "query time precedes memory '" + memory.memory_id.str() + "' creation or last access");
  }
  RetrievalBreakdown b;
  b.memory_id = memory.memory_id;
  b.stream = memory.stream;
  const double t_c = elapsed_days(now, memory.created_at);
  const double t_a = elapsed_days(now, memory.last_accessed_at);
  b.recency_creation = std::exp(-params.lambda_creation * t_c);
  b.recency_access = std::exp(-params.lambda_access * t_a);
  b.recency = recency_score(t_c, t_a, params);
  b.importance_norm = normalize_importance(memory.importance_raw);
  b.relevance_norm = clamped_cosine(query_embedding, memory.embedding);
  b.extra = extra_points(memory, weights.extra_points);
  b.total = weights.recency * b.recency + weights.importance * b.importance_norm +
            weights.relevance * b.relevance_norm + b.extra;
  return b;
}

bool ranks_before(const ScoredMemory& a, const ScoredMemory& b) noexcept {
  if (a.breakdown.total != b.breakdown.total) {
    return a.breakdown.total > b.breakdown.total;
  }
  if (a.record.importance_raw != b.record.importance_raw) {
    return a.record.importance_raw > b.record.importance_raw;
  }
  if (a.record.created_at != b.record.created_at) {
    return a.record.created_at > b.record.created_at;
  }
  return a.record.memory_id < b.record.memory_id;
}

RetrievalEngine::RetrievalEngine(MemoryStore& store, NlpAdapters adapters, RecencyParams params)
    : store_(store), adapters_(std::move(adapters)), params_(params) {
  params_.validate();
}

RetrievalResult RetrievalEngine::retrieve(std::string_view query, const PersonaId& persona_id, Timestamp now,
                                          const RetrievalWeights& weights, const RetrievalOptions& options) const {
  weights.validate();
  const auto profile_pool = store_.list_candidates(Stream::ProfileStream, persona_id);
  auto stream_pool = store_.list_candidates(Stream::MemoryStream, persona_id);
  if (options.exclude_session) {
    std::erase_if(stream_pool, [&](const MemoryRecord& r) {
      return r.category == Category::Dialogue && r.dialogue && r.dialogue->session_id == *options.exclude_session;
    });
  }
  const auto query_embedding = adapters_.embedder->embed(query);

  auto score_pool = [&](const std::vector<MemoryRecord>& pool) {
    std::vector<ScoredMemory> scored;
    scored.reserve(pool.size());
    for (const auto& record : pool) {
      scored.push_back({record, score_memory(record, query_embedding, now, weights, params_)});
    }
    std::sort(scored.begin(), scored.end(), ranks_before);
    return scored;
  };

  RetrievalResult result;
  auto profile = score_pool(profile_pool);
  auto stream = score_pool(stream_pool);

  result.all.reserve(profile.size() + stream.size());
  result.all.insert(result.all.end(), profile.begin(), profile.end());
  result.all.insert(result.all.end(), stream.begin(), stream.end());
  std::sort(result.all.begin(), result.all.end(), ranks_before);

  profile.resize(std::min(profile.size(), options.k_profile));
  stream.resize(std::min(stream.size(), options.k_stream));
  result.profile = std::move(profile);
  result.stream = std::move(stream);

  if (options.touch) {
    std::vector<MemoryId> selected;
    selected.reserve(result.profile.size() + result.stream.size());
    for (const auto& s : result.profile) {
      selected.push_back(s.record.memory_id);
    }
    for (const auto& s : result.stream) {
      selected.push_back(s.record.memory_id);
    }
    store_.touch_access(selected, now);
  }
  return result;
}

json explain_row(const ScoredMemory& scored) {
  const auto& b = scored.breakdown;
  return json{{"memory_id", b.memory_id.str()},
              {"stream", to_string(b.stream)},
              {"category", to_string(scored.record.category)},
              {"content", scored.record.content},
              {"recency", b.recency},
              {"recency_creation", b.recency_creation},
              {"recency_access", b.recency_access},
              {"importance", b.importance_norm},
              {"importance_raw", scored.record.importance_raw},
              {"relevance", b.relevance_norm},
              {"extra", b.extra},
              {"total", b.total}};
}

json explain_rows(const std::vector<ScoredMemory>& ranked) {
  json rows = json::array();
  for (const auto& s : ranked) {
    rows.push_back(explain_row(s));
  }
  return rows;
}

std::string explain_json(const std::vector<ScoredMemory>& ranked) { return explain_rows(ranked).dump(); }

}  // namespace twin
