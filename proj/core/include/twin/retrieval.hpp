#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twin/memory_store.hpp"
#include "twin/nlp.hpp"

namespace twin {

// Two exponential decays, one over time since creation and a faster one over
// time since last access, blended by weights that sum to one.
struct RecencyParams {
  double lambda_creation;  // per day
  double lambda_access;    // per day
  double w_creation = 0.4;
  double w_access = 0.6;

  RecencyParams();
  // Throws InvariantViolation.
  void validate() const;
};

enum class ExtraMatchKind { Keyword, Category };

// Bonus added when the keyword occurs in the content (case-insensitive
// substring) or the record has exactly this category.
struct ExtraPointRule {
  ExtraMatchKind kind = ExtraMatchKind::Keyword;
  std::string keyword;
  Category category = Category::UserProfile;
  double bonus = 0.0;
};

struct RetrievalWeights {
  double recency = 1.0;
  double importance = 1.0;
  double relevance = 1.0;
  std::vector<ExtraPointRule> extra_points;

  void validate() const;
};

struct RetrievalBreakdown {
  MemoryId memory_id;
  Stream stream = Stream::ProfileStream;
  double recency_creation = 0.0;  // e^(-lambda_c * t_c)
  double recency_access = 0.0;    // e^(-lambda_a * t_a)
  double recency = 0.0;
  double importance_norm = 0.0;
  double relevance_norm = 0.0;
  double extra = 0.0;
  double total = 0.0;
};

struct ScoredMemory {
  MemoryRecord record;  // as scored, before any access touch
  RetrievalBreakdown breakdown;
};

struct RetrievalOptions {
  std::size_t k_profile = 10;
  std::size_t k_stream = 25;
  // Update last_accessed_at of the selected records. Explain requests
  // leave the store untouched.
  bool touch = true;
  // Dialogue turns of this session are skipped; the prompt already carries
  // them as the conversation log.
  std::optional<SessionId> exclude_session;
};

struct RetrievalResult {
  std::vector<ScoredMemory> profile;  // ranked, at most k_profile
  std::vector<ScoredMemory> stream;   // ranked, at most k_stream
  std::vector<ScoredMemory> all;      // every candidate of both streams, ranked
};

/// Blended recency in [0,1]. Elapsed times are in days; t_access cannot
/// exceed t_creation. Throws NegativeElapsedTime for negative inputs.
double recency_score(double t_creation_days, double t_access_days, const RecencyParams& params = {});

/// raw / 10. Throws OutOfRange outside [0,10].
double normalize_importance(int raw);

// Cosine clamped to [0,1].
double clamped_cosine(const Embedding& a, const Embedding& b) noexcept;

/// Relevance of a memory to a query: cosine between the keyword-weighted
/// query embedding and the memory embedding, negative values floored at 0.
/// Throws UnembeddedMemory.
double relevance_score(std::string_view query, const MemoryRecord& memory, const NlpAdapters& adapters);

double extra_points(const MemoryRecord& memory, const std::vector<ExtraPointRule>& rules);

RetrievalBreakdown score_memory(const MemoryRecord& memory, const Embedding& query_embedding, Timestamp now,
                                const RetrievalWeights& weights, const RecencyParams& params);

// Strict weak order: total desc, importance_raw desc, created_at desc,
// memory_id asc.
bool ranks_before(const ScoredMemory& a, const ScoredMemory& b) noexcept;

class RetrievalEngine {
 public:
  RetrievalEngine(MemoryStore& store, NlpAdapters adapters, RecencyParams params = {});

  const RecencyParams& params() const noexcept { return params_; }
  const NlpAdapters& adapters() const noexcept { return adapters_; }

  // Rescores every candidate of both streams against the query and returns
  // the per-stream top-k. Throws UnknownPersona, ClockRegression.
  RetrievalResult retrieve(std::string_view query, const PersonaId& persona_id, Timestamp now,
                           const RetrievalWeights& weights, const RetrievalOptions& options = {}) const;

 private:
  MemoryStore& store_;
  NlpAdapters adapters_;
  RecencyParams params_;
};

// JSON array of breakdowns (with content and category) sorted by total.
std::string explain_json(const std::vector<ScoredMemory>& ranked);

}  // namespace twin
