#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <utility>
#include <vector>

#include "twin/error.hpp"
#include "twin/types.hpp"

namespace twin {

inline constexpr int kSnapshotSchemaVersion = 1;
inline constexpr std::size_t kDefaultEmbeddingDim = 256;
inline constexpr double kUnitNormTolerance = 1e-6;

struct TouchFailure {
  MemoryId memory_id;
  ErrorCode code = ErrorCode::UnknownMemoryId;
};

struct TouchReport {
  std::size_t updated = 0;
  std::vector<TouchFailure> failures;
};

// Persona knowledge base: profile stream, memory stream, social contacts and
// the transient raw-vitals table for a single persona.
//
// All mutations take an exclusive lock, so writes are serialized in arrival
// order. Readers take a shared lock and receive copies, which gives every
// query a consistent view of the store as of its start.
class MemoryStore {
 public:
  explicit MemoryStore(std::size_t embedding_dim = kDefaultEmbeddingDim);

  MemoryStore(const MemoryStore&) = delete;
  MemoryStore& operator=(const MemoryStore&) = delete;

  std::size_t embedding_dim() const;

  // Persona. A store holds at most one; its id never changes once set.
  void create_persona(PersonaProfile profile);
  std::optional<PersonaProfile> persona() const;
  bool has_persona(const PersonaId& id) const;
  // Throws UnknownPersona unless `id` is this store's persona.
  void require_persona(const PersonaId& id) const;

  // Validates and stores a record. The store assigns the id; any id already
  // present in `record` is ignored. A default last_accessed_at is set to
  // created_at.
  MemoryId insert_memory(MemoryRecord record);

  // Sets last_accessed_at = at for each id. Unknown ids and ids created
  // after `at` are reported per id; the rest are still updated.
  TouchReport touch_access(std::span<const MemoryId> ids, Timestamp at);

  // Every retrievable (embedded) record of the stream.
  std::vector<MemoryRecord> list_candidates(Stream stream, const PersonaId& persona_id) const;

  std::optional<MemoryRecord> find_memory(const MemoryId& id) const;
  MemoryRecord get_memory(const MemoryId& id) const;
  std::vector<MemoryRecord> memories() const;
  std::vector<MemoryRecord> memories_where(const std::function<bool(const MemoryRecord&)>& pred) const;
  std::size_t memory_count() const;

  void upsert_contact(SocialContact contact);
  std::optional<SocialContact> find_contact(const ContactId& id) const;
  std::vector<SocialContact> contacts() const;

  // Raw vitals table, keyed by (timestamp, metric). Returns the number of
  // samples actually added; duplicates of an existing key are skipped.
  std::size_t add_vitals(std::span<const VitalSample> samples);
  std::vector<VitalSample> vitals() const;
  std::vector<VitalSample> vitals_between(Timestamp from, Timestamp to) const;  // [from, to)
  std::vector<VitalSample> vitals_between(VitalMetric metric, Timestamp from, Timestamp to) const;
  std::size_t purge_vitals_before(Timestamp cutoff);
  std::size_t vital_count() const;

  // JSON-lines snapshot. Load replaces the whole store atomically: on any
  // error the current contents are untouched.
  void snapshot_save(const std::filesystem::path& path) const;
  void snapshot_load(const std::filesystem::path& path);

 private:
  using VitalKey = std::pair<Timestamp, VitalMetric>;

  static void validate(const MemoryRecord& record, std::size_t embedding_dim);
  MemoryId next_memory_id();

  mutable std::shared_mutex mutex_;
  std::size_t embedding_dim_;
  std::optional<PersonaProfile> persona_;
  std::map<MemoryId, MemoryRecord> memories_;
  std::map<ContactId, SocialContact> contacts_;
  std::map<VitalKey, double> vitals_;
  std::uint64_t next_memory_seq_ = 1;
};

}  // namespace twin
