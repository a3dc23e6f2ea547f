#include "twin/memory_store.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <string>

#include "json_codec.hpp"

namespace twin {

namespace {

constexpr const char* kMemoryIdPrefix = "m";

std::uint64_t sequence_of(const MemoryId& id) {
  const auto& s = id.str();
  if (s.size() < 2 || s.rfind(kMemoryIdPrefix, 0) != 0) {
    return 0;
  }
  try {
    return std::stoull(s.substr(1));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

MemoryStore::MemoryStore(std::size_t embedding_dim) : embedding_dim_(embedding_dim) {
  if (embedding_dim_ == 0) {
    throw Error(ErrorCode::InvariantViolation, "embedding dimension must be positive");
  }
}

std::size_t MemoryStore::embedding_dim() const {
  std::shared_lock lock(mutex_);
  return embedding_dim_;
}

void MemoryStore::create_persona(PersonaProfile profile) {
  if (profile.persona_id.empty()) {
    throw Error(ErrorCode::InvariantViolation, "persona_id must not be empty");
  }
  if (profile.name.empty()) {
    throw Error(ErrorCode::InvariantViolation, "persona name must not be empty");
  }
  std::unique_lock lock(mutex_);
  if (persona_ && persona_->persona_id != profile.persona_id) {
    throw Error(ErrorCode::InvariantViolation,
                "store already holds persona '" + persona_->persona_id.str() + "'; ids are immutable");
  }
  persona_ = std::move(profile);
}

std::optional<PersonaProfile> MemoryStore::persona() const {
  std::shared_lock lock(mutex_);
  return persona_;
}

bool MemoryStore::has_persona(const PersonaId& id) const {
  std::shared_lock lock(mutex_);
  return persona_ && persona_->persona_id == id;
}

void MemoryStore::require_persona(const PersonaId& id) const {
  if (!has_persona(id)) {
    throw Error(ErrorCode::UnknownPersona, "unknown persona '" + id.str() + "'");
  }
}

void MemoryStore::validate(const MemoryRecord& r, std::size_t embedding_dim) {
  if (r.content.empty()) {
    throw Error(ErrorCode::InvariantViolation, "memory content must not be empty");
  }
  if (r.importance_raw < 0 || r.importance_raw > 10) {
    throw Error(ErrorCode::InvariantViolation,
                "importance_raw must be in [0,10], got " + std::to_string(r.importance_raw));
  }
  if (r.last_accessed_at < r.created_at) {
    throw Error(ErrorCode::InvariantViolation, "last_accessed_at precedes created_at");
  }
  if (stream_of(r.category) != r.stream) {
    throw Error(ErrorCode::InvariantViolation, std::string("category ") + std::string(to_string(r.category)) +
                                                   " does not belong to " + std::string(to_string(r.stream)));
  }
  if (r.embedded()) {
    if (r.embedding.size() != embedding_dim) {
      throw Error(ErrorCode::InvariantViolation, "embedding has dimension " + std::to_string(r.embedding.size()) +
                                                     ", store expects " + std::to_string(embedding_dim));
    }
    const double n = norm(r.embedding);
    if (!std::isfinite(n) || std::abs(n - 1.0) > kUnitNormTolerance) {
      throw Error(ErrorCode::InvariantViolation, "embedding is not unit norm (|v| = " + std::to_string(n) + ")");
    }
  }
  for (const auto& e : r.emotions) {
    if (!(e.confidence >= 0.0 && e.confidence <= 1.0)) {
      throw Error(ErrorCode::InvariantViolation, "emotion confidence outside [0,1]");
    }
  }
}

MemoryId MemoryStore::next_memory_id() {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%s%08llu", kMemoryIdPrefix, static_cast<unsigned long long>(next_memory_seq_++));
  return MemoryId{buf};
}

MemoryId MemoryStore::insert_memory(MemoryRecord record) {
  if (record.last_accessed_at == Timestamp{}) {
    record.last_accessed_at = record.created_at;
  }
  std::unique_lock lock(mutex_);
  validate(record, embedding_dim_);
  if (!persona_) {
    throw Error(ErrorCode::UnknownPersona, "store has no persona");
  }
  record.memory_id = next_memory_id();
  auto id = record.memory_id;
  memories_.emplace(id, std::move(record));
  return id;
}

TouchReport MemoryStore::touch_access(std::span<const MemoryId> ids, Timestamp at) {
  TouchReport report;
  std::unique_lock lock(mutex_);
  for (const auto& id : ids) {
    const auto it = memories_.find(id);
    if (it == memories_.end()) {
      report.failures.push_back({id, ErrorCode::UnknownMemoryId});
      continue;
    }
    if (at < it->second.created_at) {
      report.failures.push_back({id, ErrorCode::ClockRegression});
      continue;
    }
    it->second.last_accessed_at = at;
    ++report.updated;
  }
  return report;
}

std::vector<MemoryRecord> MemoryStore::list_candidates(Stream stream, const PersonaId& persona_id) const {
  std::shared_lock lock(mutex_);
  if (!persona_ || persona_->persona_id != persona_id) {
    throw Error(ErrorCode::UnknownPersona, "unknown persona '" + persona_id.str() + "'");
  }
  std::vector<MemoryRecord> out;
  for (const auto& [id, record] : memories_) {
    if (record.stream == stream && record.embedded()) {
      out.push_back(record);
    }
  }
  return out;
}

std::optional<MemoryRecord> MemoryStore::find_memory(const MemoryId& id) const {
  std::shared_lock lock(mutex_);
  const auto it = memories_.find(id);
  if (it == memories_.end()) {
    return std::nullopt;
  }
  return it->second;
}

MemoryRecord MemoryStore::get_memory(const MemoryId& id) const {
  auto found = find_memory(id);
  if (!found) {
    throw Error(ErrorCode::UnknownMemoryId, "unknown memory id '" + id.str() + "'");
  }
  return std::move(*found);
}

std::vector<MemoryRecord> MemoryStore::memories() const {
  return memories_where([](const MemoryRecord&) { return true; });
}

std::vector<MemoryRecord> MemoryStore::memories_where(const std::function<bool(const MemoryRecord&)>& pred) const {
  std::shared_lock lock(mutex_);
  std::vector<MemoryRecord> out;
  for (const auto& [id, record] : memories_) {
    if (pred(record)) {
      out.push_back(record);
    }
  }
  return out;
}

std::size_t MemoryStore::memory_count() const {
  std::shared_lock lock(mutex_);
  return memories_.size();
}

void MemoryStore::upsert_contact(SocialContact contact) {
  if (contact.contact_id.empty()) {
    throw Error(ErrorCode::InvariantViolation, "contact_id must not be empty");
  }
  if (contact.name.empty()) {
    throw Error(ErrorCode::InvariantViolation, "contact name must not be empty");
  }
  std::unique_lock lock(mutex_);
  if (persona_ && persona_->persona_id.str() == contact.contact_id.str()) {
    throw Error(ErrorCode::InvariantViolation, "contact id collides with the persona id");
  }
  auto id = contact.contact_id;
  contacts_.insert_or_assign(std::move(id), std::move(contact));
}

std::optional<SocialContact> MemoryStore::find_contact(const ContactId& id) const {
  std::shared_lock lock(mutex_);
  const auto it = contacts_.find(id);
  if (it == contacts_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::vector<SocialContact> MemoryStore::contacts() const {
  std::shared_lock lock(mutex_);
  std::vector<SocialContact> out;
  out.reserve(contacts_.size());
  for (const auto& [id, c] : contacts_) {
    out.push_back(c);
  }
  return out;
}

std::size_t MemoryStore::add_vitals(std::span<const VitalSample> samples) {
  for (const auto& s : samples) {
    if (!std::isfinite(s.value)) {
      throw Error(ErrorCode::NonFiniteValue, "vital sample value is not finite");
    }
    if (s.value < 0.0) {
      throw Error(ErrorCode::InvariantViolation, "vital sample value must be non-negative");
    }
  }
  std::unique_lock lock(mutex_);
  std::size_t added = 0;
  for (const auto& s : samples) {
    if (vitals_.emplace(VitalKey{s.timestamp, s.metric}, s.value).second) {
      ++added;
    }
  }
  return added;
}

std::vector<VitalSample> MemoryStore::vitals() const {
  std::shared_lock lock(mutex_);
  std::vector<VitalSample> out;
  out.reserve(vitals_.size());
  for (const auto& [key, value] : vitals_) {
    out.push_back({key.first, key.second, value});
  }
  return out;
}

std::vector<VitalSample> MemoryStore::vitals_between(Timestamp from, Timestamp to) const {
  std::shared_lock lock(mutex_);
  std::vector<VitalSample> out;
  for (auto it = vitals_.lower_bound({from, VitalMetric::HeartRate}); it != vitals_.end() && it->first.first < to;
       ++it) {
    out.push_back({it->first.first, it->first.second, it->second});
  }
  return out;
}

std::vector<VitalSample> MemoryStore::vitals_between(VitalMetric metric, Timestamp from, Timestamp to) const {
  auto all = vitals_between(from, to);
  std::erase_if(all, [metric](const VitalSample& s) { return s.metric != metric; });
  return all;
}

std::size_t MemoryStore::purge_vitals_before(Timestamp cutoff) {
  std::unique_lock lock(mutex_);
  const auto end = vitals_.lower_bound({cutoff, VitalMetric::HeartRate});
  const auto removed = static_cast<std::size_t>(std::distance(vitals_.begin(), end));
  vitals_.erase(vitals_.begin(), end);
  return removed;
}

std::size_t MemoryStore::vital_count() const {
  std::shared_lock lock(mutex_);
  return vitals_.size();
}

void MemoryStore::snapshot_save(const std::filesystem::path& path) const {
  std::shared_lock lock(mutex_);
  json header{{"schema_version", kSnapshotSchemaVersion},
              {"persona_id", persona_ ? json(persona_->persona_id.str()) : json(nullptr)},
              {"embedding_dim", embedding_dim_},
              {"next_memory_seq", next_memory_seq_}};
  if (persona_) {
    header["persona"] = persona_body(*persona_);
  }

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::IoFailure, "cannot open '" + tmp + "' for writing");
    }
    out << header.dump() << '\n';
    for (const auto& [id, record] : memories_) {
      json j = record;
      j["kind"] = "memory";
      out << j.dump() << '\n';
    }
    for (const auto& [id, contact] : contacts_) {
      json j = contact;
      j["kind"] = "contact";
      out << j.dump() << '\n';
    }
    for (const auto& [key, value] : vitals_) {
      json j = VitalSample{key.first, key.second, value};
      j["kind"] = "vital";
      out << j.dump() << '\n';
    }
    out.flush();
    if (!out) {
      throw Error(ErrorCode::IoFailure, "write to '" + tmp + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::IoFailure, "cannot move snapshot into place: " + ec.message());
  }
}

void MemoryStore::snapshot_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoFailure, "cannot open snapshot '" + path.string() + "'");
  }

  std::optional<PersonaProfile> persona;
  std::map<MemoryId, MemoryRecord> memories;
  std::map<ContactId, SocialContact> contacts;
  std::map<VitalKey, double> vitals;
  std::size_t dim = embedding_dim_;
  std::uint64_t next_seq = 1;

  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    try {
      const auto j = json::parse(line);
      if (!saw_header) {
        saw_header = true;
        const auto version = j.value("schema_version", -1);
        if (version != kSnapshotSchemaVersion) {
          throw Error(ErrorCode::SchemaVersionMismatch,
                      "snapshot schema_version " + std::to_string(version) + ", expected " +
                          std::to_string(kSnapshotSchemaVersion));
        }
        dim = j.value("embedding_dim", embedding_dim_);
        next_seq = j.value("next_memory_seq", std::uint64_t{1});
        if (const auto it = j.find("persona_id"); it != j.end() && it->is_string()) {
          persona = persona_from(it->get<std::string>(), j.at("persona"));
        }
        continue;
      }
      const auto kind = require_string(j, "kind");
      if (kind == "memory") {
        auto record = j.get<MemoryRecord>();
        next_seq = std::max(next_seq, sequence_of(record.memory_id) + 1);
        auto id = record.memory_id;
        memories.insert_or_assign(std::move(id), std::move(record));
      } else if (kind == "contact") {
        auto contact = j.get<SocialContact>();
        auto id = contact.contact_id;
        contacts.insert_or_assign(std::move(id), std::move(contact));
      } else if (kind == "vital") {
        const auto sample = j.get<VitalSample>();
        vitals.insert_or_assign(VitalKey{sample.timestamp, sample.metric}, sample.value);
      } else {
        throw Error(ErrorCode::ParseError, "unknown record kind '" + kind + "'", line_no);
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SchemaVersionMismatch || e.line()) {
        throw;
      }
      throw Error(e.code(), e.what(), line_no);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, e.what(), line_no);
    }
  }
  if (!saw_header) {
    throw Error(ErrorCode::SchemaVersionMismatch, "snapshot has no header line");
  }

  for (const auto& [id, record] : memories) {
    validate(record, dim);
  }

  std::unique_lock lock(mutex_);
  embedding_dim_ = dim;
  persona_ = std::move(persona);
  memories_ = std::move(memories);
  contacts_ = std::move(contacts);
  vitals_ = std::move(vitals);
  next_memory_seq_ = next_seq;
}

}  // namespace twin
