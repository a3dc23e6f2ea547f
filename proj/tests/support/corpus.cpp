#include "corpus.hpp"

#include <array>

namespace corpus {

namespace {

constexpr std::array<const char*, 48> kWords = {
    "football", "gym",     "concert", "project", "bugs",    "series",  "western", "coffee",
    "exam",     "holiday", "Munich",  "sister",  "running", "pasta",   "guitar",  "movie",
    "weekend",  "sleep",   "stress",  "laptop",  "python",  "chatbot", "tickets", "March",
    "train",    "rain",    "party",   "birthday", "doctor", "dentist", "jacket",  "phone",
    "lecture",  "library", "pizza",   "beach",   "mountain", "game",   "friend",  "neighbor",
    "garden",   "kitchen", "bicycle", "museum",  "podcast", "sunset",  "breakfast", "deadline"};

constexpr std::array<const char*, 6> kFiller = {"the", "and", "with", "my", "about", "really"};

}  // namespace

std::string random_sentence(std::mt19937_64& rng, std::size_t words) {
  std::uniform_int_distribution<std::size_t> pick(0, kWords.size() - 1);
  std::uniform_int_distribution<std::size_t> filler(0, kFiller.size() - 1);
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (!out.empty()) {
      out += ' ';
    }
    out += (i % 3 == 1) ? kFiller[filler(rng)] : kWords[pick(rng)];
  }
  return out;
}

Corpus fill(twin::MemoryStore& store, const twin::NlpAdapters& adapters, std::uint64_t seed, const Options& options) {
  using namespace std::chrono;
  std::mt19937_64 rng(seed);
  if (!store.persona()) {
    twin::PersonaProfile p;
    p.persona_id = kPersona;
    p.name = "Pat";
    p.created_at = twin::Timestamp{} + hours(24 * 365 * 55);
    store.create_persona(p);
  }

  Corpus c;
  c.now = twin::Timestamp{} + hours(24 * 365 * 55) + hours(24 * (options.span_days + 5));
  const auto span_ms = static_cast<std::int64_t>(options.span_days) * 86'400'000;
  std::uniform_int_distribution<std::int64_t> age(0, span_ms);
  std::uniform_int_distribution<int> importance(0, 10);
  std::uniform_int_distribution<int> words(2, 9);
  std::uniform_int_distribution<int> category(0, 11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<twin::MemoryRecord> made;
  for (std::size_t i = 0; i < options.size; ++i) {
    twin::MemoryRecord r;
    if (!made.empty() && unit(rng) < options.duplicate_rate) {
      std::uniform_int_distribution<std::size_t> which(0, made.size() - 1);
      r = made[which(rng)];
    } else {
      r.category = static_cast<twin::Category>(category(rng));
      r.stream = twin::stream_of(r.category);
      r.content = random_sentence(rng, static_cast<std::size_t>(words(rng)));
      r.created_at = c.now - milliseconds(age(rng));
      const auto since = (c.now - r.created_at).count();
      // A third of the records were never accessed again.
      if (unit(rng) < 0.33) {
        r.last_accessed_at = r.created_at;
      } else {
        std::uniform_int_distribution<std::int64_t> later(0, since);
        r.last_accessed_at = r.created_at + milliseconds(later(rng));
      }
      r.importance_raw = importance(rng);
      r.source = twin::Source::Import;
      r.embedding = adapters.embedder->embed(r.content);
    }
    made.push_back(r);
    c.ids.push_back(store.insert_memory(std::move(r)));
  }
  c.query = random_sentence(rng, 4);
  return c;
}

}  // namespace corpus
