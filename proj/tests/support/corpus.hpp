#pragma once

// Seeded random memory corpora for property and oracle tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "twin/memory_store.hpp"
#include "twin/nlp.hpp"

namespace corpus {

struct Options {
  std::size_t size = 100;
  // Fraction of records that copy another record's scoring inputs, so ties
  // and tie-breaks are exercised.
  double duplicate_rate = 0.1;
  int span_days = 30;
};

struct Corpus {
  std::vector<twin::MemoryId> ids;
  twin::Timestamp now{};
  std::string query;
};

inline const twin::PersonaId kPersona{"p1"};

// Creates the persona (if missing) and inserts `options.size` records.
Corpus fill(twin::MemoryStore& store, const twin::NlpAdapters& adapters, std::uint64_t seed, const Options& options = {});

std::string random_sentence(std::mt19937_64& rng, std::size_t words);

}  // namespace corpus
