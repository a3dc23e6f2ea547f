#include <benchmark/benchmark.h>

#include <chrono>
#include <random>
#include <string>

#include "twin/memory_store.hpp"
#include "twin/nlp.hpp"
#include "twin/retrieval.hpp"

using namespace twin;

namespace {

const char* const kWords[] = {"gym",    "football", "coding", "concert", "series", "bug",   "prototype",
                              "munich", "tickets",  "sleep",  "energy",  "peter",  "sister", "project"};

std::string sentence(std::mt19937_64& rng, int words) {
  std::uniform_int_distribution<std::size_t> pick(0, std::size(kWords) - 1);
  std::string s;
  for (int i = 0; i < words; ++i) {
    s += (i ? " " : "") + std::string(kWords[pick(rng)]);
  }
  return s;
}

// A persona with `n` memories split evenly over both streams.
void fill(MemoryStore& store, const NlpAdapters& adapters, std::size_t n) {
  PersonaProfile p;
  p.persona_id = PersonaId{"bench"};
  p.name = "Bench";
  store.create_persona(p);
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> importance(0, 10);
  std::uniform_int_distribution<int> age_hours(0, 24 * 60);
  const auto now = Timestamp{} + std::chrono::hours(24 * 365 * 55);
  for (std::size_t i = 0; i < n; ++i) {
    MemoryRecord r;
    r.category = i % 2 ? Category::Reflection : Category::Interests;
    r.stream = stream_of(r.category);
    r.content = sentence(rng, 8);
    r.created_at = now - std::chrono::hours(age_hours(rng));
    r.importance_raw = importance(rng);
    r.embedding = adapters.embedder->embed(r.content);
    store.insert_memory(std::move(r));
  }
}

void BM_Retrieve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto adapters = NlpAdapters::stub(kDefaultEmbeddingDim);
  MemoryStore store(kDefaultEmbeddingDim);
  fill(store, adapters, n);
  const RetrievalEngine engine(store, adapters);
  const auto now = Timestamp{} + std::chrono::hours(24 * 365 * 55 + 1);
  RetrievalOptions opts;
  opts.touch = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(engine.retrieve("how is the gym and the coding project", PersonaId{"bench"}, now, {}, opts));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Retrieve)->RangeMultiplier(4)->Range(64, 16384)->Unit(benchmark::kMicrosecond);

void BM_Embed(benchmark::State& state) {
  const auto adapters = NlpAdapters::stub(kDefaultEmbeddingDim);
  std::mt19937_64 rng(7);
  const auto text = sentence(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(adapters.embedder->embed(text));
  }
}
BENCHMARK(BM_Embed)->Arg(4)->Arg(16)->Arg(64);

void BM_RecencyScore(benchmark::State& state) {
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(recency_score(t, t * 0.5));
    t = t > 30.0 ? 0.0 : t + 0.01;
  }
}
BENCHMARK(BM_RecencyScore);

}  // namespace

// The packaged benchmark_main archive is LTO bytecode from another compiler.
BENCHMARK_MAIN();
