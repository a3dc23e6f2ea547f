#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "twin/dialogue.hpp"
#include "twin/error.hpp"

using namespace twin;
using fixtures::at;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvariantViolation;
}

ConversationTurn turn(const char* from, const char* to, const char* ts, const char* text) {
  ConversationTurn t;
  t.sender = from;
  t.recipient = to;
  t.timestamp = at(ts);
  t.text = text;
  return t;
}

std::size_t count(const MemoryStore& store, Category category) {
  return store.memories_where([&](const MemoryRecord& r) { return r.category == category; }).size();
}

class DialogueTest : public ::testing::Test {
 protected:
  DialogueTest()
      : store(64),
        scripted(fixtures::scripted({{"importance", "3"}, {"reflection", "They talked."}})),
        ingestor(store, NlpAdapters::stub(64), scripted.gateway) {
    store.create_persona(fixtures::martin());
    fixtures::add_contact(store, "peter", "Peter");
  }

  MemoryStore store;
  fixtures::Scripted scripted;
  DialogueIngestor ingestor;
};

}  // namespace

TEST(ChatParse, ReadsLinesAndReportsLineNumbers) {
  std::istringstream ok(
      "{\"sender\":\"peter\",\"recipient\":\"martin\",\"ts\":\"2025-01-06T19:02:00Z\",\"text\":\"yo\"}\n"
      "\n"
      "{\"sender\":\"martin\",\"recipient\":\"peter\",\"ts\":\"2025-01-06T19:03:00Z\",\"text\":\"hey\"}\n");
  const auto lines = parse_chat_jsonl(ok);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[1].line, 3u);
  EXPECT_EQ(lines[1].text, "hey");

  const std::vector<std::string> bad{
      "{not json}",
      R"({"sender":"peter","recipient":"martin","ts":"yesterday","text":"yo"})",
      R"({"sender":"peter","recipient":"martin","ts":"2025-01-06T19:02:00Z","text":"  "})",
      R"({"sender":"peter","recipient":"peter","ts":"2025-01-06T19:02:00Z","text":"yo"})",
      R"({"sender":"peter","ts":"2025-01-06T19:02:00Z","text":"yo"})"};
  for (const auto& line : bad) {
    std::istringstream in(
        "{\"sender\":\"peter\",\"recipient\":\"martin\",\"ts\":\"2025-01-06T19:02:00Z\",\"text\":\"yo\"}\n" + line +
        "\n");
    try {
      parse_chat_jsonl(in);
      ADD_FAILURE() << line;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError) << line;
      EXPECT_EQ(e.line(), 2u) << line;
    }
  }
}

TEST_F(DialogueTest, ImportsFiveDaysIntoFiveSessions) {
  const auto summary = ingestor.import_history(fixtures::martin_dir() / "chat.jsonl");
  EXPECT_EQ(summary.sessions, 5u);
  EXPECT_EQ(summary.turns, 50u);
  EXPECT_EQ(count(store, Category::Dialogue), 50u);
  EXPECT_EQ(count(store, Category::Reflection), 5u);
  const auto sessions = ingestor.sessions();
  ASSERT_EQ(sessions.size(), 5u);
  for (const auto& s : sessions) {
    EXPECT_EQ(s.status, SessionStatus::Finalized);
    EXPECT_EQ(s.contact_id, ContactId{"peter"});
    EXPECT_FALSE(s.log.empty());
  }
  EXPECT_EQ(sessions[0].session_id, SessionId{"s0001"});
  EXPECT_EQ(sessions[0].log[0].turn_id, TurnId{"s0001.1"});

  // Reflections are stamped at the last turn and carry the session.
  for (const auto& r : store.memories_where([](const MemoryRecord& m) { return m.category == Category::Reflection; })) {
    ASSERT_TRUE(r.dialogue.has_value());
    const auto s = ingestor.session(r.dialogue->session_id);
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(r.created_at, s->log.back().timestamp);
    EXPECT_EQ(r.source, Source::ReflectionJob);
    EXPECT_EQ(r.content, "They talked.");
    EXPECT_TRUE(r.embedded());
  }
  // Every turn was enriched and scored.
  for (const auto& r : store.memories_where([](const MemoryRecord& m) { return m.category == Category::Dialogue; })) {
    EXPECT_EQ(r.importance_raw, 3);
    EXPECT_FALSE(r.emotions.empty());
    EXPECT_EQ(r.dialogue->topics.size(), 5u);
    EXPECT_EQ(r.source, Source::DialogueLog);
  }
}

TEST_F(DialogueTest, MalformedImportLeavesStoreUnchanged) {
  auto body = fixtures::read_file(fixtures::martin_dir() / "chat.jsonl");
  body += "{\"sender\":\"peter\"}\n";
  std::istringstream in(body);
  try {
    ingestor.import_history(in);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_EQ(e.line(), 51u);
  }
  EXPECT_EQ(store.memory_count(), 0u);
  EXPECT_TRUE(ingestor.sessions().empty());
  EXPECT_TRUE(scripted.backend->calls().empty());
}

TEST_F(DialogueTest, ImportRejectsLinesWithoutThePersona) {
  std::istringstream in(R"({"sender":"peter","recipient":"anna","ts":"2025-01-06T19:02:00Z","text":"yo"})");
  EXPECT_EQ(code_of([&] { ingestor.import_history(in); }), ErrorCode::ParseError);
  EXPECT_EQ(store.memory_count(), 0u);
}

TEST_F(DialogueTest, SessionLifecycle) {
  const auto sid = ingestor.open_session(ContactId{"peter"}, at("2025-01-06T19:00:00Z"));
  EXPECT_EQ(code_of([&] { ingestor.finalize_session(sid); }), ErrorCode::EmptySession);
  ingestor.log_turn(sid, turn("peter", "martin", "2025-01-06T19:02:00Z", "gym later?"));
  // The persona may be named by display name.
  ingestor.log_turn(sid, turn("Martin", "peter", "2025-01-06T19:03:00Z", "yes!"));
  EXPECT_EQ(code_of([&] { ingestor.log_turn(sid, turn("peter", "martin", "2025-01-06T19:01:00Z", "late")); }),
            ErrorCode::NonMonotonicTimestamp);
  EXPECT_EQ(code_of([&] { ingestor.log_turn(sid, turn("anna", "martin", "2025-01-06T19:04:00Z", "hi")); }),
            ErrorCode::InvariantViolation);
  EXPECT_EQ(code_of([&] { ingestor.log_turn(sid, turn("peter", "martin", "2025-01-06T19:04:00Z", " ")); }),
            ErrorCode::InvariantViolation);
  const auto reflection = ingestor.finalize_session(sid);
  EXPECT_EQ(store.get_memory(reflection).created_at, at("2025-01-06T19:03:00Z"));
  EXPECT_EQ(code_of([&] { ingestor.finalize_session(sid); }), ErrorCode::AlreadyFinalized);
  EXPECT_EQ(code_of([&] { ingestor.log_turn(sid, turn("peter", "martin", "2025-01-06T19:05:00Z", "hey")); }),
            ErrorCode::SessionClosed);
  EXPECT_EQ(code_of([&] { ingestor.log_turn(SessionId{"s9999"}, turn("peter", "martin", "2025-01-06T19:05:00Z", "x")); }),
            ErrorCode::UnknownSession);
  EXPECT_EQ(count(store, Category::Dialogue), 2u);
  const auto persona_side = ingestor.persona_turns();
  ASSERT_EQ(persona_side.size(), 1u);
  EXPECT_EQ(persona_side[0].sender, "martin");
}

TEST_F(DialogueTest, ActiveSessionRollsOverAfterGap) {
  const auto first = ingestor.active_session(ContactId{"peter"}, at("2025-01-06T19:00:00Z"));
  ingestor.log_turn(first, turn("peter", "martin", "2025-01-06T19:02:00Z", "yo"));
  EXPECT_EQ(ingestor.active_session(ContactId{"peter"}, at("2025-01-06T23:01:00Z")), first);
  const auto second = ingestor.active_session(ContactId{"peter"}, at("2025-01-06T23:03:00Z"));
  EXPECT_NE(second, first);
  EXPECT_EQ(ingestor.session(first)->status, SessionStatus::Finalized);
  EXPECT_EQ(count(store, Category::Reflection), 1u);
}

TEST_F(DialogueTest, UnknownContactsAreRegistered) {
  const auto c = ingestor.ensure_contact(ContactId{"lena"});
  EXPECT_EQ(c.name, "Lena");
  EXPECT_EQ(c.relationship, "unknown");
  EXPECT_TRUE(store.find_contact(ContactId{"lena"}).has_value());
  EXPECT_EQ(ingestor.ensure_contact(ContactId{"peter"}).relationship, "friend");
}

TEST_F(DialogueTest, ImportanceContextUsesProfileFactsOnly) {
  MemoryRecord fact;
  fact.category = Category::Goals;
  fact.stream = Stream::ProfileStream;
  fact.content = "Finish the AI project";
  fact.created_at = at("2025-01-01T00:00:00Z");
  fact.importance_raw = 8;
  store.insert_memory(fact);
  const auto ctx = importance_context(store);
  EXPECT_NE(ctx.find("Name: Martin"), std::string::npos);
  EXPECT_NE(ctx.find("- Finish the AI project"), std::string::npos);
  MemoryStore empty(8);
  EXPECT_EQ(code_of([&] { importance_context(empty); }), ErrorCode::UnknownPersona);
}

TEST_F(DialogueTest, SessionsRebuildFromSnapshot) {
  ingestor.import_history(fixtures::martin_dir() / "chat.jsonl");
  fixtures::TempDir dir;
  store.snapshot_save(dir / "s.jsonl");

  MemoryStore loaded(64);
  loaded.snapshot_load(dir / "s.jsonl");
  DialogueIngestor again(loaded, NlpAdapters::stub(64), scripted.gateway);
  again.rebuild_from_store();
  const auto a = ingestor.sessions();
  const auto b = again.sessions();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].session_id, b[i].session_id);
    EXPECT_EQ(a[i].status, b[i].status);
    EXPECT_EQ(a[i].log, b[i].log);
  }
  // New sessions continue the numbering.
  EXPECT_EQ(again.open_session(ContactId{"peter"}, at("2025-01-12T00:00:00Z")), SessionId{"s0006"});
  EXPECT_EQ(again.turns_with(ContactId{"peter"}).size(), 50u);
}

TEST_F(DialogueTest, EmbeddingFailureMarksPending) {
  class DownEmbedder final : public Embedder {
   public:
    std::size_t dimension() const override { return 64; }
    Embedding embed(std::string_view) const override { throw Error(ErrorCode::BackendUnavailable, "down"); }
  };
  auto adapters = NlpAdapters::stub(64);
  adapters.embedder = std::make_shared<DownEmbedder>();
  DialogueIngestor flaky(store, adapters, scripted.gateway);
  const auto sid = flaky.open_session(ContactId{"peter"}, at("2025-01-06T19:00:00Z"));
  const auto ids = flaky.log_turn(sid, turn("peter", "martin", "2025-01-06T19:02:00Z", "yo"));
  ASSERT_EQ(ids.size(), 1u);
  const auto r = store.get_memory(ids[0]);
  EXPECT_FALSE(r.embedded());
  EXPECT_EQ(r.metadata.at("embedding"), "pending");
}
