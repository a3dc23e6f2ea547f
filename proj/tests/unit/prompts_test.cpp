#include <gtest/gtest.h>

#include "twin/error.hpp"
#include "twin/prompts.hpp"

using namespace twin;
namespace p = twin::prompts;

TEST(Prompts, RenderSubstitutesOnce) {
  EXPECT_EQ(p::render("a {{x}} b {{y}}", {{"x", "1"}, {"y", "{{x}}"}}), "a 1 b {{x}}");
  EXPECT_EQ(p::render("no placeholders", {}), "no placeholders");
  EXPECT_EQ(p::render("{{x}}{{x}}", {{"x", "ab"}}), "abab");
}

TEST(Prompts, RenderRejectsMissingOrUnterminated) {
  for (const char* tmpl : {"{{missing}}", "open {{x"}) {
    try {
      p::render(tmpl, {{"x", "1"}});
      ADD_FAILURE() << tmpl;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::PreconditionViolation);
    }
  }
}

TEST(Prompts, LiteralsAndPlaceholders) {
  EXPECT_EQ(p::placeholders("a {{x}} b {{y}}"), (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(p::literals("a {{x}} b {{y}}"), (std::vector<std::string>{"a ", " b ", ""}));
}

TEST(Prompts, SystemTemplatesStartWithTag) {
  for (const auto tmpl : {p::kImportanceSystem, p::kReflectionSystem, p::kVitalsSystem, p::kStage1System,
                          p::kStage2System}) {
    EXPECT_TRUE(tmpl.starts_with("#tag: {{tag}}\n")) << tmpl;
  }
}

TEST(Prompts, Stage1SectionsInOrder) {
  std::size_t pos = 0;
  for (const auto section : p::kStage1Sections) {
    const auto found = p::kStage1User.find(section, pos);
    ASSERT_NE(found, std::string_view::npos) << section;
    pos = found + section.size();
  }
  EXPECT_EQ(p::placeholders(p::kStage1User),
            (std::vector<std::string>{"persona_block", "situation_block", "log_block", "profile_block", "stream_block",
                                      "instruction_block"}));
}

TEST(Prompts, InstructionsCarryDirectiveAndCaps) {
  const auto ph = p::placeholders(p::kStage1Instructions);
  for (const char* name : {"query", "word_cap", "directive", "persona_name", "contact_name"}) {
    EXPECT_NE(std::find(ph.begin(), ph.end(), name), ph.end()) << name;
  }
  EXPECT_NE(p::kNoFabricationDirective.find("Do not add or infer"), std::string_view::npos);
  const auto stage2 = p::placeholders(p::kStage2System);
  EXPECT_NE(std::find(stage2.begin(), stage2.end(), "preferred_address"), stage2.end());
}
