#include "twin/prompts.hpp"

#include "twin/error.hpp"

namespace twin::prompts {

namespace {

constexpr std::string_view kOpen = "{{";
constexpr std::string_view kClose = "}}";

template <typename OnLiteral, typename OnPlaceholder>
void scan(std::string_view tmpl, OnLiteral on_literal, OnPlaceholder on_placeholder) {
  std::size_t pos = 0;
  while (true) {
    const auto open = tmpl.find(kOpen, pos);
    if (open == std::string_view::npos) {
      on_literal(tmpl.substr(pos));
      return;
    }
    const auto close = tmpl.find(kClose, open + kOpen.size());
    if (close == std::string_view::npos) {
      throw Error(ErrorCode::PreconditionViolation, "unterminated placeholder in template");
    }
    on_literal(tmpl.substr(pos, open - pos));
    on_placeholder(tmpl.substr(open + kOpen.size(), close - open - kOpen.size()));
    pos = close + kClose.size();
  }
}

}  // namespace

std::string render(std::string_view tmpl, const Vars& vars) {
  std::string out;
  scan(
      tmpl, [&](std::string_view lit) { out.append(lit); },
      [&](std::string_view name) {
        const auto it = vars.find(name);
        if (it == vars.end()) {
          throw Error(ErrorCode::PreconditionViolation, "no value for placeholder '" + std::string(name) + "'");
        }
        out.append(it->second);
      });
  return out;
}

std::vector<std::string> literals(std::string_view tmpl) {
  std::vector<std::string> out;
  scan(
      tmpl, [&](std::string_view lit) { out.emplace_back(lit); }, [](std::string_view) {});
  return out;
}

std::vector<std::string> placeholders(std::string_view tmpl) {
  std::vector<std::string> out;
  scan(
      tmpl, [](std::string_view) {}, [&](std::string_view name) { out.emplace_back(name); });
  return out;
}

}  // namespace twin::prompts
