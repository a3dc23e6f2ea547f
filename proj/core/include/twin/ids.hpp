#pragma once

#include <compare>
#include <functional>
#include <string>
#include <utility>

namespace twin {

// Opaque string identifier, distinct per domain concept.
template <typename Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

 private:
  std::string value_;
};

using MemoryId = Id<struct MemoryIdTag>;
using PersonaId = Id<struct PersonaIdTag>;
using ContactId = Id<struct ContactIdTag>;
using SessionId = Id<struct SessionIdTag>;
using TurnId = Id<struct TurnIdTag>;

}  // namespace twin

template <typename Tag>
struct std::hash<twin::Id<Tag>> {
  std::size_t operator()(const twin::Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
