#include "influence/env/types.hpp"

namespace influence {

namespace {
constexpr std::array<std::string_view, 6> kActionNames{"stay", "up", "down", "left", "right", "interact"};
constexpr std::array<std::string_view, 4> kDirectionNames{"up", "down", "left", "right"};
constexpr std::array<std::string_view, 7> kTileNames{
    "floor", "counter", "onion_source", "tomato_source", "plate_dispenser", "pot", "delivery"};
constexpr std::array<std::string_view, 5> kObjectNames{"none", "onion", "tomato", "plate", "soup"};
}  // namespace

std::string_view to_string(Action a) { return kActionNames[static_cast<std::size_t>(a)]; }

std::optional<Action> action_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i)
    if (kActionNames[i] == s) return static_cast<Action>(i);
  return std::nullopt;
}

std::string_view to_string(Direction d) { return kDirectionNames[static_cast<std::size_t>(d)]; }

std::optional<Direction> direction_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kDirectionNames.size(); ++i)
    if (kDirectionNames[i] == s) return static_cast<Direction>(i);
  return std::nullopt;
}

std::string_view to_string(TileKind t) { return kTileNames[static_cast<std::size_t>(t)]; }

std::string_view to_string(ObjectKind k) { return kObjectNames[static_cast<std::size_t>(k)]; }

std::optional<ObjectKind> object_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kObjectNames.size(); ++i)
    if (kObjectNames[i] == s) return static_cast<ObjectKind>(i);
  return std::nullopt;
}

}  // namespace influence
