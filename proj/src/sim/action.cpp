#include "highway_rl/sim/action.hpp"

#include "highway_rl/errors.hpp"

namespace highway_rl::sim {

ActionTable::ActionTable()
    : specs_{{{0, Longitudinal::Maintain, Lateral::Keep},
              {1, Longitudinal::Accelerate, Lateral::Keep},
              {2, Longitudinal::Brake, Lateral::Keep},
              {3, Longitudinal::HardBrake, Lateral::Keep},
              {4, Longitudinal::Maintain, Lateral::ChangeLeft},
              {5, Longitudinal::Brake, Lateral::ChangeLeft},
              {6, Longitudinal::Maintain, Lateral::ChangeRight},
              {7, Longitudinal::Brake, Lateral::ChangeRight}}} {}

ActionTable::ActionTable(const std::array<ActionSpec, kNumActions>& specs) : specs_(specs) {
  for (int i = 0; i < kNumActions; ++i) {
    specs_[i].id = i;
    for (int j = 0; j < i; ++j)
      if (specs_[j].longitudinal == specs_[i].longitudinal && specs_[j].lateral == specs_[i].lateral)
        throw ConfigError("action table: ids " + std::to_string(j) + " and " + std::to_string(i) +
                          " are identical");
  }
}

const ActionSpec& ActionTable::operator[](int id) const {
  if (id < 0 || id >= kNumActions) throw ConfigError("action id " + std::to_string(id) + " out of range");
  return specs_[static_cast<std::size_t>(id)];
}

std::string_view to_string(Longitudinal l) {
  switch (l) {
    case Longitudinal::Maintain: return "maintain";
    case Longitudinal::Accelerate: return "accelerate";
    case Longitudinal::Brake: return "brake";
    case Longitudinal::HardBrake: return "hard_brake";
  }
  return "?";
}

std::string_view to_string(Lateral l) {
  switch (l) {
    case Lateral::Keep: return "keep";
    case Lateral::ChangeLeft: return "left";
    case Lateral::ChangeRight: return "right";
  }
  return "?";
}

Longitudinal longitudinal_from_string(std::string_view s) {
  if (s == "maintain") return Longitudinal::Maintain;
  if (s == "accelerate") return Longitudinal::Accelerate;
  if (s == "brake") return Longitudinal::Brake;
  if (s == "hard_brake") return Longitudinal::HardBrake;
  throw ConfigError("unknown longitudinal command '" + std::string(s) + "'");
}

Lateral lateral_from_string(std::string_view s) {
  if (s == "keep") return Lateral::Keep;
  if (s == "left") return Lateral::ChangeLeft;
  if (s == "right") return Lateral::ChangeRight;
  throw ConfigError("unknown lateral command '" + std::string(s) + "'");
}

}  // namespace highway_rl::sim
