#pragma once

#include <array>
#include <string>
#include <string_view>

namespace highway_rl::sim {

inline constexpr int kNumActions = 8;

enum class Longitudinal { Maintain, Accelerate, Brake, HardBrake };
enum class Lateral { Keep, ChangeLeft, ChangeRight };

struct ActionSpec {
  int id = 0;
  Longitudinal longitudinal = Longitudinal::Maintain;
  Lateral lateral = Lateral::Keep;
  bool operator==(const ActionSpec&) const = default;
};

/// The eight discrete commands. Default enumeration:
///   0 maintain  1 accelerate  2 brake  3 hard brake        (all lane keep)
///   4 left+maintain  5 left+brake  6 right+maintain  7 right+brake
class ActionTable {
 public:
  ActionTable();
  explicit ActionTable(const std::array<ActionSpec, kNumActions>& specs);

  /// Throws ConfigError for ids outside [0, 8).
  const ActionSpec& operator[](int id) const;
  const std::array<ActionSpec, kNumActions>& all() const { return specs_; }
  bool operator==(const ActionTable&) const = default;

 private:
  std::array<ActionSpec, kNumActions> specs_;
};

std::string_view to_string(Longitudinal l);
std::string_view to_string(Lateral l);
Longitudinal longitudinal_from_string(std::string_view s);
Lateral lateral_from_string(std::string_view s);

}  // namespace highway_rl::sim
