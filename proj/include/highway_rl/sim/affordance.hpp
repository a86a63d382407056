#pragma once

#include <array>
#include <cstddef>

namespace highway_rl::sim {

inline constexpr std::size_t kNumSlots = 6;
inline constexpr std::size_t kAffordanceDim = 3 * kNumSlots + 2;

/// Neighbor slots in canonical order. Left means larger y.
enum class Slot : int { FrontLeft = 0, FrontCenter, FrontRight, RearLeft, RearCenter, RearRight };

inline constexpr bool is_front(Slot s) { return static_cast<int>(s) < 3; }

/// The 20-entry RL state: per slot (relative distance, relative velocity,
/// occupancy), then ego v_x and ego y. Raw units unless stated otherwise.
struct AffordanceVector {
  std::array<double, kAffordanceDim> values{};

  static constexpr std::size_t distance_index(Slot s) { return 3 * static_cast<std::size_t>(s); }
  static constexpr std::size_t velocity_index(Slot s) { return distance_index(s) + 1; }
  static constexpr std::size_t occupancy_index(Slot s) { return distance_index(s) + 2; }
  static constexpr std::size_t kEgoSpeed = 3 * kNumSlots;
  static constexpr std::size_t kEgoLateral = kEgoSpeed + 1;

  double distance(Slot s) const { return values[distance_index(s)]; }
  double rel_velocity(Slot s) const { return values[velocity_index(s)]; }
  double occupancy(Slot s) const { return values[occupancy_index(s)]; }
  bool occupied(Slot s) const { return occupancy(s) > 0.5; }
  double ego_speed() const { return values[kEgoSpeed]; }
  double ego_lateral() const { return values[kEgoLateral]; }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  bool operator==(const AffordanceVector&) const = default;
};

/// Maps raw affordances to network scale: distances / d_sense,
/// velocities / v_max, y / road width; occupancy passes through.
struct Normalizer {
  double d_sense = 100.0;
  double v_max = 40.0;
  double road_width = 10.5;

  AffordanceVector normalize(const AffordanceVector& raw) const;
  AffordanceVector denormalize(const AffordanceVector& scaled) const;
  bool operator==(const Normalizer&) const = default;
};

inline AffordanceVector Normalizer::normalize(const AffordanceVector& raw) const {
  AffordanceVector out = raw;
  for (std::size_t s = 0; s < kNumSlots; ++s) {
    out[3 * s] = raw[3 * s] / d_sense;
    out[3 * s + 1] = raw[3 * s + 1] / v_max;
  }
  out[AffordanceVector::kEgoSpeed] = raw[AffordanceVector::kEgoSpeed] / v_max;
  out[AffordanceVector::kEgoLateral] = raw[AffordanceVector::kEgoLateral] / road_width;
  return out;
}

inline AffordanceVector Normalizer::denormalize(const AffordanceVector& scaled) const {
  AffordanceVector out = scaled;
  for (std::size_t s = 0; s < kNumSlots; ++s) {
    out[3 * s] = scaled[3 * s] * d_sense;
    out[3 * s + 1] = scaled[3 * s + 1] * v_max;
  }
  out[AffordanceVector::kEgoSpeed] = scaled[AffordanceVector::kEgoSpeed] * v_max;
  out[AffordanceVector::kEgoLateral] = scaled[AffordanceVector::kEgoLateral] * road_width;
  return out;
}

}  // namespace highway_rl::sim
