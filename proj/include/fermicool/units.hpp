#pragma once

#include <numbers>

namespace fermicool::units {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHbar = 1.054571817e-34;      // J s
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg
inline constexpr double kBohrRadius = 5.29177210903e-11;      // m

// 40K, the species used by every preset.
inline constexpr double kPotassium40MassAmu = 39.96399848;
inline constexpr double kPotassium40Mass = kPotassium40MassAmu * kAtomicMassUnit;

}  // namespace fermicool::units
