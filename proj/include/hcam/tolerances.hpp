#pragma once

// Central numeric thresholds. Exact-arithmetic checks on discrete tables use
// kExactComponent; finite-difference derivative checks use kFdPartial.
namespace hcam::tol {

inline constexpr double kDistNormalization = 1e-12;  // probability tables sum to 1
inline constexpr double kAnovaReconstruct = 1e-10;   // sum of components == log p
inline constexpr double kExactComponent = 1e-9;      // zero test for discrete theta terms
inline constexpr double kFdPartial = 1e-5;           // zero test for FD mixed partials
inline constexpr double kFaithfulFloor = 0.05;       // rejection floor for drawn theta tables
inline constexpr double kCenteredTerm = 1e-8;        // fitted term mean, relative to scale

}  // namespace hcam::tol
