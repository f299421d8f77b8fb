#pragma once

#include <numbers>

namespace ck {

inline constexpr double kPi = std::numbers::pi_v<double>;

// Single tolerance for point equality on the circle; every degeneracy
// check keys off this constant.
inline constexpr double kEpsPoint = 1e-9;

// Margin on |trace|-2 separating elliptic/parabolic/hyperbolic.
inline constexpr double kEpsClassify = 1e-9;

// Tolerance on derivative products at fixed points (spectral tests).
inline constexpr double kEpsSpectral = 1e-7;

// Finite-difference step (angle units) for pointwise-only densities,
// refined by Richardson extrapolation.
inline constexpr double kCurvatureFdStep = 1e-4;

}  // namespace ck
