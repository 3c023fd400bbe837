#pragma once

// Internal units are SI with angular frequencies in rad/s. User-facing
// interfaces speak MHz / ns / nT and convert here, once.

#include "geozero/spin_core.hpp"

namespace geozero::units {

inline constexpr double kMHzToRadPerSec = kTwoPi * 1e6;
inline constexpr double kNanosecond = 1e-9;
inline constexpr double kMicrosecond = 1e-6;
inline constexpr double kNanotesla = 1e-9;

/// Electron gyromagnetic ratio, 2pi * 28.024 GHz/T.
inline constexpr double kGammaElectron = kTwoPi * 28.024e9;

constexpr double mhz(double value) { return value * kMHzToRadPerSec; }
constexpr double to_mhz(double rad_per_sec) { return rad_per_sec / kMHzToRadPerSec; }
constexpr double ns(double value) { return value * kNanosecond; }
constexpr double us(double value) { return value * kMicrosecond; }

}  // namespace geozero::units
