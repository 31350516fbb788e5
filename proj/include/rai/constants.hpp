#pragma once

#include <numbers>

namespace rai {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// 88Sr 1S0 - 3P1 (m_j = 0) intercombination line, the transition used for
// single-photon clock-style atom optics at 689 nm.
inline constexpr double excited_state_lifetime = 21.6e-6;                  // s
inline constexpr double default_decay_rate = 1.0 / excited_state_lifetime; // 1/s

inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double sr88_mass = 1.4597071e-25;     // kg
inline constexpr double laser_wavelength = 689e-9;     // m
inline constexpr double laser_wavenumber = two_pi / laser_wavelength;          // rad/m
inline constexpr double recoil_velocity = hbar * laser_wavenumber / sr88_mass; // m/s

} // namespace rai
