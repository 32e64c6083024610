#pragma once

namespace afc {

/// Speed of light in vacuum, m/s (exact).
inline constexpr double kSpeedOfLight = 299792458.0;

// All internal quantities are SI: frequencies in Hz, lengths in m,
// absorption coefficients in 1/m, times in s. Unit conversion happens
// only at I/O boundaries (config files, CSV headers, CLI flags).
inline constexpr double kGHz = 1e9;
inline constexpr double kMHz = 1e6;
inline constexpr double kKHz = 1e3;
inline constexpr double kNs = 1e-9;

}  // namespace afc
