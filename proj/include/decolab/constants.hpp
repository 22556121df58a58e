#pragma once

#include <numbers>

namespace decolab {

/// Fixed physical constants in SI units (CODATA 2018).
struct PhysicalConstants {
  double h;      ///< Planck constant [J s]
  double hbar;   ///< reduced Planck constant [J s]
  double k_B;    ///< Boltzmann constant [J/K]
};

// h and k_B are exact in the 2019 SI; hbar is derived so that h = 2 pi hbar
// holds to the last bit.
inline constexpr PhysicalConstants codata2018{
    6.62607015e-34,
    6.62607015e-34 / (2.0 * std::numbers::pi),
    1.380649e-23,
};

namespace constants {
inline constexpr double h = codata2018.h;
inline constexpr double hbar = codata2018.hbar;
inline constexpr double k_B = codata2018.k_B;
}  // namespace constants

}  // namespace decolab
