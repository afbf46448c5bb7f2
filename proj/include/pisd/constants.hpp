#pragma once

namespace pisd {

// SI values. hbar is CODATA 2018.
struct PhysicalConstants {
  double k_B = 1.380649e-23;        // J/K
  double mu_B = 9.2740100783e-24;   // J/T
  double g = 2.00231930436256;      // dimensionless
  double hbar = 1.054571817e-34;    // J s

  double g_mu_B() const noexcept { return g * mu_B; }
  // rad s^-1 T^-1
  double gyromagnetic_ratio() const noexcept { return g * mu_B / hbar; }
};

}  // namespace pisd
