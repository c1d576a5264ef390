#pragma once

#include <cmath>

namespace polaron2d {

// Physical parameters of the model: a two-dimensional periodic box of side
// L, a single point scatterer whose isolated bound-state level is E_B < 0,
// and a Fermi energy mu > 0.  Momenta live on (2*pi/L)*Z^2, so all mode
// energies are integer multiples of unit() = (2*pi/L)^2.
//
// Dimensionless combinations mu_tilde = mu/|E_B| and L_tilde = L*sqrt(|E_B|)
// determine every scale-invariant quantity; energies scale like |E_B|.
struct ModelParams {
  double L = 0.0;
  double E_B = 0.0;
  double mu = 0.0;

  double unit() const {
    double w = 2.0 * M_PI / L;
    return w * w;
  }
  double mu_tilde() const { return mu / -E_B; }
  double L_tilde() const { return L * std::sqrt(-E_B); }

  // Checks L > 0, E_B < 0, mu > 0 and finiteness; throws std::domain_error.
  void validate() const;

  // Convention for dimensionless inputs: E_B = -1, L = L_tilde, mu = mu_tilde.
  static ModelParams dimensionless(double mu_tilde, double L_tilde);
};

}  // namespace polaron2d
