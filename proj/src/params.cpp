#include "polaron2d/params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace polaron2d {

void ModelParams::validate() const {
  if (!std::isfinite(L) || L <= 0.0)
    throw std::domain_error("ModelParams: L must be finite and > 0, got " +
                            std::to_string(L));
  if (!std::isfinite(E_B) || E_B >= 0.0)
    throw std::domain_error("ModelParams: E_B must be finite and < 0, got " +
                            std::to_string(E_B));
  if (!std::isfinite(mu) || mu <= 0.0)
    throw std::domain_error("ModelParams: mu must be finite and > 0, got " +
                            std::to_string(mu));
}

ModelParams ModelParams::dimensionless(double mu_tilde, double L_tilde) {
  ModelParams p;
  p.L = L_tilde;
  p.E_B = -1.0;
  p.mu = mu_tilde;
  p.validate();
  return p;
}

}  // namespace polaron2d
