#ifndef POLARON2D_QUAD_HPP
#define POLARON2D_QUAD_HPP

#include <functional>

namespace polaron2d {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;   // conservative estimate of |computed - true|
};

// Adaptive Gauss-Kronrod 15-point quadrature on [a, b].
// Splits the worst interval until the summed error estimate drops below
// max(abs_tol, rel_tol * |value|). Throws numeric_error when the interval
// budget is exhausted before that happens.
QuadResult integrate(const std::function<double(double)>& f, double a,
                     double b, double rel_tol, double abs_tol);

// Integral over [a, infinity) for an integrand that decays to zero.
// Evaluated over geometrically growing panels; stops once the running
// panel contributions certify the remainder below tolerance for an
// eventually monotone integrand. Throws numeric_error when the panel
// sequence does not decay (non-integrable input).
QuadResult integrate_to_inf(const std::function<double(double)>& f, double a,
                            double rel_tol, double abs_tol);

}  // namespace polaron2d

#endif
