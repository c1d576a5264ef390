#ifndef POLARON2D_TAILS_HPP
#define POLARON2D_TAILS_HPP

namespace polaron2d {

// Two-sided bound for an omitted lattice tail, valid whenever the summand
// is monotone decreasing in k^2 beyond the cut. center approximates the
// tail by the radial integral; radius bounds |true tail - center|:
//   (1/L^2) sum_{k^2 > c} g(k^2)  in  [center - radius, center + radius].
struct TailBound {
  double center = 0.0;
  double radius = 0.0;

  double lo() const { return center - radius; }
  double hi() const { return center + radius; }
};

// J(X, a) = integral_X^inf dt / (t^2 + a), for X > 0 and X^2 + a > 0.
// Stable for |a| << X^2 (series) and for a < 0 (log1p form).
double inv_quad_integral(double X, double a);

// J2(X, a) = integral_X^inf dt / (t^2 + a)^2, same domain.
double inv_quad_sq_integral(double X, double a);

// Tail of the paired-resolvent summand
//   (1/L^2) sum_{k^2 > cut} [ 1/(k^2 + a) - 1/(k^2 + b) ]
// requiring cut + a > 0 and cut + b > 0. Covers both the regularized
// scatterer sum (a = -E_B, b = tau) and the secular sum (a = -E_B, b = -z).
TailBound pair_resolvent_tail(double L, double a, double b, double cut);

// Tail of (1/L^2) sum_{k^2 > cut} 1/(k^2 + a)^2, requiring cut + a > 0.
// Covers the secular-derivative tail (a = -z) and the hole-propagator
// norm bound (a = |e| - mu).
TailBound inv_square_tail(double L, double a, double cut);

}  // namespace polaron2d

#endif
