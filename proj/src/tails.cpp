#include "polaron2d/tails.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace polaron2d {

namespace {
constexpr double kPi = 3.14159265358979323846;

void check_domain(double X, double a, const char* who) {
  if (!(X > 0.0) || !(X * X + a > 0.0)) {
    throw std::domain_error(std::string(who) +
                            ": requires X > 0 and X^2 + a > 0");
  }
}
}  // namespace

double inv_quad_integral(double X, double a) {
  check_domain(X, a, "inv_quad_integral");
  const double X2 = X * X;
  if (std::fabs(a) <= 0.5 * X2) {
    // J = (1/X) sum_k (-a/X^2)^k / (2k+1); the closed forms cancel badly
    // in this regime
    const double q = -a / X2;
    double term = 1.0 / X;
    double sum = term;
    for (int k = 1; k < 60; ++k) {
      term *= q;
      const double add = term / (2.0 * k + 1.0);
      sum += add;
      if (std::fabs(add) < 1e-18 * std::fabs(sum)) break;
    }
    return sum;
  }
  if (a > 0.0) {
    const double r = std::sqrt(a);
    return std::atan(r / X) / r;
  }
  const double r = std::sqrt(-a);
  // X > r here; log((X+r)/(X-r)) / (2r)
  return std::log1p(2.0 * r / (X - r)) / (2.0 * r);
}

double inv_quad_sq_integral(double X, double a) {
  check_domain(X, a, "inv_quad_sq_integral");
  const double X2 = X * X;
  if (std::fabs(a) <= 0.5 * X2) {
    // J2 = (1/X^3) sum_k (k+1)/(2k+3) (-a/X^2)^k
    const double q = -a / X2;
    double pw = 1.0;
    double sum = 1.0 / 3.0;
    for (int k = 1; k < 60; ++k) {
      pw *= q;
      const double add = (k + 1.0) / (2.0 * k + 3.0) * pw;
      sum += add;
      if (std::fabs(add) < 1e-18 * std::fabs(sum)) break;
    }
    return sum / (X2 * X);
  }
  if (a == 0.0) return 1.0 / (3.0 * X * X2);
  return (inv_quad_integral(X, a) - X / (X2 + a)) / (2.0 * a);
}

TailBound pair_resolvent_tail(double L, double a, double b, double cut) {
  if (!(cut + a > 0.0) || !(cut + b > 0.0)) {
    throw std::domain_error(
        "pair_resolvent_tail: cut must exceed both poles");
  }
  if (a == b) return TailBound{};
  const double X = std::sqrt(cut);
  TailBound t;
  // radial integral of the summand, written without the (b-a) prefactor
  t.center = std::log1p((b - a) / (cut + a)) / (4.0 * kPi);
  const double c = b - a;
  const double g_cut = std::fabs(c) / ((cut + a) * (cut + b));
  const double int_dt =
      std::fabs(inv_quad_integral(X, a) - inv_quad_integral(X, b));
  t.radius = 2.0 / (kPi * L) * int_dt +
             (4.0 * X / (kPi * L) + 6.0 / (L * L)) * g_cut;
  return t;
}

TailBound inv_square_tail(double L, double a, double cut) {
  if (!(cut + a > 0.0)) {
    throw std::domain_error("inv_square_tail: cut must exceed the pole");
  }
  const double X = std::sqrt(cut);
  TailBound t;
  t.center = 1.0 / (4.0 * kPi * (cut + a));
  const double g_cut = 1.0 / ((cut + a) * (cut + a));
  t.radius = 2.0 / (kPi * L) * inv_quad_sq_integral(X, a) +
             (4.0 * X / (kPi * L) + 6.0 / (L * L)) * g_cut;
  return t;
}

}  // namespace polaron2d
