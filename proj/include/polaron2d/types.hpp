#ifndef POLARON2D_TYPES_HPP
#define POLARON2D_TYPES_HPP

#include <cmath>

namespace polaron2d {

// Partial sum plus a certified enclosure of the omitted tail.
// The true infinite sum lies in [value + tail_lo, value + tail_hi].
struct TruncatedSum {
  double value = 0.0;
  double tail_lo = 0.0;
  double tail_hi = 0.0;
  double cutoff = 0.0;   // largest energy included in the partial sum

  double lo() const { return value + tail_lo; }
  double hi() const { return value + tail_hi; }
  double mid() const { return value + 0.5 * (tail_lo + tail_hi); }
  double width() const { return tail_hi - tail_lo; }
  // half-width of the enclosure around mid(); the worst-case numeric
  // uncertainty attached to this sum
  double radius() const { return 0.5 * (tail_hi - tail_lo); }

  bool contains(double x) const { return x >= lo() && x <= hi(); }
};

// Outcome of checking an inequality lhs <= rhs whose sides carry
// evaluation uncertainty (tail widths, quadrature error).
// holds accounts for that uncertainty: lhs <= rhs + uncertainty.
struct BoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  double slack = 0.0;          // rhs - lhs
  double uncertainty = 0.0;    // aggregated evaluation uncertainty

  static BoundReport make(double lhs, double rhs, double uncertainty) {
    BoundReport r;
    r.lhs = lhs;
    r.rhs = rhs;
    r.uncertainty = uncertainty;
    r.slack = rhs - lhs;
    r.holds = lhs <= rhs + uncertainty;
    return r;
  }
};

}  // namespace polaron2d

#endif
