#include "polaron2d/quad.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "polaron2d/errors.hpp"

namespace polaron2d {

namespace {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK dqk15 constants).
const double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
const double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
const double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, err;
  bool operator<(const Panel& o) const { return err < o.err; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = kWgk[7] * fc;
  double resg = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[j];
    const double fsum = f(c - x) + f(c + x);
    resk += kWgk[j] * fsum;
    if (j % 2 == 1) resg += kWg[j / 2] * fsum;
  }
  Panel p;
  p.a = a;
  p.b = b;
  p.value = resk * h;
  // |K15 - G7| overestimates the Kronrod error once the panel resolves f,
  // which keeps the enclosure on the safe side
  p.err = std::fabs((resk - resg) * h);
  return p;
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a,
                     double b, double rel_tol, double abs_tol) {
  if (a == b) return {0.0, 0.0};
  std::priority_queue<Panel> heap;
  Panel first = gk15(f, a, b);
  double total = first.value;
  double err = first.err;
  heap.push(first);
  const int kMaxPanels = 4000;
  int used = 1;
  while (err > std::max(abs_tol, rel_tol * std::fabs(total)) &&
         used < kMaxPanels) {
    Panel worst = heap.top();
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    if (m <= worst.a || m >= worst.b) break;  // at rounding resolution
    Panel left = gk15(f, worst.a, m);
    Panel right = gk15(f, m, worst.b);
    total += left.value + right.value - worst.value;
    err += left.err + right.err - worst.err;
    heap.push(left);
    heap.push(right);
    ++used;
  }
  if (err > std::max(abs_tol, rel_tol * std::fabs(total)) &&
      used >= kMaxPanels) {
    throw numeric_error("quadrature did not converge within the panel budget");
  }
  if (!std::isfinite(total)) {
    throw numeric_error("quadrature produced a non-finite value");
  }
  return {total, err};
}

QuadResult integrate_to_inf(const std::function<double(double)>& f, double a,
                            double rel_tol, double abs_tol) {
  // Panels [a + w (2^k - 1), a + w (2^{k+1} - 1)] with w = max(1, |a|).
  // For an eventually monotone decaying integrand, panel values eventually
  // fall geometrically; the remainder after stopping is then bounded by the
  // last panel value times the geometric factor, folded into the error.
  const double w = std::max(1.0, std::fabs(a));
  double lo = a;
  double total = 0.0;
  double err = 0.0;
  double prev = 0.0;
  int decaying = 0;
  const int kMaxSegments = 200;
  for (int k = 0; k < kMaxSegments; ++k) {
    const double hi = a + w * (std::ldexp(1.0, k + 1) - 1.0);
    QuadResult part = integrate(f, lo, hi, rel_tol * 0.25, abs_tol * 0.25);
    total += part.value;
    err += part.error;
    const double mag = std::fabs(part.value);
    if (k > 0) {
      if (mag <= 0.55 * prev || mag == 0.0) {
        ++decaying;
      } else {
        decaying = 0;
      }
    }
    prev = mag;
    const double goal = std::max(abs_tol, rel_tol * std::fabs(total));
    if (decaying >= 2 && mag < 0.25 * goal) {
      // remaining tail bounded by the geometric continuation of panels
      err += 2.0 * mag;
      return {total, err};
    }
    lo = hi;
  }
  throw numeric_error(
      "semi-infinite quadrature did not converge: integrand decays too "
      "slowly or is not integrable");
}

}  // namespace polaron2d
