#include "polaron2d/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "polaron2d/errors.hpp"
#include "polaron2d/evaluators.hpp"
#include "polaron2d/stable_sum.hpp"
#include "polaron2d/tails.hpp"

namespace polaron2d {

namespace {

constexpr double kFourPiSq = 4.0 * M_PI * M_PI;

void check_inputs(const ModelParams& params, const ShellTable& table,
                  double tol) {
  params.validate();
  if (!(tol > 0.0) || !std::isfinite(tol))
    throw std::invalid_argument("tol must be finite and > 0");
  if (table.unit != params.unit())
    throw std::invalid_argument("table was built for a different unit");
}

// One secular root in the gap between occupied shells j and j+1, solved
// in the offset d = n_{j+1} - x with d in (0, gap).  The scaled secular
// function there is
//   F(d) = C(x) - m_lo/(d - gap) - m_hi/d,
//   C(x) = a_all - rest(x) + pi log1p((E_B - z)/(cut - E_B)),
// strictly increasing from -inf to +inf.  Freezing C turns F = 0 into a
// quadratic whose (0, gap) root is the next iterate; C varies slowly
// across one gap, so this contracts in a handful of steps.
struct GapRoot {
  double d = 0.0;          // offset below the upper shell, in (0, gap)
  double delta = 0.0;      // bound on |d - true offset|
  double residual = 0.0;   // |S| at the accepted root
  bool inside = true;
};

GapRoot solve_gap(const LatticeEvaluator& ev, std::size_t j) {
  const double gap =
      static_cast<double>(ev.shell_n(j + 1) - ev.shell_n(j));
  const double m_lo = static_cast<double>(ev.shell_m(j));
  const double m_hi = static_cast<double>(ev.shell_m(j + 1));
  const double n_hi = static_cast<double>(ev.shell_n(j + 1));
  const double unit = ev.unit();
  const double eb = ev.params().E_B;
  const double cut = ev.cut_energy();

  double lo = 0.0, hi = gap;
  double d = gap * m_hi / (m_lo + m_hi);
  double f = 0.0, fp = 0.0, x = 0.0;
  LatticeEvaluator::GapRest rest;
  for (int it = 0; it < 60; ++it) {
    x = n_hi - d;
    const double z = unit * x;
    rest = ev.gap_rest(x, j);
    const double c =
        ev.a_all() - rest.inv + M_PI * std::log1p((eb - z) / (cut - eb));
    f = c - m_lo / (d - gap) - m_hi / d;
    fp = rest.inv_sq + m_lo / ((d - gap) * (d - gap)) + m_hi / (d * d) +
         M_PI * unit / (cut - z);
    if (f < 0.0)
      lo = d;
    else
      hi = d;
    // Stable roots of c t^2 - b t + k = 0; the bracket picks the branch.
    const double b = c * gap + m_lo + m_hi;
    const double k = m_hi * gap;
    const double disc = b * b - 4.0 * c * k;
    double next = 0.5 * (lo + hi);
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double split = (b >= 0.0) ? b + sq : b - sq;
      const double r1 = (split != 0.0)
                            ? 2.0 * k / split
                            : std::numeric_limits<double>::infinity();
      const double r2 =
          (c != 0.0) ? split / (2.0 * c)
                     : std::numeric_limits<double>::infinity();
      if (r1 > lo && r1 < hi)
        next = r1;
      else if (r2 > lo && r2 < hi)
        next = r2;
    }
    if (std::fabs(next - d) <= 1e-13 * gap) break;
    d = next;
  }
  // One Newton step off the point just evaluated polishes to the slope-
  // limited floor.
  double polished = d - f / fp;
  if (polished <= lo || polished >= hi) polished = std::clamp(d, lo, hi);
  GapRoot out;
  out.d = polished;
  out.inside = polished > 0.0 && polished < gap;
  const double z = unit * (n_hi - polished);
  const TailBound tail = pair_resolvent_tail(ev.params().L, -eb, -z, cut);
  const double err_f = rest.err_inv + kFourPiSq * tail.radius +
                       rest.inv_sq * std::fabs(x) * 2.2e-16;
  out.delta = err_f / fp;
  out.residual = std::fabs(f) / kFourPiSq;
  return out;
}

}  // namespace

SpectrumResult one_body_spectrum(const ModelParams& params,
                                 const ShellTable& table, double mu,
                                 double tol) {
  check_inputs(params, table, tol);
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw std::domain_error("one_body_spectrum: mu must be finite and > 0");
  const std::size_t i_mu = table.first_above(mu);
  if (i_mu + 2 > table.size())
    throw std::out_of_range(
        "one_body_spectrum: need at least two shells above mu, table "
        "cutoff " +
        std::to_string(table.cutoff()) + " is too low");

  LatticeEvaluator ev(params, table, mu);
  const double unit = params.unit();

  SpectrumResult out;
  out.n_used = count_fermions(table, mu);
  out.eigenvalues.reserve(2 * i_mu);
  out.eigenvalues.emplace_back(params.E_B, 1);

  StableSum d_sum;       // accumulated root offsets, reduced units
  StableSum delta_sum;   // their uncertainty bounds
  bool inside_all = params.E_B < 0.0;
  double max_res = 0.0;

  for (std::size_t j = 0; j + 1 < i_mu; ++j) {
    const GapRoot root = solve_gap(ev, j);
    inside_all = inside_all && root.inside;
    d_sum.add(root.d);
    delta_sum.add(root.delta);
    max_res = std::max(max_res, root.residual);

    if (ev.shell_m(j) > 1)
      out.eigenvalues.emplace_back(ev.shell_energy(j), ev.shell_m(j) - 1);
    const double zeta =
        unit * (static_cast<double>(ev.shell_n(j + 1)) - root.d);
    out.eigenvalues.emplace_back(zeta, 1);
  }
  const std::size_t top = i_mu - 1;
  if (ev.shell_m(top) > 1)
    out.eigenvalues.emplace_back(ev.shell_energy(top), ev.shell_m(top) - 1);

  std::int64_t listed = 0;
  for (const auto& lvl : out.eigenvalues) listed += lvl.second;
  if (listed != out.n_used)
    throw numeric_error("one_body_spectrum: level count " +
                        std::to_string(listed) + " does not match N = " +
                        std::to_string(out.n_used));

  out.shift_total = params.E_B - unit * d_sum.get();
  out.uncertainty = unit * delta_sum.get();
  out.interlacing_ok = inside_all;
  out.max_residual = max_res;

  const double e0 = fermi_sea_energy(table, mu);
  out.e_total = e0 + out.shift_total;
  StableSum naive;
  for (const auto& lvl : out.eigenvalues)
    naive.add(lvl.first * static_cast<double>(lvl.second));
  out.naive_shift = naive.get() - e0;
  out.condition = (std::fabs(naive.get()) + std::fabs(e0)) /
                  std::max(std::fabs(out.shift_total), 1e-300);
  return out;
}

double exact_shift(const ModelParams& params, const ShellTable& table,
                   double mu, double tol) {
  return one_body_spectrum(params, table, mu, tol).shift_total;
}

SectorMatrix sector_matrix(const ModelParams& params, const ShellTable& table,
                           double lambda_shift) {
  params.validate();
  if (table.unit != params.unit())
    throw std::invalid_argument("table was built for a different unit");
  if (!(lambda_shift < 0.0) || !std::isfinite(lambda_shift))
    throw std::domain_error("sector_matrix: lambda_shift must be < 0");
  LatticeEvaluator ev(params, table, params.mu);
  SectorMatrix out;
  out.diag = ev.occupied_g(lambda_shift);
  out.holes.reserve(ev.i_mu());
  for (std::size_t i = 0; i < ev.i_mu(); ++i)
    out.holes.emplace_back(ev.shell_energy(i), ev.shell_m(i));
  out.rank_one_weight =
      1.0 / (params.L * params.L * (-lambda_shift));
  return out;
}

double chevy_sector_lowest(const ModelParams& params, const ShellTable& table,
                           double lambda_shift, double tol) {
  check_inputs(params, table, tol);
  if (!(lambda_shift < 0.0) || !std::isfinite(lambda_shift))
    throw std::domain_error("chevy_sector_lowest: lambda_shift must be < 0");
  const SectorMatrix m = sector_matrix(params, table, lambda_shift);
  const double w = m.rank_one_weight;
  double d_min = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (double dq : m.diag) {
    d_min = std::min(d_min, dq);
    scale = std::max(scale, std::fabs(dq));
  }
  scale = std::max(scale, std::fabs(d_min));

  // phi(x) = w sum m_q/(d_q - x) rises from 0 to +inf on (-inf, d_min);
  // the lowest eigenvalue is the unique x with phi = 1.
  auto phi = [&](double x) {
    StableSum s;
    for (std::size_t i = 0; i < m.diag.size(); ++i)
      s.add(static_cast<double>(m.holes[i].second) / (m.diag[i] - x));
    return w * s.get();
  };

  double h = 0.5 * std::max(scale, w);
  double h_in = 0.0;  // phi >= 1 side, approaching d_min
  if (phi(d_min - h) >= 1.0) {
    h_in = h;
    int guard = 0;
    do {
      h *= 2.0;
      if (++guard > 400)
        throw numeric_error("sector eigenvalue: no phi < 1 point found");
    } while (phi(d_min - h) >= 1.0);
  } else {
    int guard = 0;
    for (;;) {
      h_in = 0.5 * h;
      if (phi(d_min - h_in) >= 1.0) break;
      h = h_in;
      if (++guard > 200 || !(h_in > 1e-13 * scale))
        throw precision_error(
            "sector eigenvalue: root not separable from the smallest "
            "diagonal entry");
    }
  }
  double lo = d_min - h, hi = d_min - h_in;
  double f_lo = phi(lo) - 1.0, f_hi = phi(hi) - 1.0;
  for (int it = 0; it < 200; ++it) {
    const double width = hi - lo;
    if (!(width > 1e-15 * std::max(scale, std::fabs(lo)))) break;
    double cand = lo + 0.5 * width;
    if (f_hi > f_lo) {
      const double sec = lo - f_lo * width / (f_hi - f_lo);
      if (sec > lo + 0.05 * width && sec < hi - 0.05 * width) cand = sec;
    }
    const double f = phi(cand) - 1.0;
    if (f < 0.0) {
      lo = cand;
      f_lo = f;
    } else {
      hi = cand;
      f_hi = f;
    }
  }
  const double x = 0.5 * (lo + hi);
  if (!(d_min - x > 1e-13 * scale))
    throw precision_error(
        "sector eigenvalue: root within rounding of a diagonal pole");
  return x;
}

}  // namespace polaron2d
