#include "polaron2d/polaron.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "polaron2d/errors.hpp"
#include "polaron2d/evaluators.hpp"
#include "polaron2d/regsums.hpp"
#include "polaron2d/stable_sum.hpp"
#include "polaron2d/tails.hpp"

namespace polaron2d {

namespace {

void check_solver_inputs(const ModelParams& params, const ShellTable& table,
                         double tol) {
  params.validate();
  if (!(tol > 0.0) || !std::isfinite(tol))
    throw std::invalid_argument("tol must be finite and > 0");
  if (table.unit != params.unit())
    throw std::invalid_argument("table was built for a different unit");
  if (!(table.cutoff() > params.mu))
    throw std::out_of_range("table cutoff " + std::to_string(table.cutoff()) +
                            " does not exceed mu = " +
                            std::to_string(params.mu));
}

// Root driver shared by the plain and perturbed equations: the function
// e -> e + positive-sum is strictly increasing with slope >= 1 wherever
// all denominators stay positive, so a sign bracket pins a unique root.
struct RootState {
  double lo = 0.0, f_lo = 0.0;
  double hi = 0.0, f_hi = 0.0;
  int evaluations = 0;
};

// Narrows [lo, hi] with bisection plus guarded secant until the width
// drops below rel_width * |e|.  eval returns +inf past a pole; such
// points count as the positive side.
template <typename Eval>
void narrow_bracket(RootState& st, Eval&& eval, double rel_width) {
  for (int it = 0; it < 200; ++it) {
    const double width = st.hi - st.lo;
    const double scale = std::max(-st.lo, -st.hi);
    if (!(width > rel_width * scale)) break;
    double cand = st.lo + 0.5 * width;
    if (std::isfinite(st.f_hi) && st.f_hi > st.f_lo) {
      const double sec = st.lo - st.f_lo * width / (st.f_hi - st.f_lo);
      if (sec > st.lo + 0.05 * width && sec < st.hi - 0.05 * width)
        cand = sec;
    }
    const double f = eval(cand);
    ++st.evaluations;
    if (f < 0.0) {
      st.lo = cand;
      st.f_lo = f;
    } else {
      st.hi = cand;
      st.f_hi = f;
    }
  }
}

}  // namespace

PolaronSolution solve_polaron(const ModelParams& params,
                              const ShellTable& table, double tol) {
  check_solver_inputs(params, table, tol);
  LatticeEvaluator ev(params, table, params.mu);

  RootState st;
  auto f_fast = [&](double e) {
    const OccupiedSum o = ev.occupied_sum(e, 0.0, false);
    return o.all_positive ? e + o.sum
                          : std::numeric_limits<double>::infinity();
  };

  const double e_lo = params.E_B - params.mu;
  const double s_top = ev.shell_energy(ev.i_mu() - 1);
  const double e_hi = std::min(0.0, -s_top - ev.tau_star());
  if (!(e_hi > e_lo))
    throw numeric_error("polaron: search segment collapsed");

  double f_base = f_fast(e_lo);
  ++st.evaluations;
  if (!(f_base < 0.0))
    throw numeric_error("polaron: F(" + std::to_string(e_lo) +
                        ") = " + std::to_string(f_base) +
                        " is not negative at the segment base");

  // Log-spaced probes from the base toward the segment end; the root is
  // unique, so the first non-negative probe closes a bracket.
  const double abs_lo = -e_lo;
  const double abs_end = std::max(-e_hi, 1e-8 * abs_lo);
  const double ratio = std::pow(abs_end / abs_lo, 1.0 / 63.0);
  double prev = e_lo, f_prev = f_base;
  bool have = false;
  for (int k = 1; k <= 63 && !have; ++k) {
    const double e = -abs_lo * std::pow(ratio, k);
    if (!(e > prev)) continue;
    const double f = f_fast(e);
    ++st.evaluations;
    if (f < 0.0) {
      prev = e;
      f_prev = f;
    } else {
      st.lo = prev;
      st.f_lo = f_prev;
      st.hi = e;
      st.f_hi = f;
      have = true;
    }
  }
  // All probes negative: creep toward the pole end, where F diverges to
  // +infinity, halving the remaining distance each time.
  for (int j = 1; j <= 60 && !have && e_hi < 0.0; ++j) {
    const double e = e_hi - (e_hi - prev) * std::ldexp(1.0, -j);
    if (!(e > prev)) break;
    const double f = f_fast(e);
    ++st.evaluations;
    if (f < 0.0) {
      prev = e;
      f_prev = f;
    } else {
      st.lo = prev;
      st.f_lo = f_prev;
      st.hi = e;
      st.f_hi = f;
      have = true;
    }
  }
  if (!have)
    throw numeric_error(
        "polaron: no sign change located on (" + std::to_string(e_lo) + ", " +
        std::to_string(e_hi) + "); F stays negative");

  narrow_bracket(st, f_fast, 1e-9);

  // Certified refinement: exact-path evaluations with secant steps.  The
  // slope bound F' >= 1 caps each correction by the residual itself.
  double e_cur = 0.5 * (st.lo + st.hi);
  OccupiedSum oc = ev.occupied_sum(e_cur, 0.0, true);
  ++st.evaluations;
  if (!oc.all_positive)
    throw numeric_error("polaron: exact evaluation landed past a pole");
  double f_cur = e_cur + oc.sum;
  double e_prev = e_cur, f_prev_x = f_cur;
  bool have_pair = false;
  for (int it = 0; it < 12 && std::fabs(f_cur) > 0.25 * tol * std::fabs(e_cur);
       ++it) {
    double step = -f_cur;
    if (have_pair && f_cur != f_prev_x) {
      const double sec = -f_cur * (e_cur - e_prev) / (f_cur - f_prev_x);
      if (std::fabs(sec) < std::fabs(step)) step = sec;
    }
    const double e_next = e_cur + step;
    if (!(e_next > e_lo) || !(e_next < 0.0) || e_next == e_cur) break;
    e_prev = e_cur;
    f_prev_x = f_cur;
    have_pair = true;
    e_cur = e_next;
    oc = ev.occupied_sum(e_cur, 0.0, true);
    ++st.evaluations;
    if (!oc.all_positive)
      throw numeric_error("polaron: refinement stepped past a pole");
    f_cur = e_cur + oc.sum;
  }
  if (!(std::fabs(f_cur) <= tol * std::fabs(e_cur)))
    throw precision_error(
        "polaron: residual " + std::to_string(std::fabs(f_cur)) +
        " exceeds tol*|e_p| = " + std::to_string(tol * std::fabs(e_cur)) +
        "; requested tolerance is below the attainable floor");

  PolaronSolution out;
  out.e_p = e_cur;
  out.residual = std::fabs(f_cur);
  out.bracket = {std::min(st.lo, e_cur), std::max(st.hi, e_cur)};
  out.evaluations = st.evaluations;
  out.tol = tol;
  out.uncertainty = std::fabs(f_cur) + oc.radius;
  return out;
}

double polaron_asymptote(const ModelParams& params) {
  params.validate();
  const double mt = params.mu_tilde();
  if (!(mt > 1.0))
    throw std::domain_error("polaron_asymptote: needs mu_tilde > 1, got " +
                            std::to_string(mt));
  return -params.mu / std::log(mt);
}

double naive_lower_shift(const ModelParams& params) {
  params.validate();
  return params.E_B - params.mu;
}

RBarBound r_bar(const ModelParams& params, const ShellTable& table,
                double e_p, double tol) {
  check_solver_inputs(params, table, tol);
  if (!(e_p < 0.0) || !std::isfinite(e_p))
    throw std::domain_error("r_bar: e_p must be finite and < 0");

  const double inv_l2 = 1.0 / (params.L * params.L);
  RBarBound out;
  out.eta_norm_sq =
      static_cast<double>(count_fermions(table, params.mu)) * inv_l2;

  // Hole-propagator norm: sum of (k^2 - mu + |e_p|)^{-2} over k^2 > mu,
  // shell partial sum plus an upper tail enclosure.  The shifted family
  // (k^2 + a)^{-2} with a = |e_p| - mu has no pole beyond mu.
  const double a = -e_p - params.mu;
  const double unit = params.unit();
  const std::size_t i_mu = table.first_above(params.mu);
  std::int64_t n_c = std::min(
      table.n_max,
      std::max(table.n[i_mu] + 64,
               2 * static_cast<std::int64_t>(std::ceil(params.mu / unit)) +
                   64));
  StableSum partial;
  std::size_t i = i_mu;
  TailBound tail;
  for (;;) {
    for (; i < table.size() && table.n[i] <= n_c; ++i) {
      const double s = unit * static_cast<double>(table.n[i]);
      const double d = s + a;
      partial.add(static_cast<double>(table.m[i]) / (d * d));
    }
    const double cut = (static_cast<double>(n_c) + 0.5) * unit;
    tail = inv_square_tail(params.L, a, cut);
    const double bound = partial.get() * inv_l2 + tail.hi();
    if (2.0 * tail.radius <= tol * bound || n_c >= table.n_max) break;
    n_c = std::min(2 * n_c, table.n_max);
  }
  out.a_norm_sq_bound = (partial.get() * inv_l2 + tail.hi()) * (1.0 + 1e-13);
  out.r_bar = 2.0 * std::sqrt(out.eta_norm_sq * out.a_norm_sq_bound);
  return out;
}

BoundReport check_gap_hypothesis(const ModelParams& params,
                                 const ShellTable& table, double e_p,
                                 const RBarBound& rbar, double tol,
                                 ShellCache* cache) {
  check_solver_inputs(params, table, tol);
  if (!(e_p < 0.0) || !std::isfinite(e_p))
    throw std::domain_error("check_gap_hypothesis: e_p must be < 0");
  if (!(rbar.r_bar >= 0.0) || !std::isfinite(rbar.r_bar))
    throw std::domain_error("check_gap_hypothesis: r_bar must be >= 0");

  const double tau = -params.mu - e_p;
  const TruncatedSum g = g_mu(params, table, tau, tol, cache);
  BoundReport rep;
  rep.lhs = rbar.r_bar;
  rep.rhs = g.lo();  // certified lower bound, so strictness is rigorous
  rep.uncertainty = g.radius();
  rep.slack = rep.rhs - rep.lhs;
  rep.holds = rep.lhs < rep.rhs;
  return rep;
}

PerturbedSolution solve_perturbed_polaron(const ModelParams& params,
                                          const ShellTable& table,
                                          const RBarBound& rbar, double e_p,
                                          double tol, ShellCache* cache) {
  check_solver_inputs(params, table, tol);
  if (!(e_p < 0.0) || !std::isfinite(e_p))
    throw std::domain_error("solve_perturbed_polaron: e_p must be < 0");

  const BoundReport gap =
      check_gap_hypothesis(params, table, e_p, rbar, std::max(tol, 1e-5),
                           cache);
  if (!gap.holds)
    throw infeasible_error(
        "perturbed equation: gap hypothesis fails, r_bar = " +
        std::to_string(rbar.r_bar) + " >= G lower bound " +
        std::to_string(gap.rhs));

  PerturbedSolution out;
  out.r_bar_used = rbar.r_bar;
  out.hypothesis_ok = true;
  if (rbar.r_bar == 0.0) {
    out.lambda_shift = e_p;
    return out;
  }

  LatticeEvaluator ev(params, table, params.mu);
  const double rb = rbar.r_bar;
  RootState st;
  auto f_fast = [&](double e) {
    const OccupiedSum o = ev.occupied_sum(e, rb, false);
    return o.all_positive ? e + o.sum
                          : std::numeric_limits<double>::infinity();
  };

  // Denominators only grow to the left of e_p, so the equation is regular
  // on (-inf, e_p]; walk down from the unconditional bound until the sign
  // flips.
  const double f_top = f_fast(e_p);
  ++st.evaluations;
  if (!std::isfinite(f_top))
    throw precision_error(
        "perturbed equation: denominator not positive at e_p despite the "
        "gap hypothesis; enclosure too wide");
  double e_cur;
  if (f_top < 0.0) {
    // Phi(e_p) can only read negative through rounding noise; the root
    // coincides with e_p up to the certified residual checked below.
    e_cur = e_p;
  } else {
    double d = std::max(e_p - (params.E_B - params.mu), std::fabs(e_p));
    double hi = e_p, f_hi = f_top;
    double lo = e_p - d;
    double f_lo = f_fast(lo);
    ++st.evaluations;
    const double span_guard = 1e15 * (params.mu - params.E_B);
    while (!(f_lo < 0.0)) {
      hi = lo;
      f_hi = f_lo;
      d *= 2.0;
      lo = e_p - d;
      if (d > span_guard)
        throw numeric_error("perturbed equation: no sign change down to " +
                            std::to_string(lo));
      f_lo = f_fast(lo);
      ++st.evaluations;
    }
    st.lo = lo;
    st.f_lo = f_lo;
    st.hi = hi;
    st.f_hi = f_hi;
    narrow_bracket(st, f_fast, 1e-9);
    e_cur = 0.5 * (st.lo + st.hi);
    if (!(e_cur < 0.0)) e_cur = std::min(st.lo, e_p);
  }
  OccupiedSum oc = ev.occupied_sum(e_cur, rb, true);
  ++st.evaluations;
  if (!oc.all_positive)
    throw precision_error("perturbed equation: exact path lost positivity");
  double f_cur = e_cur + oc.sum;
  double e_prev = e_cur, f_prev = f_cur;
  bool have_pair = false;
  for (int it = 0; it < 12 && std::fabs(f_cur) > 0.25 * tol * std::fabs(e_cur);
       ++it) {
    double step = -f_cur;
    if (have_pair && f_cur != f_prev) {
      const double sec = -f_cur * (e_cur - e_prev) / (f_cur - f_prev);
      if (std::fabs(sec) < std::fabs(step)) step = sec;
    }
    double e_next = e_cur + step;
    if (e_next > e_p) e_next = 0.5 * (e_cur + e_p);
    if (!(e_next < 0.0) || e_next == e_cur) break;
    e_prev = e_cur;
    f_prev = f_cur;
    have_pair = true;
    e_cur = e_next;
    oc = ev.occupied_sum(e_cur, rb, true);
    ++st.evaluations;
    if (!oc.all_positive)
      throw precision_error("perturbed equation: exact path lost positivity");
    f_cur = e_cur + oc.sum;
  }
  if (oc.min_denom <= 4.0 * oc.min_denom_radius)
    throw precision_error(
        "perturbed equation: smallest denominator " +
        std::to_string(oc.min_denom) +
        " is within enclosure width of zero at this table resolution");
  if (!(std::fabs(f_cur) <= tol * std::fabs(e_cur)))
    throw precision_error(
        "perturbed equation: residual " + std::to_string(std::fabs(f_cur)) +
        " exceeds tol*|root| after exact refinement");

  out.lambda_shift = std::min(e_cur, e_p);
  out.residual = std::fabs(f_cur);
  out.evaluations = st.evaluations;
  out.uncertainty = std::fabs(f_cur) + oc.radius;
  return out;
}

std::int64_t solver_cutoff(const ModelParams& params, double tol) {
  params.validate();
  if (!(tol > 0.0) || !std::isfinite(tol))
    throw std::invalid_argument("solver_cutoff: tol must be > 0");
  const double unit = params.unit();
  const std::int64_t floor_res =
      static_cast<std::int64_t>(std::ceil(4.0 * params.mu / unit)) + 4096;
  const std::int64_t floor_dom = static_cast<std::int64_t>(std::ceil(
                                     (params.mu - 2.0 * params.E_B) / unit)) +
                                 64;
  constexpr std::int64_t kCap = 10'000'000;
  // Worst-case pair-tail half-width over the tau range the solvers visit.
  const double b_probe = params.mu - 2.0 * params.E_B;
  std::int64_t n = std::max<std::int64_t>(floor_dom, 32);
  while (n < kCap) {
    const double cut = (static_cast<double>(n) + 0.5) * unit;
    if (cut > b_probe &&
        2.0 * pair_resolvent_tail(params.L, -params.E_B, b_probe, cut)
                  .radius <=
            tol)
      break;
    n = std::min(2 * n, kCap);
  }
  return std::max({floor_res, floor_dom, n});
}

}  // namespace polaron2d
