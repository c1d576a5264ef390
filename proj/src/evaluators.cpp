#include "polaron2d/evaluators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "polaron2d/errors.hpp"
#include "polaron2d/stable_sum.hpp"
#include "polaron2d/tails.hpp"

namespace polaron2d {

namespace {

// Rounding slop for tree-assisted sums, as a multiple of the summed
// absolute mass: direct leaves accumulate at most 256 terms and the
// far-field Horner runs 48 terms, both in plain double.
constexpr double kSumSlop = 7e-14;

constexpr int kPanelDegree = 32;

double cheb_eval(const std::vector<double>& coef, double u) {
  // Series with halved first and last coefficients, matching the
  // type-I discrete cosine transform used to build them.
  double t0 = 1.0, t1 = u;
  double acc = 0.5 * coef[0] + coef[1] * u;
  for (int i = 2; i <= kPanelDegree; ++i) {
    const double t2 = 2.0 * u * t1 - t0;
    const double c = (i == kPanelDegree) ? 0.5 * coef[i] : coef[i];
    acc += c * t2;
    t0 = t1;
    t1 = t2;
  }
  return acc;
}

}  // namespace

LatticeEvaluator::LatticeEvaluator(const ModelParams& params,
                                   const ShellTable& table, double mu)
    : params_(params),
      table_(&table),
      mu_(mu),
      tree_({}, {}) {
  params.validate();
  if (table.unit != params.unit())
    throw std::invalid_argument(
        "LatticeEvaluator: table was built for a different lattice unit");
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw std::domain_error("LatticeEvaluator: mu must be finite and > 0");
  unit_ = params.unit();
  b_ = params.E_B / unit_;
  inv_l2_ = 1.0 / (params.L * params.L);
  inv_l2_unit_ = inv_l2_ / unit_;
  i_end_ = table.size();
  i_mu_ = table.first_above(mu);
  if (i_mu_ == 0)
    throw std::out_of_range("LatticeEvaluator: no occupied shell below mu");
  if (i_mu_ >= i_end_)
    throw std::out_of_range(
        "LatticeEvaluator: table cutoff " + std::to_string(table.cutoff()) +
        " leaves no shell above mu = " + std::to_string(mu));
  n_above_ = static_cast<double>(table.n[i_mu_]);
  s_above_ = unit_ * n_above_;
  cut_energy_ = (static_cast<double>(table.n_max) + 0.5) * unit_;

  std::vector<double> pos(i_end_);
  std::vector<double> wts(i_end_);
  StableSum occ, un;
  for (std::size_t i = 0; i < i_end_; ++i) {
    pos[i] = static_cast<double>(table.n[i]);
    wts[i] = static_cast<double>(table.m[i]);
    const double term = wts[i] / (pos[i] - b_);
    if (i < i_mu_)
      occ.add(term);
    else
      un.add(term);
  }
  a_occ_ = occ.get();
  a_un_ = un.get();
  tree_ = CauchyTree(std::move(pos), std::move(wts));
}

double LatticeEvaluator::b_un_exact(double t, double* err) const {
  double inv = 0.0, e_inv = 0.0;
  tree_.eval(-t, i_mu_, i_end_, &inv, nullptr, err ? &e_inv : nullptr,
             nullptr);
  if (err) *err = e_inv + kSumSlop * std::fabs(inv);
  return inv;
}

double LatticeEvaluator::tail_center(double tau) const {
  return std::log1p((tau + params_.E_B) / (cut_energy_ - params_.E_B)) /
         (4.0 * M_PI);
}

Enclosed LatticeEvaluator::g(double tau) const {
  if (!(tau > -s_above_))
    throw std::domain_error(
        "G(tau): tau = " + std::to_string(tau) +
        " is at or below the first unoccupied shell at -" +
        std::to_string(s_above_));
  double err = 0.0;
  const double bsum = b_un_exact(tau / unit_, &err);
  const TailBound tail =
      pair_resolvent_tail(params_.L, -params_.E_B, tau, cut_energy_);
  Enclosed out;
  out.value = (a_occ_ + a_un_ - bsum) * inv_l2_unit_ + tail.center;
  out.radius = err * inv_l2_unit_ + tail.radius +
               kSumSlop * (a_occ_ + a_un_) * inv_l2_unit_;
  return out;
}

double LatticeEvaluator::g_fast(double tau) const {
  const double t = tau / unit_;
  const double d = t + n_above_;
  if (!(d >= 1.0)) return g(tau).value;
  return (a_occ_ + a_un_ - b_un_fast(t)) * inv_l2_unit_ + tail_center(tau);
}

double LatticeEvaluator::g_derivative(double tau) const {
  if (!(tau > -s_above_))
    throw std::domain_error("G'(tau): tau at or below -s_above");
  double inv_sq = 0.0;
  tree_.eval(-tau / unit_, i_mu_, i_end_, nullptr, &inv_sq, nullptr, nullptr);
  const TailBound tail = inv_square_tail(params_.L, tau, cut_energy_);
  return inv_sq * inv_l2_unit_ / unit_ + tail.center;
}

double LatticeEvaluator::tau_star() const {
  if (tau_star_ready_) return tau_star_;
  // G is strictly increasing on (-s_above, inf), negative near the left
  // end (the first unoccupied term diverges) and positive at |E_B| where
  // the occupied prefix stands alone.  Walk left until the sign shows,
  // then bisect.
  double hi = -params_.E_B;
  double h = 0.5 * (s_above_ + hi);
  double lo = -s_above_ + h;
  int guard = 0;
  while (g(lo).value >= 0.0) {
    h *= 0.5;
    const double next = -s_above_ + h;
    if (!(next > -s_above_) || ++guard > 2000)
      throw numeric_error("tau_star: no sign change left of |E_B|");
    if (next < lo) lo = next;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid).value < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  tau_star_ = 0.5 * (lo + hi);
  tau_star_ready_ = true;
  return tau_star_;
}

const LatticeEvaluator::Panel& LatticeEvaluator::ensure_panel(
    int octave) const {
  if (octave < 0 || octave > 1100)
    throw numeric_error("occupied sum: panel octave out of range");
  if (panels_.size() <= static_cast<std::size_t>(octave))
    panels_.resize(static_cast<std::size_t>(octave) + 1);
  auto& slot = panels_[static_cast<std::size_t>(octave)];
  if (slot) return *slot;

  auto p = std::make_unique<Panel>();
  p->lo = std::ldexp(1.0, octave);
  p->hi = 2.0 * p->lo;
  const double mid = 0.5 * (p->lo + p->hi);
  const double half = 0.5 * (p->hi - p->lo);
  const int N = kPanelDegree;
  std::vector<double> f(N + 1);
  for (int j = 0; j <= N; ++j) {
    const double u = std::cos(M_PI * j / N);
    f[j] = b_un_exact(mid + half * u - n_above_);
  }
  p->coef.assign(N + 1, 0.0);
  for (int i = 0; i <= N; ++i) {
    double s = 0.5 * (f[0] + ((i % 2 == 0) ? f[N] : -f[N]));
    for (int j = 1; j < N; ++j) s += f[j] * std::cos(M_PI * i * j / N);
    p->coef[i] = 2.0 * s / N;
  }
  // Off-node probes; a miss downgrades the panel to exact evaluation.
  for (int j : {2, 13, 27}) {
    const double u = std::cos(M_PI * (2 * j + 1) / (2.0 * N));
    const double d = mid + half * u;
    const double exact = b_un_exact(d - n_above_);
    const double approx = cheb_eval(p->coef, u);
    if (!(std::fabs(approx - exact) <= 1e-9 * (std::fabs(exact) + 1.0))) {
      p->direct = true;
      break;
    }
  }
  slot = std::move(p);
  return *slot;
}

double LatticeEvaluator::b_un_fast(double t) const {
  const double d = t + n_above_;
  const Panel& p = ensure_panel(std::ilogb(d));
  if (p.direct) return b_un_exact(t);
  double u = (2.0 * d - (p.lo + p.hi)) / (p.hi - p.lo);
  if (u < -1.0) u = -1.0;
  if (u > 1.0) u = 1.0;
  return cheb_eval(p.coef, u);
}

OccupiedSum LatticeEvaluator::occupied_sum(double e, double shift,
                                           bool exact) const {
  if (!(e < 0.0) || !std::isfinite(e))
    throw std::domain_error("occupied sum: energy shift must be < 0, got " +
                            std::to_string(e));
  const double e_red = -e / unit_;
  OccupiedSum out;
  out.min_denom = std::numeric_limits<double>::infinity();
  StableSum acc;
  double rad = 0.0;
  for (std::size_t i = 0; i < i_mu_; ++i) {
    const double tau = -shell_energy(i) - e;
    double gv, gr = 0.0;
    if (exact) {
      const Enclosed ge = g(tau);
      gv = ge.value;
      gr = ge.radius;
    } else {
      const double t = e_red - static_cast<double>(table_->n[i]);
      if (t + n_above_ < 1.0) {
        gv = g(tau).value;
      } else {
        gv = (a_occ_ + a_un_ - b_un_fast(t)) * inv_l2_unit_ +
             tail_center(tau);
      }
    }
    const double denom = gv - shift;
    if (denom < out.min_denom) {
      out.min_denom = denom;
      out.min_denom_radius = gr;
    }
    if (!(denom > 0.0)) {
      out.all_positive = false;
      break;
    }
    const double m = static_cast<double>(table_->m[i]);
    acc.add(m / denom);
    if (exact) {
      const double denom_lo = denom - gr;
      if (denom_lo > 0.0)
        rad += m * gr / (denom * denom_lo);
      else
        rad = std::numeric_limits<double>::infinity();
    }
  }
  out.sum = acc.get() * inv_l2_;
  if (exact) out.radius = rad * inv_l2_ + 4e-15 * std::fabs(out.sum);
  return out;
}

std::vector<double> LatticeEvaluator::occupied_g(double e) const {
  if (!(e < 0.0) || !std::isfinite(e))
    throw std::domain_error("occupied G values: energy shift must be < 0");
  std::vector<double> out(i_mu_);
  for (std::size_t i = 0; i < i_mu_; ++i)
    out[i] = g(-shell_energy(i) - e).value;
  return out;
}

LatticeEvaluator::SecularEval LatticeEvaluator::secular(double z) const {
  if (!std::isfinite(z))
    throw std::domain_error("secular: z must be finite");
  const std::size_t i_z = table_->first_above(z);
  if (i_z > 0 && shell_energy(i_z - 1) == z)
    throw std::domain_error("secular: z coincides with shell energy " +
                            std::to_string(z));
  double inv = 0.0, inv_sq = 0.0, e_inv = 0.0, e_sq = 0.0;
  tree_.eval(z / unit_, 0, i_end_, &inv, &inv_sq, &e_inv, &e_sq);
  const TailBound tail =
      pair_resolvent_tail(params_.L, -params_.E_B, -z, cut_energy_);
  const TailBound sqtail = inv_square_tail(params_.L, -z, cut_energy_);
  SecularEval out;
  const double a_all = a_occ_ + a_un_;
  out.value = (a_all - inv) * inv_l2_unit_ + tail.center;
  out.radius = (e_inv + kSumSlop * (std::fabs(a_all) + std::fabs(inv))) *
                   inv_l2_unit_ +
               tail.radius;
  out.deriv = -(inv_sq * inv_l2_unit_ / unit_ + sqtail.center);
  out.deriv_radius =
      (e_sq + kSumSlop * inv_sq) * inv_l2_unit_ / unit_ + sqtail.radius;
  return out;
}

LatticeEvaluator::GapRest LatticeEvaluator::gap_rest(double x,
                                                     std::size_t j) const {
  GapRest out;
  double inv = 0.0, sq = 0.0, ei = 0.0, es = 0.0;
  tree_.eval(x, 0, j, &inv, &sq, &ei, &es);
  out.inv = inv;
  out.inv_sq = sq;
  out.err_inv = ei;
  out.err_sq = es;
  tree_.eval(x, j + 2, i_end_, &inv, &sq, &ei, &es);
  out.inv += inv;
  out.inv_sq += sq;
  out.err_inv += ei + kSumSlop * (std::fabs(out.inv) + std::fabs(inv));
  out.err_sq += es + kSumSlop * (out.inv_sq + sq);
  return out;
}

}  // namespace polaron2d
