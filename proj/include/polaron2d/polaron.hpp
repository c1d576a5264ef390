#pragma once

#include <cstdint>
#include <utility>

#include "polaron2d/params.hpp"
#include "polaron2d/shells.hpp"
#include "polaron2d/types.hpp"

namespace polaron2d {

// Root of F(e) = e + (1/L^2) sum_{s_q <= mu} m_q / G(-s_q - e) on the
// first pole-free segment above E_B - mu.  e_p is the upper bound on the
// ground-state energy shift.
struct PolaronSolution {
  double e_p = 0.0;
  double residual = 0.0;    // |F(e_p)| from the certified re-evaluation
  std::pair<double, double> bracket{0.0, 0.0};
  int evaluations = 0;
  double tol = 0.0;
  // bound on |e_p - true root| = (residual + sum radius) / min F', F' >= 1
  double uncertainty = 0.0;
};

// Solves F = 0 over the given table; the table cutoff is part of the
// truncation scheme, so the same table always reproduces the same root.
// pre: table built for params.unit(), cutoff above mu with at least one
// shell to spare.  post: |F(e_p)| <= tol * |e_p| on the exact path.
PolaronSolution solve_polaron(const ModelParams& params,
                              const ShellTable& table, double tol);

// Leading large-mu behavior -mu / log(mu_tilde); requires mu_tilde > 1.
double polaron_asymptote(const ModelParams& params);

// Unconditional lower bound on the shift: one bound charge cannot gain
// more than E_B - mu.
double naive_lower_shift(const ModelParams& params);

// Certified upper bound r_bar on the coupling norm that controls the
// perturbed fixed-point equation:
//   r_bar = 2 sqrt(eta_norm_sq * a_norm_sq_bound),
//   eta_norm_sq = N(mu)/L^2,
//   a_norm_sq_bound >= (1/L^2) sum_{k^2 > mu} (k^2 - mu + |e_p|)^{-2}.
struct RBarBound {
  double eta_norm_sq = 0.0;
  double a_norm_sq_bound = 0.0;
  double r_bar = 0.0;
};
RBarBound r_bar(const ModelParams& params, const ShellTable& table,
                double e_p, double tol);

// Spectral gap hypothesis: r_bar < G(-mu - e_p).  The right side enters
// through its certified lower bound, so holds = true is rigorous.
BoundReport check_gap_hypothesis(const ModelParams& params,
                                 const ShellTable& table, double e_p,
                                 const RBarBound& rbar, double tol,
                                 ShellCache* cache = nullptr);

// Root of Phi(e') = e' + (1/L^2) sum m_q / (G(-s_q - e') - r_bar),
// located in (E_B - mu - extension, e_p].  lambda_shift is the certified
// lower bound on the shift.  Throws infeasible_error when the gap
// hypothesis fails and precision_error when a denominator cannot be
// separated from zero at this table resolution.
struct PerturbedSolution {
  double lambda_shift = 0.0;
  double residual = 0.0;
  double r_bar_used = 0.0;
  bool hypothesis_ok = false;
  int evaluations = 0;
  double uncertainty = 0.0;
};
PerturbedSolution solve_perturbed_polaron(const ModelParams& params,
                                          const ShellTable& table,
                                          const RBarBound& rbar, double e_p,
                                          double tol,
                                          ShellCache* cache = nullptr);

// Shell cutoff (reduced units) that the certification driver requests for
// a given parameter point: generous multiples of mu for the solver sums
// plus whatever the pair tail needs to reach tol, capped at 1e7.
std::int64_t solver_cutoff(const ModelParams& params, double tol);

}  // namespace polaron2d
