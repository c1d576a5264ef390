#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "polaron2d/cauchy_tree.hpp"
#include "polaron2d/params.hpp"
#include "polaron2d/shells.hpp"

namespace polaron2d {

// Value with a certified absolute half-width.
struct Enclosed {
  double value = 0.0;
  double radius = 0.0;
};

// Result of the occupied-shell resolvent sum
//   (1/L^2) sum_{s_q <= mu} m_q / (G(-s_q - e) - shift).
struct OccupiedSum {
  double sum = 0.0;
  double radius = 0.0;            // certified bound, exact path only
  double min_denom = 0.0;         // smallest denominator seen
  double min_denom_radius = 0.0;  // G half-width at that denominator
  bool all_positive = true;       // false once a denominator <= 0 appears
};

// Per-solve evaluation engine over one shell table.  Everything runs in
// reduced units n = k^2/unit with the binding energy at b = E_B/unit < 0;
// shells are integer positions with multiplicity weights, compressed into
// one Cauchy tree that serves the scatterer sum G, its derivative, and the
// secular function S.  Sums beyond the table cutoff enter through
// closed-form tail enclosures, so every certified output carries a radius.
//
// The unoccupied resolvent sum B(t) = sum_{n > n_F} m/(n + t) is also
// interpolated on lazily built Chebyshev octave panels (poles sit at
// t <= -n_above while evaluation points keep t + n_above >= 1), which is
// what makes whole-Fermi-sea sums affordable inside root iterations.  The
// panel and tau_star caches mutate lazily: instances are single-owner, not
// thread-safe. Results depend only on (params, table contents, mu, query),
// never on call history.
class LatticeEvaluator {
 public:
  LatticeEvaluator(const ModelParams& params, const ShellTable& table,
                   double mu);

  // Scatterer sum G(tau), certified. Domain: tau > -s_above.
  Enclosed g(double tau) const;
  // Panel-accelerated G value, no radius; falls back to the exact path
  // when the query sits outside the panel region.
  double g_fast(double tau) const;
  // dG/dtau (tail center included, no radius; used for diagnostics only).
  double g_derivative(double tau) const;
  // Unique zero of G, cached after the first call. G < 0 left of it.
  double tau_star() const;

  // Occupied resolvent sum at energy shift e < 0 with denominators
  // G(-s_q - e) - shift. exact=false uses panels and sets radius = 0.
  // Stops early (all_positive = false) when a denominator is <= 0.
  OccupiedSum occupied_sum(double e, double shift, bool exact) const;

  // Exact G(-s_q - e) for every occupied shell, in shell order.
  std::vector<double> occupied_g(double e) const;

  // Secular function S(z) and S'(z) with radii; z must avoid the shell
  // energies exactly.
  struct SecularEval {
    double value = 0.0;
    double deriv = 0.0;
    double radius = 0.0;
    double deriv_radius = 0.0;
  };
  SecularEval secular(double z) const;

  // Reduced sums of m/(n - x) and m/(n - x)^2 over all shells except
  // indices j and j+1, plus truncation error bounds; the gap-root solver
  // adds those two terms explicitly in gap-local coordinates.
  struct GapRest {
    double inv = 0.0;
    double inv_sq = 0.0;
    double err_inv = 0.0;
    double err_sq = 0.0;
  };
  GapRest gap_rest(double x, std::size_t j) const;

  double unit() const { return unit_; }
  double inv_l2_unit() const { return inv_l2_unit_; }
  std::size_t i_mu() const { return i_mu_; }
  std::size_t i_end() const { return i_end_; }
  std::int64_t shell_n(std::size_t i) const { return table_->n[i]; }
  std::int32_t shell_m(std::size_t i) const { return table_->m[i]; }
  double shell_energy(std::size_t i) const {
    return unit_ * static_cast<double>(table_->n[i]);
  }
  double s_above() const { return s_above_; }
  double cut_energy() const { return cut_energy_; }
  double a_all() const { return a_occ_ + a_un_; }
  const ModelParams& params() const { return params_; }

 private:
  struct Panel {
    double lo = 0.0, hi = 0.0;
    std::vector<double> coef;
    bool direct = false;  // verification failed: evaluate exactly instead
  };

  double b_un_exact(double t, double* err = nullptr) const;
  double b_un_fast(double t) const;
  const Panel& ensure_panel(int octave) const;
  double tail_center(double tau) const;

  ModelParams params_;
  const ShellTable* table_;
  double mu_ = 0.0;
  double unit_ = 0.0;
  double b_ = 0.0;             // E_B / unit
  double inv_l2_ = 0.0;        // 1/L^2
  double inv_l2_unit_ = 0.0;   // 1/(L^2 unit), the reduced-sum scale
  std::size_t i_mu_ = 0;       // first unoccupied shell index
  std::size_t i_end_ = 0;      // shells participating (whole table)
  double n_above_ = 0.0;       // position of the first unoccupied shell
  double s_above_ = 0.0;
  double cut_energy_ = 0.0;    // tail boundary (n_max + 1/2) unit
  double a_occ_ = 0.0;         // sum_occ m/(n - b)
  double a_un_ = 0.0;          // sum_unocc m/(n - b)
  CauchyTree tree_;
  mutable std::vector<std::unique_ptr<Panel>> panels_;
  mutable double tau_star_ = 0.0;
  mutable bool tau_star_ready_ = false;
};

}  // namespace polaron2d
