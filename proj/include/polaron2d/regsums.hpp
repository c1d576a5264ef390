#ifndef POLARON2D_REGSUMS_HPP
#define POLARON2D_REGSUMS_HPP

#include <functional>

#include "polaron2d/params.hpp"
#include "polaron2d/shells.hpp"
#include "polaron2d/types.hpp"

namespace polaron2d {

// Regularized scatterer sum
//   G_mu(tau) = (1/L^2) sum_k [ 1/(k^2 - E_B) - chi(k^2 > mu)/(k^2 + tau) ],
// strictly increasing in tau on tau > -s_above, where s_above is the first
// shell energy exceeding mu. The evaluation cutoff is derived from
// (params, tau, tol) alone, so results are bit-identical regardless of the
// size of the table passed in; a larger table is built through `cache`
// (or a process-wide one) when needed.
// Errors: domain_error when tau <= -s_above; resource_error when the
// requested tolerance needs a table beyond the memory budget.
TruncatedSum g_mu(const ModelParams& params, const ShellTable& table,
                  double tau, double tol, ShellCache* cache = nullptr);

// The same sum truncated at k^2 <= n, no tail attached.
double g_mu_truncated(const ModelParams& params, const ShellTable& table,
                      double tau, double n);

struct SecularResult {
  TruncatedSum value;       // S(z)
  TruncatedSum derivative;  // S'(z) = -(1/L^2) sum m/(s-z)^2
};

// Secular sum S(z) = (1/L^2) sum_k [ 1/(k^2 - E_B) - 1/(k^2 - z) ].
// Its zeros away from the shell energies are the eigenvalues of the
// rank-one perturbed operator; S is strictly decreasing between
// consecutive poles. Throws domain_error when z hits a shell exactly.
SecularResult secular_sum(const ModelParams& params, const ShellTable& table,
                          double z, double tol, ShellCache* cache = nullptr);

// The secular sum truncated at k^2 <= n, no tail attached.  The truncated
// sum vanishes at z = E_B identically for every n.
double secular_sum_truncated(const ModelParams& params,
                             const ShellTable& table, double z, double n);

// Lattice-sum vs radial-integral comparison for a nonnegative monotone
// decreasing f on [0, inf):
//   lhs = |(1/L^2) sum_k f(k^2) - (1/2pi) int_0^inf f(t^2) t dt|
//   rhs = (2/(pi L)) int_0^inf f(t^2) dt + 3 f(0)/L^2.
// Monotonicity is probed on samples (best effort); non-integrable inputs
// surface as numeric_error from the quadrature.
BoundReport riemann_check_a(const std::function<double(double)>& f, double L,
                            double quad_tol);

// Variant for the sum restricted to k^2 > m (m > 0, boundary excluded):
//   rhs = (2/(pi L)) int_sqrt(m)^inf f(t^2) dt
//         + (4 sqrt(m)/(pi L) + 6/L^2) f(m).
BoundReport riemann_check_b(const std::function<double(double)>& f, double m,
                            double L, double quad_tol);

// Checks |G_mu(tau) - log(mu~ + tau~)/(4 pi)| <= K(tau~, mu~, L~)/L~ with
//   K = 1 + 3/L~ + 1/sqrt(mu~ + min(tau~,1))
//       + (4 sqrt(mu~)/pi + 6/L~)/(mu~ + min(tau~,1)).
// Requires tau > -mu, which is stricter than the g_mu domain.
BoundReport g_mu_log_law(const ModelParams& params, const ShellTable& table,
                         double tau, double tol, ShellCache* cache = nullptr);

// First shell energy strictly above mu; needs table.cutoff() > mu.
double first_shell_above(const ShellTable& table, double mu);

}  // namespace polaron2d

#endif
