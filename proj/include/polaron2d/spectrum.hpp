#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "polaron2d/params.hpp"
#include "polaron2d/shells.hpp"

namespace polaron2d {

// Lowest N(mu) eigenvalues of the one-body operator with the scatterer
// attached: the bound state at E_B, one displaced root inside each gap
// between consecutive occupied shells, and the unmoved degenerate copies.
struct SpectrumResult {
  // (value, multiplicity), ascending, multiplicities summing to n_used
  std::vector<std::pair<double, std::int64_t>> eigenvalues;
  std::int64_t n_used = 0;   // N(mu), the particle count
  double e_total = 0.0;      // filled-sea energy of the listed levels
  double shift_total = 0.0;  // e_total - free sea energy, gap-local form
  bool interlacing_ok = false;
  double uncertainty = 0.0;  // bound on |shift error| from tail widths
  double naive_shift = 0.0;  // direct big-minus-big difference, diagnostic
  double condition = 0.0;    // |E|+|E0| over |shift|: cancellation factor
  double max_residual = 0.0; // largest |S| at an accepted root
};

// Solves the secular equation in every occupied gap of the given table.
// The table cutoff is the truncation scheme; a larger table moves the
// roots only through the shrinking tail enclosure, which is reported as
// uncertainty.  pre: at least two shells above mu.
SpectrumResult one_body_spectrum(const ModelParams& params,
                                 const ShellTable& table, double mu,
                                 double tol);

// shift_total of the spectrum above: E_B plus the sum of in-gap root
// displacements, each negative of size below one level spacing.
double exact_shift(const ModelParams& params, const ShellTable& table,
                   double mu, double tol);

// Hole-sector matrix at a trial energy shift lambda < 0:
//   M = diag(G(-s_q - lambda)) - w 11^T,  w = 1/(L^2 (-lambda)),
// one row per occupied shell, multiplicities kept alongside.
struct SectorMatrix {
  std::vector<std::pair<double, std::int32_t>> holes;  // (s_q, m_q)
  std::vector<double> diag;
  double rank_one_weight = 0.0;
};
SectorMatrix sector_matrix(const ModelParams& params, const ShellTable& table,
                           double lambda_shift);

// Lowest eigenvalue of the sector matrix: the unique root x < min diag of
// w * sum m_q /(d_q - x) = 1.  Nonpositive at a certified lambda.
double chevy_sector_lowest(const ModelParams& params, const ShellTable& table,
                           double lambda_shift, double tol);

}  // namespace polaron2d
