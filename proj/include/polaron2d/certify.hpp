#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "polaron2d/params.hpp"
#include "polaron2d/shells.hpp"

namespace polaron2d {

// Failure class of one certification point, for exit-code mapping.
enum class PointError { none, usage, certification, numeric };

// Certified sandwich lower_shift <= exact_shift <= upper_shift for one
// parameter point, with the quantities that justify it.
struct Enclosure {
  ModelParams params{};
  bool ok = false;          // point evaluated end to end
  PointError kind = PointError::none;
  std::string error;        // populated when !ok

  bool feasible = false;    // gap hypothesis held, lower bound is the
                            // perturbed root rather than E_B - mu
  double lower_shift = std::numeric_limits<double>::quiet_NaN();
  double exact_shift = std::numeric_limits<double>::quiet_NaN();
  double upper_shift = std::numeric_limits<double>::quiet_NaN();

  // |exact - upper| sqrt(log mu_t)/|upper| and
  // |upper log(mu_t)/mu + 1| log(mu_t)/loglog(mu_t); NaN when mu_t <= e
  double theorem_ratio = std::numeric_limits<double>::quiet_NaN();
  double polaron_ratio = std::numeric_limits<double>::quiet_NaN();

  std::int64_t n_fermions = 0;
  double e0 = std::numeric_limits<double>::quiet_NaN();
  double r_bar = std::numeric_limits<double>::quiet_NaN();
  double gap_lhs = std::numeric_limits<double>::quiet_NaN();
  double gap_rhs = std::numeric_limits<double>::quiet_NaN();
  double lower_unc = 0.0;
  double exact_unc = 0.0;
  double upper_unc = 0.0;
};

// Full pipeline for one point: shared table at the policy cutoff, upper
// bound from the polaron equation, exact shift from the gap roots, lower
// bound from the perturbed equation when the gap hypothesis certifies,
// else the unconditional one.  Throws with a stage-labelled message on
// failure; a violated sandwich throws certification_error.
Enclosure enclose(const ModelParams& params, double tol,
                  ShellCache* cache = nullptr);

// True when the recorded bounds contradict each other beyond their
// combined uncertainties.  enclose never returns such a record (it
// throws); this is for re-validating stored or transformed results.
bool sandwich_violated(const Enclosure& enc);

// enclose over a grid with a fixed-size worker pool.  Per-point failures
// land in the records, not in exceptions.  Results are in input order and
// independent of parallelism.
std::vector<Enclosure> sweep(const std::vector<ModelParams>& grid, double tol,
                             int parallelism, ShellCache* cache = nullptr);

// Largest observed (theorem_ratio, polaron_ratio) over a sweep; requires
// at least three feasible points so the envelope means something.
std::pair<double, double> fit_constants(const std::vector<Enclosure>& encs);

}  // namespace polaron2d
