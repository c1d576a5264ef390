#include "polaron2d/certify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "polaron2d/errors.hpp"
#include "polaron2d/polaron.hpp"
#include "polaron2d/spectrum.hpp"

namespace polaron2d {

namespace {

// Reraises the active exception with a pipeline-stage prefix, keeping its
// type so callers can still map it to an exit class.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  auto tag = [&](const std::exception& e) {
    return std::string(name) + ": " + e.what();
  };
  try {
    return fn();
  } catch (const std::domain_error& e) {
    throw std::domain_error(tag(e));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(tag(e));
  } catch (const std::out_of_range& e) {
    throw std::out_of_range(tag(e));
  } catch (const certification_error& e) {
    throw certification_error(tag(e));
  } catch (const infeasible_error& e) {
    throw infeasible_error(tag(e));
  } catch (const precision_error& e) {
    throw precision_error(tag(e));
  } catch (const resource_error& e) {
    throw resource_error(tag(e));
  } catch (const numeric_error& e) {
    throw numeric_error(tag(e));
  }
}

void record_failure(Enclosure& enc, const ModelParams& params,
                    PointError kind, const char* what) {
  enc = Enclosure{};
  enc.params = params;
  enc.ok = false;
  enc.kind = kind;
  enc.error = what;
}

}  // namespace

Enclosure enclose(const ModelParams& params, double tol, ShellCache* cache) {
  params.validate();
  if (!(tol > 0.0) || !std::isfinite(tol))
    throw std::invalid_argument("enclose: tol must be finite and > 0");
  ShellCache& store = cache ? *cache : default_shell_cache();

  Enclosure enc;
  enc.params = params;

  const std::int64_t n_solve = solver_cutoff(params, tol);
  const auto table = stage("lattice", [&] {
    return store.get(params.unit(), n_solve);
  });

  const PolaronSolution ps =
      stage("upper bound", [&] { return solve_polaron(params, *table, tol); });
  enc.upper_shift = ps.e_p;
  enc.upper_unc = ps.uncertainty;

  const SpectrumResult sp = stage("spectrum", [&] {
    return one_body_spectrum(params, *table, params.mu, tol);
  });
  enc.exact_shift = sp.shift_total;
  enc.exact_unc = sp.uncertainty;
  enc.n_fermions = sp.n_used;
  enc.e0 = sp.e_total - sp.shift_total;

  // The coupling-norm bound saturates at the table cutoff well above the
  // relative accuracy of everything else, so it gets a floored tolerance;
  // it stays a valid upper bound at any tolerance.
  const RBarBound rb = stage("lower bound", [&] {
    return r_bar(params, *table, ps.e_p, std::max(tol, 1e-3));
  });
  enc.r_bar = rb.r_bar;
  const BoundReport gap = stage("lower bound", [&] {
    return check_gap_hypothesis(params, *table, ps.e_p, rb,
                                std::max(tol, 1e-5), &store);
  });
  enc.gap_lhs = gap.lhs;
  enc.gap_rhs = gap.rhs;
  if (gap.holds) {
    try {
      const PerturbedSolution pert = stage("lower bound", [&] {
        return solve_perturbed_polaron(params, *table, rb, ps.e_p, tol,
                                       &store);
      });
      enc.feasible = true;
      enc.lower_shift = pert.lambda_shift;
      enc.lower_unc = pert.uncertainty;
    } catch (const infeasible_error&) {
      enc.feasible = false;
    }
  }
  if (!enc.feasible) {
    enc.lower_shift = naive_lower_shift(params);
    enc.lower_unc = 0.0;
  }

  const double mt = params.mu_tilde();
  if (mt > M_E) {
    const double lg = std::log(mt);
    enc.theorem_ratio = std::fabs(enc.exact_shift - enc.upper_shift) *
                        std::sqrt(lg) / std::fabs(enc.upper_shift);
    enc.polaron_ratio = std::fabs(enc.upper_shift * lg / params.mu + 1.0) *
                        lg / std::log(lg);
  }

  enc.ok = true;
  if (sandwich_violated(enc)) {
    enc.ok = false;
    throw certification_error(
        "certify: bounds out of order beyond combined uncertainty: lower " +
        std::to_string(enc.lower_shift) + " (unc " +
        std::to_string(enc.lower_unc) + "), exact " +
        std::to_string(enc.exact_shift) + " (unc " +
        std::to_string(enc.exact_unc) + "), upper " +
        std::to_string(enc.upper_shift) + " (unc " +
        std::to_string(enc.upper_unc) + ")");
  }
  return enc;
}

bool sandwich_violated(const Enclosure& enc) {
  if (!std::isfinite(enc.lower_shift) || !std::isfinite(enc.exact_shift) ||
      !std::isfinite(enc.upper_shift))
    return true;
  if (enc.lower_shift - enc.exact_shift > enc.lower_unc + enc.exact_unc)
    return true;
  if (enc.exact_shift - enc.upper_shift > enc.exact_unc + enc.upper_unc)
    return true;
  return !(enc.upper_shift < 0.0);
}

std::vector<Enclosure> sweep(const std::vector<ModelParams>& grid, double tol,
                             int parallelism, ShellCache* cache) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
  if (parallelism < 1)
    throw std::invalid_argument("sweep: parallelism must be >= 1");
  ShellCache& store = cache ? *cache : default_shell_cache();

  std::vector<Enclosure> out(grid.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= grid.size()) return;
      try {
        out[i] = enclose(grid[i], tol, &store);
      } catch (const certification_error& e) {
        record_failure(out[i], grid[i], PointError::certification, e.what());
      } catch (const std::domain_error& e) {
        record_failure(out[i], grid[i], PointError::usage, e.what());
      } catch (const std::invalid_argument& e) {
        record_failure(out[i], grid[i], PointError::usage, e.what());
      } catch (const std::out_of_range& e) {
        record_failure(out[i], grid[i], PointError::usage, e.what());
      } catch (const std::exception& e) {
        record_failure(out[i], grid[i], PointError::numeric, e.what());
      }
    }
  };

  const int threads = static_cast<int>(std::min<std::size_t>(
      static_cast<std::size_t>(parallelism), grid.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

std::pair<double, double> fit_constants(const std::vector<Enclosure>& encs) {
  int feasible = 0;
  for (const auto& e : encs)
    if (e.ok && e.feasible) ++feasible;
  if (feasible < 3)
    throw std::invalid_argument(
        "fit_constants: need at least 3 feasible enclosures, got " +
        std::to_string(feasible));
  double c_theorem = 0.0, c_polaron = 0.0;
  for (const auto& e : encs) {
    if (!e.ok) continue;
    if (e.feasible && std::isfinite(e.theorem_ratio))
      c_theorem = std::max(c_theorem, e.theorem_ratio);
    if (std::isfinite(e.polaron_ratio))
      c_polaron = std::max(c_polaron, e.polaron_ratio);
  }
  return {c_theorem, c_polaron};
}

}  // namespace polaron2d
