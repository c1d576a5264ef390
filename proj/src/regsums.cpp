#include "polaron2d/regsums.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polaron2d/errors.hpp"
#include "polaron2d/quad.hpp"
#include "polaron2d/stable_sum.hpp"
#include "polaron2d/tails.hpp"

namespace polaron2d {

namespace {

constexpr double kPi = 3.14159265358979323846;

ShellCache& default_cache() { return default_shell_cache(); }

void check_table_unit(const ModelParams& params, const ShellTable& table) {
  if (table.unit != params.unit()) {
    throw std::invalid_argument(
        "shell table unit does not match the model parameters");
  }
}

// The evaluation cutoff is derived from the request alone; the passed
// table is only a candidate carrier. A larger one is fetched on demand.
struct TableRef {
  const ShellTable* table;
  std::shared_ptr<const ShellTable> keep;
};

TableRef resolve_table(const ModelParams& params, const ShellTable& table,
                       ShellCache* cache, std::int64_t n_req) {
  if (table.n_max >= n_req) return {&table, nullptr};
  ShellCache& c = cache ? *cache : default_cache();
  auto sp = c.get_at_least(params.unit(), n_req);
  return {sp.get(), std::move(sp)};
}

// n_max values above this would push the enumeration past the default
// memory budget; used to fail fast before attempting a build.
std::int64_t n_budget_limit() {
  return static_cast<std::int64_t>(kDefaultTableBudgetBytes / 5);
}

std::int64_t index_limit(const ShellTable& t, std::int64_t n_cut) {
  auto it = std::upper_bound(t.n.begin(), t.n.end(), n_cut);
  return static_cast<std::int64_t>(it - t.n.begin());
}

double shell_above_from(const ModelParams& params, const ShellTable& table,
                        ShellCache* cache) {
  const double unit = params.unit();
  std::int64_t n_need =
      static_cast<std::int64_t>(std::floor(params.mu / unit)) + 8;
  for (int attempt = 0; attempt < 8; ++attempt) {
    TableRef ref = resolve_table(params, table, cache, n_need);
    const std::size_t idx = ref.table->first_above(params.mu);
    if (idx < ref.table->size()) {
      return unit * static_cast<double>(ref.table->n[idx]);
    }
    n_need *= 2;
  }
  throw numeric_error("no shell found above mu; enumeration too short");
}

}  // namespace

double first_shell_above(const ShellTable& table, double mu) {
  const std::size_t idx = table.first_above(mu);
  if (idx >= table.size()) {
    throw std::out_of_range(
        "no enumerated shell above mu; rebuild the table with a larger "
        "cutoff");
  }
  return table.unit * static_cast<double>(table.n[idx]);
}

TruncatedSum g_mu(const ModelParams& params, const ShellTable& table,
                  double tau, double tol, ShellCache* cache) {
  params.validate();
  check_table_unit(params, table);
  if (!(tol > 0.0)) throw std::invalid_argument("g_mu: tol must be positive");
  if (!std::isfinite(tau)) throw std::domain_error("g_mu: tau must be finite");

  const double unit = params.unit();
  const double mu = params.mu;
  const double eb = params.E_B;
  const double inv_l2 = 1.0 / (params.L * params.L);

  const double s_above = shell_above_from(params, table, cache);
  if (!(tau > -s_above)) {
    std::ostringstream msg;
    msg << "g_mu: tau = " << tau
        << " is outside the summability domain; need tau > -s_above with "
           "s_above = "
        << s_above;
    throw std::domain_error(msg.str());
  }

  // tau = |E_B| kills every unoccupied term, leaving the exact finite sum.
  if (tau + eb == 0.0) {
    std::int64_t n_mu = static_cast<std::int64_t>(std::floor(mu / unit)) + 2;
    TableRef ref = resolve_table(params, table, cache, n_mu);
    const ShellTable& t = *ref.table;
    const std::size_t i_mu = t.first_above(mu);
    StableSum occ;
    for (std::size_t i = 0; i < i_mu; ++i) {
      const double s = unit * static_cast<double>(t.n[i]);
      occ.add(t.m[i] / (s - eb));
    }
    TruncatedSum r;
    r.value = occ.get() * inv_l2;
    r.tail_lo = 0.0;
    r.tail_hi = 0.0;
    r.cutoff = mu;
    return r;
  }

  // pick the cutoff from the request only: double n until the certified
  // tail width drops below tol
  const double floor_energy =
      std::max({2.0 * (mu + std::fabs(tau) + std::fabs(eb)),
                1.5 * s_above, 32.0 * unit});
  std::int64_t n_cut =
      static_cast<std::int64_t>(std::ceil(floor_energy / unit)) + 1;
  const std::int64_t n_limit = n_budget_limit();
  for (int iter = 0;; ++iter) {
    const double cut = (static_cast<double>(n_cut) + 0.5) * unit;
    if (2.0 * pair_resolvent_tail(params.L, -eb, tau, cut).radius <= tol)
      break;
    if (n_cut >= n_limit || iter > 80) {
      std::ostringstream msg;
      msg << "g_mu: tail tolerance " << tol
          << " needs shells beyond n_max = " << n_limit
          << ", exceeding the table memory budget of "
          << kDefaultTableBudgetBytes << " bytes";
      throw resource_error(msg.str());
    }
    n_cut = std::min(n_cut * 2, n_limit);
  }

  TableRef ref = resolve_table(params, table, cache, n_cut);
  const ShellTable& t = *ref.table;
  const double cut = (static_cast<double>(n_cut) + 0.5) * unit;

  const std::size_t i_mu = t.first_above(mu);
  const std::int64_t i_end = index_limit(t, n_cut);
  StableSum occ;
  for (std::size_t i = 0; i < i_mu; ++i) {
    const double s = unit * static_cast<double>(t.n[i]);
    occ.add(t.m[i] / (s - eb));
  }
  StableSum unocc;
  const double num = tau + eb;
  for (std::int64_t i = static_cast<std::int64_t>(i_mu); i < i_end; ++i) {
    const double s = unit * static_cast<double>(t.n[i]);
    unocc.add(t.m[i] * num / ((s - eb) * (s + tau)));
  }

  const TailBound tail = pair_resolvent_tail(params.L, -eb, tau, cut);
  TruncatedSum r;
  r.value = (occ.get() + unocc.get()) * inv_l2;
  r.tail_lo = tail.lo();
  r.tail_hi = tail.hi();
  r.cutoff = cut;
  return r;
}

double g_mu_truncated(const ModelParams& params, const ShellTable& table,
                      double tau, double n) {
  params.validate();
  check_table_unit(params, table);
  if (!(n >= 0.0)) throw std::domain_error("g_mu_truncated: n must be >= 0");
  if (n > table.cutoff()) {
    throw std::out_of_range(
        "g_mu_truncated: n exceeds the table cutoff; rebuild the table with "
        "a larger cutoff");
  }
  const double mu = params.mu;
  const double s_above = first_shell_above(table, mu);
  if (!(tau > -s_above)) {
    throw std::domain_error("g_mu_truncated: tau outside domain");
  }
  const double unit = params.unit();
  const double eb = params.E_B;
  const std::size_t i_occ = table.first_above(std::min(mu, n));
  const std::size_t i_n = table.first_above(n);
  StableSum sum;
  for (std::size_t i = 0; i < i_occ; ++i) {
    const double s = unit * static_cast<double>(table.n[i]);
    sum.add(table.m[i] / (s - eb));
  }
  const double num = tau + eb;
  for (std::size_t i = table.first_above(mu); i < i_n; ++i) {
    const double s = unit * static_cast<double>(table.n[i]);
    sum.add(table.m[i] * num / ((s - eb) * (s + tau)));
  }
  return sum.get() / (params.L * params.L);
}

SecularResult secular_sum(const ModelParams& params, const ShellTable& table,
                          double z, double tol, ShellCache* cache) {
  params.validate();
  check_table_unit(params, table);
  if (!(tol > 0.0))
    throw std::invalid_argument("secular_sum: tol must be positive");
  if (!std::isfinite(z))
    throw std::domain_error("secular_sum: z must be finite");

  const double unit = params.unit();
  const double eb = params.E_B;
  const double inv_l2 = 1.0 / (params.L * params.L);

  const double floor_energy =
      std::max(2.0 * (std::fabs(z) + std::fabs(eb)), 32.0 * unit);
  std::int64_t n_cut =
      static_cast<std::int64_t>(std::ceil(floor_energy / unit)) + 1;
  const std::int64_t n_limit = n_budget_limit();
  for (int iter = 0;; ++iter) {
    const double cut = (static_cast<double>(n_cut) + 0.5) * unit;
    if (2.0 * pair_resolvent_tail(params.L, -eb, -z, cut).radius <= tol)
      break;
    if (n_cut >= n_limit || iter > 80) {
      std::ostringstream msg;
      msg << "secular_sum: tail tolerance " << tol
          << " exceeds the table memory budget";
      throw resource_error(msg.str());
    }
    n_cut = std::min(n_cut * 2, n_limit);
  }

  TableRef ref = resolve_table(params, table, cache, n_cut);
  const ShellTable& t = *ref.table;

  // reject exact pole hits
  {
    const std::size_t idx = t.first_above(z);
    if (idx > 0) {
      const double s_at = unit * static_cast<double>(t.n[idx - 1]);
      if (s_at == z) {
        std::ostringstream msg;
        msg << "secular_sum: z = " << z << " lies on the shell n = "
            << t.n[idx - 1] << " (energy " << s_at << ")";
        throw std::domain_error(msg.str());
      }
    }
  }

  const double cut = (static_cast<double>(n_cut) + 0.5) * unit;
  const std::int64_t i_end = index_limit(t, n_cut);
  StableSum sum;
  StableSum sum_sq;
  for (std::int64_t i = 0; i < i_end; ++i) {
    const double s = unit * static_cast<double>(t.n[i]);
    const double dz = s - z;
    sum.add(t.m[i] * (eb - z) / ((s - eb) * dz));
    sum_sq.add(t.m[i] / (dz * dz));
  }

  const TailBound tail = pair_resolvent_tail(params.L, -eb, -z, cut);
  const TailBound tail_sq = inv_square_tail(params.L, -z, cut);

  SecularResult r;
  r.value.value = sum.get() * inv_l2;
  r.value.tail_lo = tail.lo();
  r.value.tail_hi = tail.hi();
  r.value.cutoff = cut;
  r.derivative.value = -sum_sq.get() * inv_l2;
  r.derivative.tail_lo = -tail_sq.hi();
  r.derivative.tail_hi = -tail_sq.lo();
  r.derivative.cutoff = cut;
  return r;
}

double secular_sum_truncated(const ModelParams& params,
                             const ShellTable& table, double z, double n) {
  params.validate();
  check_table_unit(params, table);
  if (!(n >= 0.0))
    throw std::domain_error("secular_sum_truncated: n must be >= 0");
  if (n > table.cutoff()) {
    throw std::out_of_range(
        "secular_sum_truncated: n exceeds the table cutoff; rebuild the "
        "table with a larger cutoff");
  }
  if (!std::isfinite(z))
    throw std::domain_error("secular_sum_truncated: z must be finite");
  const double unit = params.unit();
  const double eb = params.E_B;
  const std::size_t i_n = table.first_above(n);
  StableSum sum;
  for (std::size_t i = 0; i < i_n; ++i) {
    const double s = unit * static_cast<double>(table.n[i]);
    const double dz = s - z;
    if (dz == 0.0) {
      std::ostringstream msg;
      msg << "secular_sum_truncated: z = " << z << " lies on the shell n = "
          << table.n[i];
      throw std::domain_error(msg.str());
    }
    sum.add(table.m[i] * (eb - z) / ((s - eb) * dz));
  }
  return sum.get() / (params.L * params.L);
}

namespace {

// Best-effort probe of the declared contract: nonnegative and monotone
// non-increasing on [start, start + 2^26].
void probe_decreasing(const std::function<double(double)>& f, double start) {
  double t = start;
  double prev = f(t);
  if (!std::isfinite(prev) || prev < 0.0) {
    throw std::domain_error("riemann_check: f must be finite and >= 0");
  }
  double step = std::max(1.0, std::fabs(start));
  for (int k = 0; k < 27; ++k) {
    t = start + step;
    const double v = f(t);
    if (!std::isfinite(v) || v < 0.0) {
      throw std::domain_error("riemann_check: f must be finite and >= 0");
    }
    if (v > prev + 1e-12 * (1.0 + prev)) {
      throw std::domain_error(
          "riemann_check: sampled values of f are not non-increasing");
    }
    prev = v;
    step *= 2.0;
  }
}

struct LatticePart {
  double partial = 0.0;     // (1/L^2) sum over enumerated shells
  double tail_center = 0.0;
  double tail_radius = 0.0;
  double quad_error = 0.0;
};

// (1/L^2) sum over k^2 in (lo, inf) of f(k^2), enumerated up to a cutoff
// chosen so that the certified remainder drops below abs_target.
LatticePart lattice_sum_tailed(const std::function<double(double)>& f,
                               double L, double lo, double quad_tol,
                               double abs_target) {
  const double unit = (2.0 * kPi / L) * (2.0 * kPi / L);
  std::int64_t n_cut = std::max<std::int64_t>(
      64, static_cast<std::int64_t>(std::ceil(4.0 * (lo + 1.0) / unit)));
  const std::int64_t n_limit = n_budget_limit();
  LatticePart out;
  for (;;) {
    const double cut = (static_cast<double>(n_cut) + 0.5) * unit;
    const double fc = f(cut);
    QuadResult q1 = integrate_to_inf(
        [&f](double t) { return f(t * t); }, std::sqrt(cut), quad_tol * 0.1,
        abs_target * 0.1);
    const double radius = 2.0 / (kPi * L) * q1.value +
                          (4.0 * std::sqrt(cut) / (kPi * L) + 6.0 / (L * L)) *
                              fc +
                          2.0 / (kPi * L) * q1.error;
    if (radius <= abs_target || n_cut >= n_limit) {
      QuadResult qt = integrate_to_inf(
          [&f](double t) { return f(t * t) * t; }, std::sqrt(cut),
          quad_tol * 0.1, abs_target * 0.1);
      out.tail_center = qt.value / (2.0 * kPi);
      out.tail_radius = radius;
      out.quad_error = qt.error / (2.0 * kPi);
      break;
    }
    n_cut = std::min(n_cut * 2, n_limit);
  }
  auto table = default_cache().get_at_least(unit, n_cut);
  StableSum sum;
  const std::size_t i_lo = table->first_above(lo);  // shells with s > lo
  const std::int64_t i_end = index_limit(*table, n_cut);
  for (std::int64_t i = static_cast<std::int64_t>(i_lo); i < i_end; ++i) {
    const double s = unit * static_cast<double>(table->n[i]);
    sum.add(table->m[i] * f(s));
  }
  out.partial = sum.get() / (L * L);
  return out;
}

}  // namespace

BoundReport riemann_check_a(const std::function<double(double)>& f, double L,
                            double quad_tol) {
  if (!(L > 0.0)) throw std::domain_error("riemann_check_a: L must be > 0");
  if (!(quad_tol > 0.0))
    throw std::invalid_argument("riemann_check_a: quad_tol must be > 0");
  probe_decreasing(f, 0.0);

  QuadResult int_t = integrate_to_inf(
      [&f](double t) { return f(t * t) * t; }, 0.0, quad_tol, quad_tol * 0.01);
  QuadResult int_1 = integrate_to_inf(
      [&f](double t) { return f(t * t); }, 0.0, quad_tol, quad_tol * 0.01);

  const double rhs =
      2.0 / (kPi * L) * int_1.value + 3.0 * f(0.0) / (L * L);
  const double abs_target =
      std::max(quad_tol * std::max(rhs, 1e-6) * 0.25, 1e-15);
  LatticePart lat = lattice_sum_tailed(f, L, -1.0, quad_tol, abs_target);

  const double sum_mid = lat.partial + lat.tail_center;
  const double lhs = std::fabs(sum_mid - int_t.value / (2.0 * kPi));
  const double uncertainty = lat.tail_radius + lat.quad_error +
                             int_t.error / (2.0 * kPi) +
                             2.0 / (kPi * L) * int_1.error;
  return BoundReport::make(lhs, rhs, uncertainty);
}

BoundReport riemann_check_b(const std::function<double(double)>& f, double m,
                            double L, double quad_tol) {
  if (!(m > 0.0)) throw std::domain_error("riemann_check_b: m must be > 0");
  if (!(L > 0.0)) throw std::domain_error("riemann_check_b: L must be > 0");
  if (!(quad_tol > 0.0))
    throw std::invalid_argument("riemann_check_b: quad_tol must be > 0");
  probe_decreasing(f, m);

  const double root_m = std::sqrt(m);
  QuadResult int_t =
      integrate_to_inf([&f](double t) { return f(t * t) * t; }, root_m,
                       quad_tol, quad_tol * 0.01);
  QuadResult int_1 = integrate_to_inf(
      [&f](double t) { return f(t * t); }, root_m, quad_tol, quad_tol * 0.01);

  const double rhs = 2.0 / (kPi * L) * int_1.value +
                     (4.0 * root_m / (kPi * L) + 6.0 / (L * L)) * f(m);
  const double abs_target =
      std::max(quad_tol * std::max(rhs, 1e-6) * 0.25, 1e-15);
  LatticePart lat = lattice_sum_tailed(f, L, m, quad_tol, abs_target);

  const double sum_mid = lat.partial + lat.tail_center;
  const double lhs = std::fabs(sum_mid - int_t.value / (2.0 * kPi));
  const double uncertainty = lat.tail_radius + lat.quad_error +
                             int_t.error / (2.0 * kPi) +
                             2.0 / (kPi * L) * int_1.error;
  return BoundReport::make(lhs, rhs, uncertainty);
}

BoundReport g_mu_log_law(const ModelParams& params, const ShellTable& table,
                         double tau, double tol, ShellCache* cache) {
  params.validate();
  if (!(tau > -params.mu)) {
    throw std::domain_error(
        "g_mu_log_law: requires tau > -mu (stricter than the g_mu domain)");
  }
  const double mu_t = params.mu_tilde();
  const double l_t = params.L_tilde();
  const double tau_t = tau / std::fabs(params.E_B);

  TruncatedSum g = g_mu(params, table, tau, tol, cache);

  const double denom = mu_t + std::min(tau_t, 1.0);
  const double k_bound = 1.0 + 3.0 / l_t + 1.0 / std::sqrt(denom) +
                         (4.0 * std::sqrt(mu_t) / kPi + 6.0 / l_t) / denom;
  const double lhs = std::fabs(g.mid() - std::log(mu_t + tau_t) / (4.0 * kPi));
  return BoundReport::make(lhs, k_bound / l_t, g.radius());
}

}  // namespace polaron2d
