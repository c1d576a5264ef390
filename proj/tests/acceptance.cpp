// Acceptance harness: one line per criterion, nonzero exit when any fails.
// Heavier grids than the unit tests; shares one shell cache across all
// criteria so tables built early are reused later.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "polaron2d/certify.hpp"
#include "polaron2d/errors.hpp"
#include "polaron2d/params.hpp"
#include "polaron2d/polaron.hpp"
#include "polaron2d/regsums.hpp"
#include "polaron2d/shells.hpp"
#include "polaron2d/spectrum.hpp"

using namespace polaron2d;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Ctx {
  ShellCache cache;
  std::vector<double> mts;          // canonical mu_tilde ladder
  std::vector<Enclosure> canonical; // filled by the first criterion
  double canonical_seconds = -1.0;
};

std::string fingerprint(const Enclosure& e) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%d|%d|%d|%.17g|%.17g|%.17g|%.17g|%.17g|%lld|%.17g|%.17g|"
                "%.17g|%.17g|%.17g|%.17g|%.17g",
                static_cast<int>(e.ok), static_cast<int>(e.kind),
                static_cast<int>(e.feasible), e.lower_shift, e.exact_shift,
                e.upper_shift, e.theorem_ratio, e.polaron_ratio,
                static_cast<long long>(e.n_fermions), e.e0, e.r_bar,
                e.gap_lhs, e.gap_rhs, e.lower_unc, e.exact_unc, e.upper_unc);
  return buf;
}

std::string fmt1(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

// ---- canonical grid ------------------------------------------------------

bool crit_canonical(Ctx& c, std::string& note) {
  c.mts.clear();
  for (int i = 0; i <= 8; ++i) c.mts.push_back(std::pow(10.0, 2.0 + 0.5 * i));
  std::vector<ModelParams> grid;
  for (double mt : c.mts)
    grid.push_back(ModelParams::dimensionless(mt, kTwoPi));

  const auto t0 = Clock::now();
  c.canonical = sweep(grid, 1e-10, 1, &c.cache);
  c.canonical_seconds = seconds_since(t0);

  bool ok = true;
  double worst_ratio = 1e300;
  for (const auto& e : c.canonical) {
    if (!e.ok) {
      note = "point mu~=" + fmt1("%.3g", e.params.mu_tilde()) +
             " failed: " + e.error;
      return false;
    }
    if (sandwich_violated(e)) {
      note = "sandwich violated at mu~=" + fmt1("%.3g", e.params.mu_tilde());
      return false;
    }
    const double m_up = e.upper_shift - e.exact_shift;
    const double m_lo = e.exact_shift - e.lower_shift;
    const double need_up = 10.0 * (e.upper_unc + e.exact_unc);
    const double need_lo = 10.0 * (e.lower_unc + e.exact_unc);
    ok = ok && m_up > need_up && m_lo > need_lo;
    worst_ratio = std::min({worst_ratio, m_up / need_up, m_lo / need_lo});
  }
  ok = ok && c.canonical_seconds < 120.0;
  note = std::to_string(c.canonical.size()) + " points in " +
         fmt1("%.1fs", c.canonical_seconds) + ", min margin/(10 tol) = " +
         fmt1("%.2g", worst_ratio);
  return ok;
}

// ---- discrepancy envelope -------------------------------------------------

bool crit_envelope(Ctx& c, std::string& note) {
  if (c.canonical.size() != 9) {
    note = "canonical sweep unavailable";
    return false;
  }
  bool ok = true;
  for (const auto& e : c.canonical)
    ok = ok && std::isfinite(e.theorem_ratio) && e.theorem_ratio > 0.0;
  const double at_1e3 = c.canonical[2].theorem_ratio;
  const double at_1e6 = c.canonical[8].theorem_ratio;
  ok = ok && at_1e6 <= at_1e3;

  const auto [c_thm, c_pol] = fit_constants(c.canonical);
  const auto golden_dir =
      std::filesystem::path(POLARON2D_SOURCE_DIR) / "tests" / "golden";
  const auto golden = golden_dir / "envelope.txt";
  std::string golden_note;
  if (!std::filesystem::exists(golden)) {
    std::filesystem::create_directories(golden_dir);
    std::ofstream out(golden);
    out << std::setprecision(17) << c_thm << " " << c_pol << "\n";
    golden_note = ", golden initialized";
  } else {
    std::ifstream in(golden);
    double g_thm = 0.0, g_pol = 0.0;
    in >> g_thm >> g_pol;
    const bool match =
        std::fabs(c_thm - g_thm) <= 1e-6 * std::max(1.0, std::fabs(g_thm)) &&
        std::fabs(c_pol - g_pol) <= 1e-6 * std::max(1.0, std::fabs(g_pol));
    ok = ok && match;
    golden_note = match ? ", matches golden" : ", DIFFERS from golden";
  }
  note = "ratio(1e3) = " + fmt1("%.4g", at_1e3) + ", ratio(1e6) = " +
         fmt1("%.4g", at_1e6) + ", envelope = " + fmt1("%.6g", c_thm) +
         golden_note;
  return ok;
}

// ---- upper-shift asymptotics ----------------------------------------------

bool crit_asymptotics(Ctx& c, std::string& note) {
  if (c.canonical.size() != 9) {
    note = "canonical sweep unavailable";
    return false;
  }
  bool ok = true;
  double lhs_first = 0.0, lhs_last = 0.0;
  for (std::size_t i = 2; i < c.canonical.size(); ++i) {
    const auto& e = c.canonical[i];
    const double mt = e.params.mu_tilde();
    const double lg = std::log(mt);
    const double lhs = std::fabs(e.upper_shift * lg / e.params.mu + 1.0);
    const double bound = 5.0 * std::log(lg) / lg;
    ok = ok && lhs <= bound;
    if (i == 2) lhs_first = lhs;
    if (i + 1 == c.canonical.size()) lhs_last = lhs;
  }
  ok = ok && lhs_last < lhs_first;
  note = "lhs(1e3) = " + fmt1("%.4f", lhs_first) + ", lhs(1e6) = " +
         fmt1("%.4f", lhs_last);
  return ok;
}

// ---- spectrum interlacing ---------------------------------------------------

bool crit_interlacing(Ctx& c, std::string& note) {
  int checked = 0;
  for (double lt : {kTwoPi, 1.0, 5.0, 20.0})
    for (double mt : c.mts) {
      const ModelParams p = ModelParams::dimensionless(mt, lt);
      const auto table = c.cache.get(p.unit(), solver_cutoff(p, 1e-6));
      const SpectrumResult r = one_body_spectrum(p, *table, p.mu, 1e-8);
      if (!r.interlacing_ok || r.n_used != count_fermions(*table, p.mu)) {
        note = "violation at mu~=" + fmt1("%.3g", mt) + " L~=" +
               fmt1("%.3g", lt);
        return false;
      }
      ++checked;
    }
  note = std::to_string(checked) + " spectra, all interlaced exactly";
  return checked == 36;
}

// ---- dense oracle -----------------------------------------------------------

// Eigenvalues of diag(s) - (g/L^2) 11^T over every lattice point of the
// table, with g calibrated so E_B is exact.  No secular equation involved.
std::vector<double> dense_route(const ModelParams& p, const ShellTable& t) {
  std::vector<double> levels;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::int32_t k = 0; k < t.m[i]; ++k)
      levels.push_back(t.unit * static_cast<double>(t.n[i]));
  const auto dim = static_cast<Eigen::Index>(levels.size());
  long double cal = 0.0L;
  for (std::size_t i = 0; i < t.size(); ++i)
    cal += t.m[i] / (t.unit * static_cast<long double>(t.n[i]) - p.E_B);
  cal /= static_cast<long double>(p.L) * p.L;
  const double w = 1.0 / (static_cast<double>(cal) * p.L * p.L);
  Eigen::MatrixXd h = Eigen::MatrixXd::Constant(dim, dim, -w);
  for (Eigen::Index i = 0; i < dim; ++i) h(i, i) += levels[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  return {es.eigenvalues().data(), es.eigenvalues().data() + dim};
}

// Root of the truncated secular sum in each occupied gap, by bisection.
std::vector<double> secular_route(const ModelParams& p, const ShellTable& t) {
  std::vector<double> roots;
  const std::size_t i_mu = t.first_above(p.mu);
  for (std::size_t j = 0; j + 1 < i_mu; ++j) {
    double lo = t.unit * static_cast<double>(t.n[j]);
    double hi = t.unit * static_cast<double>(t.n[j + 1]);
    const double width = hi - lo;
    lo += 1e-13 * width;
    hi -= 1e-13 * width;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (secular_sum_truncated(p, t, mid, t.cutoff()) > 0.0 ? lo : hi) = mid;
    }
    roots.push_back(0.5 * (lo + hi));
  }
  return roots;
}

// The unique displaced dense eigenvalue inside an open gap.
bool dense_root_in_gap(const std::vector<double>& dense, double lo, double hi,
                       double* out) {
  int found = 0;
  for (const double v : dense)
    if (v > lo + 1e-6 && v < hi - 1e-6) {
      *out = v;
      ++found;
    }
  return found == 1;
}

bool crit_dense_oracle(Ctx& c, std::string& note) {
  const auto t0 = Clock::now();
  const ModelParams p = ModelParams::dimensionless(6.0, kTwoPi);
  const double cuts[3] = {60.0, 120.0, 240.0};
  std::vector<ShellTable> tables;
  std::vector<std::vector<double>> dense, roots;
  std::size_t max_points = 0;
  for (const double cut : cuts) {
    tables.push_back(build_shell_table(1.0, cut));
    std::size_t pts = 0;
    for (std::size_t i = 0; i < tables.back().size(); ++i)
      pts += static_cast<std::size_t>(tables.back().m[i]);
    max_points = std::max(max_points, pts);
    dense.push_back(dense_route(p, tables.back()));
    roots.push_back(secular_route(p, tables.back()));
  }
  if (max_points > 1000) {
    note = "oracle too large: " + std::to_string(max_points) + " points";
    return false;
  }

  double worst_same = 0.0;
  for (int k = 0; k < 3; ++k) {
    // Calibrated bound state is exact in both routes.
    worst_same = std::max(worst_same, std::fabs(dense[k].front() - p.E_B));
    for (const double r : roots[k]) {
      double best = 1e300;
      for (const double d : dense[k]) best = std::min(best, std::fabs(d - r));
      worst_same = std::max(worst_same, best);
    }
  }

  // Richardson in the inverse cutoff, per occupied gap, both routes.
  double worst_ext = 0.0;
  const std::size_t i_mu = tables[0].first_above(p.mu);
  for (std::size_t j = 0; j + 1 < i_mu; ++j) {
    const double lo = static_cast<double>(tables[0].n[j]);
    const double hi = static_cast<double>(tables[0].n[j + 1]);
    double dr[3] = {0.0, 0.0, 0.0};
    for (int k = 0; k < 3; ++k)
      if (!dense_root_in_gap(dense[k], lo, hi, &dr[k])) {
        note = "no unique dense root in gap";
        return false;
      }
    for (int k = 0; k + 1 < 3; ++k) {
      const double ext_a = 2.0 * roots[k + 1][j] - roots[k][j];
      const double ext_b = 2.0 * dr[k + 1] - dr[k];
      worst_ext = std::max(worst_ext, std::fabs(ext_a - ext_b));
    }
  }

  const double dt = seconds_since(t0);
  note = "max |route A - route B| = " + fmt1("%.2e", worst_same) +
         ", extrapolants " + fmt1("%.2e", worst_ext) + ", " +
         std::to_string(max_points) + " points, " + fmt1("%.1fs", dt);
  return worst_same <= 1e-9 && worst_ext <= 1e-9 && dt < 30.0;
}

// ---- hole-sector consistency ------------------------------------------------

bool crit_hole_sector(Ctx& c, std::string& note) {
  double worst = 0.0;
  for (double mt : {100.0, 10000.0})
    for (double box : {1.0, kTwoPi}) {
      const ModelParams p = ModelParams::dimensionless(mt, box);
      const auto table = c.cache.get(p.unit(), solver_cutoff(p, 1e-8));
      const double e_p = solve_polaron(p, *table, 1e-10).e_p;
      const SectorMatrix m = sector_matrix(p, *table, e_p);
      double scale = 0.0;
      for (const double d : m.diag) scale = std::max(scale, d);
      const double x = chevy_sector_lowest(p, *table, e_p, 1e-10);
      worst = std::max(worst, std::fabs(x) / (1e-8 * scale));
      if (std::fabs(x) > 1e-8 * scale) {
        note = "defect " + fmt1("%.2e", x) + " at mu~=" + fmt1("%.0f", mt) +
               " L~=" + fmt1("%.3g", box);
        return false;
      }
    }
  note = "lowest sector eigenvalue within tolerance, worst fraction " +
         fmt1("%.2g", worst);
  return true;
}

// ---- pair-function log law --------------------------------------------------

bool crit_log_law(Ctx& c, std::string& note) {
  int checked = 0;
  double min_slack = 1e300;
  for (double mt : {10.0, 1e3, 1e5})
    for (double lt : {1.0, 3.0, 10.0})
      for (double tt : {-mt / 2.0, 0.0, 1.0, mt}) {
        const ModelParams p = ModelParams::dimensionless(mt, lt);
        const auto table = c.cache.get_at_least(
            p.unit(),
            static_cast<std::int64_t>(
                std::ceil((p.mu + std::max(tt, 0.0) + 2.0) / p.unit())) +
                64);
        const BoundReport r = g_mu_log_law(p, *table, tt, 1e-6, &c.cache);
        if (!r.holds) {
          note = "violated at mu~=" + fmt1("%.3g", mt) + " L~=" +
                 fmt1("%.3g", lt) + " tau~=" + fmt1("%.3g", tt);
          return false;
        }
        min_slack = std::min(min_slack, r.slack);
        ++checked;
      }
  note = std::to_string(checked) + " combinations, min slack " +
         fmt1("%.3g", min_slack);
  return checked == 36;
}

// ---- lattice-integral comparison --------------------------------------------

bool crit_riemann(Ctx&, std::string& note) {
  const std::vector<std::pair<std::string, std::function<double(double)>>>
      fams = {
          {"exp", [](double s) { return std::exp(-s); }},
          {"inv2",
           [](double s) { return 1.0 / ((1.0 + s) * (1.0 + s)); }},
          {"inv32", [](double s) { return std::pow(1.0 + s, -1.5); }},
      };
  int checked = 0;
  for (const auto& [name, f] : fams)
    for (double L : {1.0, kTwoPi, 20.0}) {
      if (!riemann_check_a(f, L, 1e-6).holds) {
        note = "variant a fails for " + name + " at L=" + fmt1("%.3g", L);
        return false;
      }
      ++checked;
      for (double m : {1.0, 5.0}) {
        if (!riemann_check_b(f, m, L, 1e-6).holds) {
          note = "variant b fails for " + name + " at L=" + fmt1("%.3g", L) +
                 " m=" + fmt1("%.0f", m);
          return false;
        }
        ++checked;
      }
    }
  note = std::to_string(checked) + " checks hold";
  return checked == 27;
}

// ---- coupling-radius scaling and feasibility ----------------------------------

bool crit_radius_scaling(Ctx& c, std::string& note) {
  if (c.canonical.size() != 9) {
    note = "canonical sweep unavailable";
    return false;
  }
  for (std::size_t i = 2; i < c.canonical.size(); ++i)
    if (!c.canonical[i].feasible) {
      note = "infeasible at mu~=" +
             fmt1("%.3g", c.canonical[i].params.mu_tilde());
      return false;
    }
  const double s_1e3 =
      c.canonical[2].r_bar / std::sqrt(std::log(c.mts[2]));
  const double s_1e6 =
      c.canonical[8].r_bar / std::sqrt(std::log(c.mts[8]));
  note = "r/sqrt(log) at 1e3 = " + fmt1("%.4f", s_1e3) + ", at 1e6 = " +
         fmt1("%.4f", s_1e6);
  return s_1e6 <= 2.0 * s_1e3;
}

// ---- shell grouping vs direct sums --------------------------------------------

bool crit_grouping(Ctx& c, std::string& note) {
  const ModelParams p = ModelParams::dimensionless(50.0, kTwoPi);
  const auto table = c.cache.get_at_least(1.0, 3200);
  const double cut = 3000.0;

  std::int64_t points = 0;
  const auto r = static_cast<std::int64_t>(std::sqrt(cut)) + 2;
  double worst = 0.0;
  for (double tau : {-20.0, 0.0, 5.0}) {
    long double acc = 0.0L;
    std::int64_t pts = 0;
    for (std::int64_t ix = -r; ix <= r; ++ix)
      for (std::int64_t iy = -r; iy <= r; ++iy) {
        const auto n = static_cast<double>(ix * ix + iy * iy);
        if (n > cut) continue;
        ++pts;
        long double term = 1.0L / (static_cast<long double>(n) - p.E_B);
        if (n > p.mu) term -= 1.0L / (static_cast<long double>(n) + tau);
        acc += term;
      }
    points = pts;
    const auto brute =
        static_cast<double>(acc / (static_cast<long double>(p.L) * p.L));
    const double grouped = g_mu_truncated(p, *table, tau, cut);
    worst = std::max(worst, std::fabs(grouped - brute) / std::fabs(brute));
  }
  for (double z : {-3.7, 2.5}) {
    long double acc = 0.0L;
    for (std::int64_t ix = -r; ix <= r; ++ix)
      for (std::int64_t iy = -r; iy <= r; ++iy) {
        const auto n = static_cast<double>(ix * ix + iy * iy);
        if (n > cut) continue;
        acc += 1.0L / (static_cast<long double>(n) - p.E_B) -
               1.0L / (static_cast<long double>(n) - z);
      }
    const auto brute =
        static_cast<double>(acc / (static_cast<long double>(p.L) * p.L));
    const double grouped = secular_sum_truncated(p, *table, z, cut);
    worst = std::max(worst, std::fabs(grouped - brute) / std::fabs(brute));
  }
  note = std::to_string(points) + " lattice points, worst rel diff " +
         fmt1("%.2e", worst);
  return points <= 10000 && worst <= 1e-12;
}

// ---- performance and determinism ----------------------------------------------

bool crit_performance(Ctx& c, std::string& note) {
  // Cold table build at the capacity cutoff.
  const auto t0 = Clock::now();
  const ShellTable big = build_shell_table(1.0, 1e7);
  const double build_s = seconds_since(t0);
  if (build_s >= 10.0) {
    note = "table build took " + fmt1("%.1fs", build_s);
    return false;
  }

  // Warm pair-function evaluation at the deepest canonical point.
  const ModelParams p = ModelParams::dimensionless(1e6, kTwoPi);
  auto seed = c.cache.get_at_least(1.0, 4096);
  (void)g_mu(p, *seed, 0.0, 1e-10, &c.cache);  // builds whatever it needs
  const auto t1 = Clock::now();
  const TruncatedSum g = g_mu(p, *seed, 0.0, 1e-10, &c.cache);
  const double warm_s = seconds_since(t1);
  if (warm_s >= 0.1) {
    note = "warm evaluation took " + fmt1("%.3fs", warm_s);
    return false;
  }
  if (!(g.width() <= 1e-10)) {
    note = "warm evaluation width " + fmt1("%.2e", g.width());
    return false;
  }

  // Grid results must not depend on the worker count.
  std::vector<ModelParams> grid;
  for (int i = 0; i <= 3; ++i)
    grid.push_back(
        ModelParams::dimensionless(std::pow(10.0, 2.0 + 0.5 * i), kTwoPi));
  const std::vector<Enclosure> a = sweep(grid, 1e-8, 1, &c.cache);
  const std::vector<Enclosure> b = sweep(grid, 1e-8, 4, &c.cache);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (fingerprint(a[i]) != fingerprint(b[i])) {
      note = "parallelism changed point " + std::to_string(i);
      return false;
    }

  note = "build " + fmt1("%.1fs", build_s) + ", warm eval " +
         fmt1("%.0fms", warm_s * 1e3) + ", sweep deterministic";
  return true;
}

}  // namespace

int main() {
  Ctx ctx;
  const std::vector<std::pair<const char*, bool (*)(Ctx&, std::string&)>>
      criteria = {
          {"canonical grid enclosures", crit_canonical},
          {"discrepancy envelope", crit_envelope},
          {"upper-shift asymptotics", crit_asymptotics},
          {"spectrum interlacing", crit_interlacing},
          {"dense oracle agreement", crit_dense_oracle},
          {"hole-sector consistency", crit_hole_sector},
          {"pair-function log law", crit_log_law},
          {"lattice-integral comparison", crit_riemann},
          {"coupling-radius scaling", crit_radius_scaling},
          {"shell grouping vs direct sums", crit_grouping},
          {"performance and determinism", crit_performance},
      };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    bool ok = false;
    std::string note;
    try {
      ok = criteria[i].second(ctx, note);
    } catch (const std::exception& e) {
      ok = false;
      note = std::string("exception: ") + e.what();
    }
    if (!ok) ++failures;
    std::printf("%s criterion %2zu: %s%s%s\n", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].first, note.empty() ? "" : " -- ", note.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
