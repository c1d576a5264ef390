#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "polaron2d/errors.hpp"
#include "polaron2d/params.hpp"
#include "polaron2d/quad.hpp"
#include "polaron2d/regsums.hpp"
#include "polaron2d/shells.hpp"

using namespace polaron2d;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Direct non-grouped lattice sum of the regularized pair summand over
// k^2 <= cut, accumulated in long double.  Validates the shell grouping.
long double brute_g_truncated(const ModelParams& p, double tau, double cut) {
  const double unit = p.unit();
  const auto r = static_cast<std::int64_t>(std::sqrt(cut / unit)) + 2;
  long double acc = 0.0L;
  for (std::int64_t ix = -r; ix <= r; ++ix)
    for (std::int64_t iy = -r; iy <= r; ++iy) {
      const double s = unit * static_cast<double>(ix * ix + iy * iy);
      if (s > cut) continue;
      long double term = 1.0L / (static_cast<long double>(s) - p.E_B);
      if (s > p.mu) term -= 1.0L / (static_cast<long double>(s) + tau);
      acc += term;
    }
  return acc / (static_cast<long double>(p.L) * p.L);
}

long double brute_secular_truncated(const ModelParams& p, double z,
                                    double cut) {
  const double unit = p.unit();
  const auto r = static_cast<std::int64_t>(std::sqrt(cut / unit)) + 2;
  long double acc = 0.0L;
  for (std::int64_t ix = -r; ix <= r; ++ix)
    for (std::int64_t iy = -r; iy <= r; ++iy) {
      const double s = unit * static_cast<double>(ix * ix + iy * iy);
      if (s > cut) continue;
      acc += 1.0L / (static_cast<long double>(s) - p.E_B) -
             1.0L / (static_cast<long double>(s) - z);
    }
  return acc / (static_cast<long double>(p.L) * p.L);
}

}  // namespace

TEST_CASE("quadrature handles finite and semi-infinite ranges") {
  const auto f = [](double t) { return std::exp(-t); };
  const QuadResult a = integrate(f, 0.0, 5.0, 1e-12, 1e-14);
  CHECK(std::abs(a.value - (1.0 - std::exp(-5.0))) < 1e-11);
  const QuadResult b = integrate_to_inf(f, 0.0, 1e-10, 1e-12);
  CHECK(std::abs(b.value - 1.0) < 1e-8);
  CHECK(b.error < 1e-6);
  // Non-integrable input is refused rather than silently truncated.
  CHECK_THROWS_AS(
      integrate_to_inf([](double t) { return 1.0 / (1.0 + t); }, 0.0, 1e-8,
                       1e-10),
      numeric_error);
}

TEST_CASE("shell grouping matches the raw lattice sum") {
  const ModelParams p{2.0 * kPi, -1.0, 50.0};
  const ShellTable t = build_shell_table(p.unit(), 4000.0);
  const double cut = 3000.0;
  for (double tau : {-3.0, 0.0, 2.5, 40.0}) {
    const double grouped = g_mu_truncated(p, t, tau, cut);
    const auto brute = static_cast<double>(brute_g_truncated(p, tau, cut));
    CHECK(std::abs(grouped - brute) <= 1e-12 * std::abs(brute));
  }
  for (double z : {-3.7, 0.5, 10.3}) {
    const double grouped = secular_sum_truncated(p, t, z, cut);
    const auto brute = static_cast<double>(brute_secular_truncated(p, z, cut));
    CHECK(std::abs(grouped - brute) <= 1e-12 * std::abs(brute));
  }
}

TEST_CASE("secular sum vanishes identically at the binding energy") {
  const ModelParams p{2.0 * kPi, -1.0, 20.0};
  const ShellTable t = build_shell_table(p.unit(), 500.0);
  for (double cut : {10.0, 50.0, 200.0, 500.0})
    CHECK(secular_sum_truncated(p, t, p.E_B, cut) == 0.0);
  const SecularResult full = secular_sum(p, t, p.E_B, 1e-10);
  CHECK(std::abs(full.value.value) <= full.value.radius() + 1e-15);
  CHECK(full.derivative.value < 0.0);
}

TEST_CASE("pair function enclosure honors the requested width") {
  ShellCache cache;
  const ModelParams p = ModelParams::dimensionless(100.0, 2.0 * kPi);
  auto t = cache.get(1.0, 600);
  for (double tol : {1e-6, 1e-9, 1e-12}) {
    const TruncatedSum g = g_mu(p, *t, 0.0, tol, &cache);
    CHECK(g.width() <= tol * (1.0 + 1e-9));
    CHECK(g.lo() <= g.mid());
    CHECK(g.mid() <= g.hi());
    CHECK(g.contains(g.mid()));
  }
  // Self-extension: a tight tolerance pushes the cutoff past the seed table.
  const TruncatedSum tight = g_mu(p, *t, 0.0, 1e-12, &cache);
  CHECK(tight.cutoff > t->cutoff());
}

TEST_CASE("pair function is deterministic in the table argument") {
  // The cutoff is derived from the request, so handing in a larger table
  // must not change any output bit.
  ShellCache cache;
  const ModelParams p = ModelParams::dimensionless(50.0, 3.0);
  auto small = cache.get(p.unit(), 300);
  auto large = cache.get(p.unit(), 5000);
  for (double tau : {-1.0, 0.0, 7.0}) {
    const TruncatedSum a = g_mu(p, *small, tau, 1e-8, &cache);
    const TruncatedSum b = g_mu(p, *large, tau, 1e-8, &cache);
    CHECK(a.value == b.value);
    CHECK(a.tail_lo == b.tail_lo);
    CHECK(a.tail_hi == b.tail_hi);
    CHECK(a.cutoff == b.cutoff);
  }
}

TEST_CASE("pair function is strictly increasing in tau") {
  ShellCache cache;
  const ModelParams p = ModelParams::dimensionless(30.0, 2.0 * kPi);
  auto t = cache.get(1.0, 400);
  double prev = -1e300;
  for (double tau : {-20.0, -5.0, 0.0, 1.0, 10.0, 100.0}) {
    const double v = g_mu(p, *t, tau, 1e-10, &cache).mid();
    CHECK(v > prev);
    prev = v;
  }
  // Positive at tau = |E_B| (the combined summand is positive there).
  CHECK(g_mu(p, *t, 1.0, 1e-10, &cache).lo() > 0.0);
}

TEST_CASE("domain violations throw") {
  ShellCache cache;
  const ModelParams p = ModelParams::dimensionless(10.0, 2.0 * kPi);
  auto t = cache.get(1.0, 200);
  const double s_above = first_shell_above(*t, p.mu);
  CHECK(s_above > p.mu);
  CHECK_THROWS_AS(g_mu(p, *t, -s_above, 1e-8, &cache), std::domain_error);
  CHECK_THROWS_AS(g_mu(p, *t, -s_above - 1.0, 1e-8, &cache),
                  std::domain_error);
  // Just inside the domain is fine.
  CHECK_NOTHROW(g_mu(p, *t, -s_above + 1e-3, 1e-6, &cache));
  // z exactly on a shell is a pole of the secular sum.
  CHECK_THROWS_AS(secular_sum(p, *t, 4.0, 1e-8, &cache), std::domain_error);
  CHECK_THROWS_AS(g_mu(p, *t, 0.0, -1.0, &cache), std::invalid_argument);
}

TEST_CASE("secular roots interlace on a tiny example") {
  ShellCache cache;
  const ModelParams p = ModelParams::dimensionless(5.0, 2.0 * kPi);
  auto t = cache.get(1.0, 300);
  // One root strictly inside the gap (1, 2): decreasing from +inf to -inf.
  const double lo = 1.0 + 1e-6, hi = 2.0 - 1e-6;
  CHECK(secular_sum(p, *t, lo, 1e-9, &cache).value.lo() > 0.0);
  CHECK(secular_sum(p, *t, hi, 1e-9, &cache).value.hi() < 0.0);
}

TEST_CASE("lattice sums track the radial integral") {
  for (double L : {1.0, 2.0 * kPi, 20.0}) {
    const BoundReport a =
        riemann_check_a([](double s) { return std::exp(-s); }, L, 1e-6);
    CHECK(a.holds);
    const BoundReport b = riemann_check_b(
        [](double s) { return 1.0 / ((1.0 + s) * (1.0 + s)); }, 2.0, L, 1e-6);
    CHECK(b.holds);
    CHECK(b.lhs >= 0.0);
    CHECK(b.rhs > 0.0);
  }
}

TEST_CASE("pair function obeys the logarithmic growth law") {
  ShellCache cache;
  for (double mt : {100.0, 1000.0}) {
    const ModelParams p = ModelParams::dimensionless(mt, 3.0);
    auto t = cache.get_at_least(p.unit(), 64);
    for (double tau : {0.0, 1.0}) {
      const BoundReport r = g_mu_log_law(p, *t, tau, 1e-6, &cache);
      CHECK(r.holds);
      CHECK(r.slack > 0.0);
    }
  }
}
