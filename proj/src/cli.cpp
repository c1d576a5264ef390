#include "polaron2d/cli.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "polaron2d/certify.hpp"
#include "polaron2d/errors.hpp"
#include "polaron2d/polaron.hpp"
#include "polaron2d/regsums.hpp"
#include "polaron2d/shells.hpp"
#include "polaron2d/spectrum.hpp"

namespace polaron2d {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// CSV empty field and JSON null both stand for not-a-number.
std::string fmt_or_empty(double v) {
  return std::isnan(v) ? std::string() : fmt(v);
}

nlohmann::json num_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

// Parameter point given either as --mu-tilde/--L-tilde (E_B = -1) or as
// the physical triple --L/--E-B/--mu; mixing the two is an error.
struct ParamSpec {
  double mu_tilde = std::numeric_limits<double>::quiet_NaN();
  double L_tilde = std::numeric_limits<double>::quiet_NaN();
  double L = std::numeric_limits<double>::quiet_NaN();
  double E_B = std::numeric_limits<double>::quiet_NaN();
  double mu = std::numeric_limits<double>::quiet_NaN();
};

void add_param_flags(CLI::App* cmd, ParamSpec& ps) {
  cmd->add_option("--mu-tilde", ps.mu_tilde,
                  "Fermi energy over |E_B| (dimensionless mode, E_B = -1)");
  cmd->add_option("--L-tilde", ps.L_tilde,
                  "box size times sqrt(|E_B|), default 2*pi");
  cmd->add_option("--L", ps.L, "box size (physical mode)");
  cmd->add_option("--E-B", ps.E_B, "bound-state energy, negative");
  cmd->add_option("--mu", ps.mu, "Fermi energy");
}

ModelParams resolve_params(const ParamSpec& ps) {
  const bool dimless =
      std::isfinite(ps.mu_tilde) || std::isfinite(ps.L_tilde);
  const bool physical = std::isfinite(ps.L) || std::isfinite(ps.E_B) ||
                        std::isfinite(ps.mu);
  if (dimless && physical)
    throw std::invalid_argument(
        "give either --mu-tilde/--L-tilde or --L/--E-B/--mu, not both");
  if (dimless) {
    if (!std::isfinite(ps.mu_tilde))
      throw std::invalid_argument("--mu-tilde is required with --L-tilde");
    const double lt = std::isfinite(ps.L_tilde) ? ps.L_tilde : 2.0 * M_PI;
    return ModelParams::dimensionless(ps.mu_tilde, lt);
  }
  if (!physical)
    throw std::invalid_argument(
        "no parameter point given; pass --mu-tilde or --L/--E-B/--mu");
  ModelParams p;
  p.L = ps.L;
  p.E_B = ps.E_B;
  p.mu = ps.mu;
  p.validate();
  return p;
}

// State shared between option declarations and callbacks; everything the
// subcommand lambdas touch lives here so it outlives parsing.
struct CliState {
  std::string format = "csv";
  std::string output;
  std::string cache_dir;
  double sum_tol = 1e-10;
  double root_tol = 1e-10;
  int exit_code = 0;

  ParamSpec point;
  double shells_L = 0.0;
  double shells_cutoff = -1.0;
  double gmu_tau = 0.0;
  std::int64_t spectrum_levels = 0;
  bool inject_fault = false;

  std::vector<double> sweep_mu;
  std::vector<double> sweep_lt;
  std::string sweep_mu_range;
  std::string sweep_lt_range;
  std::int64_t max_points = 4096;
  int parallel = 1;

  std::string verify_family = "exp";

  std::optional<ShellCache> disk_cache;

  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  ShellCache& cache() {
    if (cache_dir.empty()) return default_shell_cache();
    if (!disk_cache) disk_cache.emplace(cache_dir);
    return *disk_cache;
  }

  // Write destination: --output file when given, else the main stream.
  template <typename Fn>
  void emit(Fn&& fn) {
    if (output.empty()) {
      fn(*out);
      return;
    }
    std::ofstream f(output, std::ios::trunc);
    if (!f)
      throw std::invalid_argument("cannot open output file: " + output);
    fn(f);
  }
};

int run_guarded(CliState& st, const std::function<int()>& body) {
  try {
    return body();
  } catch (const certification_error& e) {
    *st.err << "error: " << e.what() << "\n";
    return 1;
  } catch (const infeasible_error& e) {
    *st.err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    *st.err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    *st.err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    *st.err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    *st.err << "error: " << e.what() << "\n";
    return 3;
  }
}

void write_enclosures_csv(std::ostream& os,
                          const std::vector<Enclosure>& recs) {
  os << "# polaron2d " << kVersion << "\n";
  os << "L,E_B,mu,mu_tilde,N,E0,e_p,lambda_shift,exact_shift,feasible,"
        "theorem_ratio,polaron_ratio\n";
  for (const auto& e : recs) {
    os << fmt(e.params.L) << ',' << fmt(e.params.E_B) << ','
       << fmt(e.params.mu) << ',' << fmt(e.params.mu_tilde()) << ','
       << e.n_fermions << ',' << fmt_or_empty(e.e0) << ','
       << fmt_or_empty(e.upper_shift) << ',' << fmt_or_empty(e.lower_shift)
       << ',' << fmt_or_empty(e.exact_shift) << ',' << (e.feasible ? 1 : 0)
       << ',' << fmt_or_empty(e.theorem_ratio) << ','
       << fmt_or_empty(e.polaron_ratio) << "\n";
  }
}

nlohmann::json enclosure_json(const Enclosure& e) {
  nlohmann::json j;
  j["L"] = e.params.L;
  j["E_B"] = e.params.E_B;
  j["mu"] = e.params.mu;
  j["mu_tilde"] = e.params.mu_tilde();
  j["N"] = e.n_fermions;
  j["E0"] = num_or_null(e.e0);
  j["e_p"] = num_or_null(e.upper_shift);
  j["lambda_shift"] = num_or_null(e.lower_shift);
  j["exact_shift"] = num_or_null(e.exact_shift);
  j["feasible"] = e.feasible;
  j["theorem_ratio"] = num_or_null(e.theorem_ratio);
  j["polaron_ratio"] = num_or_null(e.polaron_ratio);
  j["r_bar"] = num_or_null(e.r_bar);
  j["gap_lhs"] = num_or_null(e.gap_lhs);
  j["gap_rhs"] = num_or_null(e.gap_rhs);
  j["ok"] = e.ok;
  if (!e.ok) j["error"] = e.error;
  return j;
}

void write_enclosures(CliState& st, const std::vector<Enclosure>& recs) {
  for (std::size_t i = 0; i < recs.size(); ++i)
    if (!recs[i].ok)
      *st.err << "point " << i << " (mu_tilde "
              << fmt_short(recs[i].params.mu_tilde()) << "): "
              << recs[i].error << "\n";
  st.emit([&](std::ostream& os) {
    if (st.format == "json") {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& e : recs) arr.push_back(enclosure_json(e));
      os << arr.dump(2) << "\n";
    } else {
      write_enclosures_csv(os, recs);
    }
  });
}

int exit_code_for(const std::vector<Enclosure>& recs) {
  bool cert = false, usage = false, numeric = false;
  for (const auto& r : recs) {
    if (r.ok) {
      if (sandwich_violated(r)) cert = true;
      continue;
    }
    switch (r.kind) {
      case PointError::certification:
        cert = true;
        break;
      case PointError::usage:
        usage = true;
        break;
      default:
        numeric = true;
        break;
    }
  }
  if (cert) return 1;
  if (usage) return 2;
  if (numeric) return 3;
  return 0;
}

std::vector<double> parse_geometric_range(const std::string& s) {
  double lo = 0.0, hi = 0.0;
  long long count = 0;
  if (std::sscanf(s.c_str(), "%lf:%lf:%lld", &lo, &hi, &count) != 3)
    throw std::invalid_argument("range must look like lo:hi:count, got " + s);
  if (!(lo > 0.0) || !(hi > 0.0) || count < 1)
    throw std::invalid_argument("range needs lo, hi > 0 and count >= 1: " +
                                s);
  std::vector<double> v;
  if (count == 1) {
    v.push_back(lo);
    return v;
  }
  for (long long i = 0; i < count; ++i)
    v.push_back(lo * std::pow(hi / lo, static_cast<double>(i) /
                                           static_cast<double>(count - 1)));
  return v;
}

int cmd_shells(CliState& st) {
  if (!(st.shells_L > 0.0) || !std::isfinite(st.shells_L))
    throw std::domain_error("shells: L must be finite and > 0");
  if (!(st.shells_cutoff >= 0.0) || !std::isfinite(st.shells_cutoff))
    throw std::domain_error("shells: cutoff must be finite and >= 0");
  const double w = 2.0 * M_PI / st.shells_L;
  const ShellTable table = build_shell_table(w * w, st.shells_cutoff);
  st.emit([&](std::ostream& os) {
    if (st.format == "json") {
      nlohmann::json arr = nlohmann::json::array();
      for (std::size_t i = 0; i < table.size(); ++i)
        arr.push_back({{"n", table.n[i]},
                       {"m", table.m[i]},
                       {"energy", table.unit * double(table.n[i])}});
      os << arr.dump(2) << "\n";
    } else {
      os << "# polaron2d " << kVersion << "\n";
      os << "n,m,energy\n";
      for (std::size_t i = 0; i < table.size(); ++i)
        os << table.n[i] << ',' << table.m[i] << ','
           << fmt(table.unit * double(table.n[i])) << "\n";
    }
  });
  return 0;
}

int cmd_gmu(CliState& st) {
  const ModelParams p = resolve_params(st.point);
  const double tau = st.gmu_tau;
  const double unit = p.unit();
  // Only a positive tau widens the tail; a negative one must instead reach
  // the domain check inside g_mu, so it must not inflate the seed table.
  const std::int64_t seed = static_cast<std::int64_t>(std::ceil(
                                (p.mu + std::max(tau, 0.0) - 2.0 * p.E_B) /
                                unit)) +
                            64;
  ShellCache& cache = st.cache();
  const auto table = cache.get_at_least(unit, seed);
  const TruncatedSum g = g_mu(p, *table, tau, st.sum_tol, &cache);
  st.emit([&](std::ostream& os) {
    if (st.format == "json") {
      nlohmann::json j;
      j["tau"] = tau;
      j["value"] = g.value;
      j["lo"] = g.lo();
      j["hi"] = g.hi();
      j["cutoff"] = g.cutoff;
      os << j.dump(2) << "\n";
    } else {
      os << "# polaron2d " << kVersion << "\n";
      os << "tau,value,lo,hi,cutoff\n";
      os << fmt(tau) << ',' << fmt(g.value) << ',' << fmt(g.lo()) << ','
         << fmt(g.hi()) << ',' << fmt(g.cutoff) << "\n";
    }
  });
  return 0;
}

int cmd_polaron(CliState& st) {
  const ModelParams p = resolve_params(st.point);
  ShellCache& cache = st.cache();
  const auto table = cache.get(p.unit(), solver_cutoff(p, st.sum_tol));
  const PolaronSolution sol = solve_polaron(p, *table, st.root_tol);
  st.emit([&](std::ostream& os) {
    if (st.format == "json") {
      nlohmann::json j;
      j["L"] = p.L;
      j["E_B"] = p.E_B;
      j["mu"] = p.mu;
      j["mu_tilde"] = p.mu_tilde();
      j["e_p"] = sol.e_p;
      j["residual"] = sol.residual;
      j["bracket_lo"] = sol.bracket.first;
      j["bracket_hi"] = sol.bracket.second;
      j["evaluations"] = sol.evaluations;
      j["uncertainty"] = sol.uncertainty;
      os << j.dump(2) << "\n";
    } else {
      os << "# polaron2d " << kVersion << "\n";
      os << "L,E_B,mu,mu_tilde,e_p,residual,bracket_lo,bracket_hi,"
            "evaluations,uncertainty\n";
      os << fmt(p.L) << ',' << fmt(p.E_B) << ',' << fmt(p.mu) << ','
         << fmt(p.mu_tilde()) << ',' << fmt(sol.e_p) << ','
         << fmt(sol.residual) << ',' << fmt(sol.bracket.first) << ','
         << fmt(sol.bracket.second) << ',' << sol.evaluations << ','
         << fmt(sol.uncertainty) << "\n";
    }
  });
  return 0;
}

int cmd_spectrum(CliState& st) {
  const ModelParams p = resolve_params(st.point);
  ShellCache& cache = st.cache();
  const auto table = cache.get(p.unit(), solver_cutoff(p, st.sum_tol));
  const SpectrumResult sp = one_body_spectrum(p, *table, p.mu, st.root_tol);
  const double e0 = sp.e_total - sp.shift_total;
  st.emit([&](std::ostream& os) {
    if (st.format == "json") {
      nlohmann::json j;
      j["L"] = p.L;
      j["E_B"] = p.E_B;
      j["mu"] = p.mu;
      j["N"] = sp.n_used;
      j["E0"] = e0;
      j["e_total"] = sp.e_total;
      j["shift_total"] = sp.shift_total;
      j["interlacing_ok"] = sp.interlacing_ok;
      j["uncertainty"] = sp.uncertainty;
      j["max_residual"] = sp.max_residual;
      if (st.spectrum_levels > 0) {
        nlohmann::json arr = nlohmann::json::array();
        std::int64_t left = st.spectrum_levels;
        for (const auto& lvl : sp.eigenvalues) {
          if (left-- <= 0) break;
          arr.push_back({{"value", lvl.first}, {"mult", lvl.second}});
        }
        j["levels"] = arr;
      }
      os << j.dump(2) << "\n";
    } else if (st.spectrum_levels > 0) {
      os << "# polaron2d " << kVersion << "\n";
      os << "value,multiplicity\n";
      std::int64_t left = st.spectrum_levels;
      for (const auto& lvl : sp.eigenvalues) {
        if (left-- <= 0) break;
        os << fmt(lvl.first) << ',' << lvl.second << "\n";
      }
    } else {
      os << "# polaron2d " << kVersion << "\n";
      os << "L,E_B,mu,N,E0,shift_total,e_total,interlacing_ok,uncertainty,"
            "max_residual\n";
      os << fmt(p.L) << ',' << fmt(p.E_B) << ',' << fmt(p.mu) << ','
         << sp.n_used << ',' << fmt(e0) << ',' << fmt(sp.shift_total) << ','
         << fmt(sp.e_total) << ',' << (sp.interlacing_ok ? 1 : 0) << ','
         << fmt(sp.uncertainty) << ',' << fmt(sp.max_residual) << "\n";
    }
  });
  return 0;
}

int cmd_solve(CliState& st) {
  const ModelParams p = resolve_params(st.point);
  const double tol = std::min(st.sum_tol, st.root_tol);
  std::vector<Enclosure> recs = sweep({p}, tol, 1, &st.cache());
  if (st.inject_fault && recs[0].ok) {
    // Deliberately break the ordering so downstream exit handling can be
    // exercised without constructing a genuinely broken certificate.
    recs[0].lower_shift = std::isfinite(recs[0].exact_shift)
                              ? recs[0].exact_shift + 1.0 +
                                    recs[0].lower_unc + recs[0].exact_unc
                              : 1.0;
    recs[0].error = "fault injected for exit-path testing";
  }
  write_enclosures(st, recs);
  return exit_code_for(recs);
}

int cmd_sweep(CliState& st) {
  std::vector<double> mts = st.sweep_mu;
  if (!st.sweep_mu_range.empty()) {
    const auto r = parse_geometric_range(st.sweep_mu_range);
    mts.insert(mts.end(), r.begin(), r.end());
  }
  std::vector<double> lts = st.sweep_lt;
  if (!st.sweep_lt_range.empty()) {
    const auto r = parse_geometric_range(st.sweep_lt_range);
    lts.insert(lts.end(), r.begin(), r.end());
  }
  if (mts.empty())
    throw std::invalid_argument(
        "sweep: no points; pass --mu-tilde or --mu-tilde-range");
  if (lts.empty()) lts.push_back(2.0 * M_PI);
  if (static_cast<std::int64_t>(mts.size()) *
          static_cast<std::int64_t>(lts.size()) >
      st.max_points)
    throw std::invalid_argument(
        "sweep: grid exceeds --max-points = " + std::to_string(st.max_points));
  std::vector<ModelParams> grid;
  grid.reserve(mts.size() * lts.size());
  for (double mt : mts)
    for (double lt : lts) grid.push_back(ModelParams::dimensionless(mt, lt));
  const double tol = std::min(st.sum_tol, st.root_tol);
  const std::vector<Enclosure> recs =
      sweep(grid, tol, st.parallel, &st.cache());
  write_enclosures(st, recs);
  return exit_code_for(recs);
}

int cmd_verify(CliState& st) {
  std::function<double(double)> f;
  if (st.verify_family == "exp")
    f = [](double t) { return std::exp(-t); };
  else if (st.verify_family == "inv2")
    f = [](double t) { return 1.0 / ((1.0 + t) * (1.0 + t)); };
  else if (st.verify_family == "inv32")
    f = [](double t) { return std::pow(1.0 + t, -1.5); };
  else
    throw std::invalid_argument("verify: unknown --family " +
                                st.verify_family);

  struct Check {
    std::string name;
    std::function<bool()> run;
  };
  std::vector<Check> checks;
  ShellCache& cache = st.cache();

  for (double L : {1.0, 2.0 * M_PI, 20.0}) {
    checks.push_back({"riemann-a " + st.verify_family + " L=" + fmt_short(L),
                      [f, L] { return riemann_check_a(f, L, 1e-6).holds; }});
    for (double m : {1.0, 5.0})
      checks.push_back(
          {"riemann-b " + st.verify_family + " L=" + fmt_short(L) +
               " m=" + fmt_short(m),
           [f, L, m] { return riemann_check_b(f, m, L, 1e-6).holds; }});
  }
  for (double mt : {10.0, 1000.0})
    for (double lt : {1.0, 3.0})
      for (double taut : {0.0, 1.0})
        checks.push_back(
            {"log-law mu~=" + fmt_short(mt) + " L~=" + fmt_short(lt) +
                 " tau~=" + fmt_short(taut),
             [mt, lt, taut, &cache] {
               const ModelParams p = ModelParams::dimensionless(mt, lt);
               const double unit = p.unit();
               const auto table = cache.get_at_least(
                   unit, static_cast<std::int64_t>(
                             std::ceil((p.mu + taut + 2.0) / unit)) +
                             64);
               return g_mu_log_law(p, *table, taut, 1e-6, &cache).holds;
             }});
  for (double lt : {5.0, 2.0 * M_PI})
    checks.push_back({"interlacing mu~=100 L~=" + fmt_short(lt),
                      [lt, &cache] {
                        const ModelParams p =
                            ModelParams::dimensionless(100.0, lt);
                        const auto table =
                            cache.get(p.unit(), solver_cutoff(p, 1e-6));
                        return one_body_spectrum(p, *table, p.mu, 1e-8)
                            .interlacing_ok;
                      }});

  bool all_ok = true;
  for (const auto& c : checks) {
    bool ok = false;
    std::string note;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      ok = false;
      note = e.what();
    }
    all_ok = all_ok && ok;
    *st.out << (ok ? "ok   " : "FAIL ") << c.name << "\n";
    if (!note.empty()) *st.err << c.name << ": " << note << "\n";
  }
  *st.out << (all_ok ? "verify: all checks passed"
                     : "verify: some checks FAILED")
          << "\n";
  return all_ok ? 0 : 1;
}

int cmd_cache_inspect(CliState& st) {
  if (st.cache_dir.empty())
    throw std::invalid_argument(
        "cache inspect: no directory (use --cache-dir or "
        "POLARON2D_CACHE_DIR)");
  ShellCache cache(st.cache_dir);
  const auto entries = cache.inspect();
  st.emit([&](std::ostream& os) {
    if (st.format == "json") {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& e : entries)
        arr.push_back({{"file", e.file.string()},
                       {"unit", e.unit},
                       {"n_max", e.n_max},
                       {"bytes", e.bytes}});
      os << arr.dump(2) << "\n";
    } else {
      os << "# polaron2d " << kVersion << "\n";
      os << "file,unit,n_max,bytes\n";
      for (const auto& e : entries)
        os << e.file.string() << ',' << fmt(e.unit) << ',' << e.n_max << ','
           << e.bytes << "\n";
    }
  });
  return 0;
}

int cmd_cache_clear(CliState& st) {
  if (st.cache_dir.empty())
    throw std::invalid_argument(
        "cache clear: no directory (use --cache-dir or "
        "POLARON2D_CACHE_DIR)");
  ShellCache cache(st.cache_dir);
  *st.out << "removed " << cache.clear() << " cached tables\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  CliState st;
  st.out = &out;
  st.err = &err;

  CLI::App app{
      "certified bounds for a 2d Fermi gas coupled to a point scatterer"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "read options from an INI file");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--format", st.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--output", st.output, "write results to this file");
  app.add_option("--cache-dir", st.cache_dir,
                 "directory for persistent shell tables")
      ->envname("POLARON2D_CACHE_DIR");
  app.add_option("--sum-tol", st.sum_tol,
                 "tolerance for tail-certified lattice sums")
      ->capture_default_str();
  app.add_option("--root-tol", st.root_tol,
                 "relative residual tolerance for root solves")
      ->capture_default_str();

  auto* shells = app.add_subcommand(
      "shells", "enumerate lattice energy shells up to a cutoff");
  shells->add_option("--L", st.shells_L, "box size")->required();
  shells
      ->add_option("--cutoff", st.shells_cutoff,
                   "largest shell energy to include")
      ->required();
  shells->callback(
      [&st] { st.exit_code = run_guarded(st, [&st] { return cmd_shells(st); }); });

  auto* gmu = app.add_subcommand(
      "gmu", "evaluate the scatterer sum G_mu(tau) with certified tails");
  add_param_flags(gmu, st.point);
  gmu->add_option("--tau", st.gmu_tau, "spectral argument")->required();
  gmu->callback(
      [&st] { st.exit_code = run_guarded(st, [&st] { return cmd_gmu(st); }); });

  auto* pol = app.add_subcommand(
      "polaron", "solve the polaron equation for the upper shift e_p");
  add_param_flags(pol, st.point);
  pol->callback([&st] {
    st.exit_code = run_guarded(st, [&st] { return cmd_polaron(st); });
  });

  auto* spec = app.add_subcommand(
      "spectrum", "one-body spectrum and the exact total shift");
  add_param_flags(spec, st.point);
  spec->add_option("--levels", st.spectrum_levels,
                   "print the lowest eigenvalues instead of the summary");
  spec->callback([&st] {
    st.exit_code = run_guarded(st, [&st] { return cmd_spectrum(st); });
  });

  auto* solve = app.add_subcommand(
      "solve", "certified enclosure lower <= exact <= upper for one point");
  solve->alias("enclosure");
  add_param_flags(solve, st.point);
  solve->add_flag("--inject-fault", st.inject_fault, "")->group("");
  solve->callback([&st] {
    st.exit_code = run_guarded(st, [&st] { return cmd_solve(st); });
  });

  auto* sw = app.add_subcommand("sweep", "enclosures over a parameter grid");
  sw->add_option("--mu-tilde", st.sweep_mu, "mu_tilde values");
  sw->add_option("--L-tilde", st.sweep_lt, "L_tilde values, default 2*pi");
  sw->add_option("--mu-tilde-range", st.sweep_mu_range,
                 "geometric grid lo:hi:count");
  sw->add_option("--L-tilde-range", st.sweep_lt_range,
                 "geometric grid lo:hi:count");
  sw->add_option("--parallel", st.parallel, "worker threads")
      ->capture_default_str();
  sw->add_option("--max-points", st.max_points, "refuse larger grids")
      ->capture_default_str();
  sw->callback([&st] {
    st.exit_code = run_guarded(st, [&st] { return cmd_sweep(st); });
  });

  auto* ver = app.add_subcommand(
      "verify", "self-checks: comparison bounds, log law, interlacing");
  ver->add_option("--family", st.verify_family,
                  "test integrand: exp, inv2, or inv32")
      ->capture_default_str();
  ver->callback([&st] {
    st.exit_code = run_guarded(st, [&st] { return cmd_verify(st); });
  });

  auto* cache = app.add_subcommand("cache", "manage the shell-table cache");
  cache->require_subcommand(1);
  auto* ci = cache->add_subcommand("inspect", "list cached tables");
  ci->callback([&st] {
    st.exit_code = run_guarded(st, [&st] { return cmd_cache_inspect(st); });
  });
  auto* cc = cache->add_subcommand("clear", "remove cached tables");
  cc->callback([&st] {
    st.exit_code = run_guarded(st, [&st] { return cmd_cache_clear(st); });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }
  return st.exit_code;
}

}  // namespace polaron2d
