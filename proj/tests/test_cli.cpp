#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "polaron2d/cli.hpp"

using namespace polaron2d;

namespace {

struct RunResult {
  int rc = -1;
  std::string out;
  std::string err;
};

RunResult run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("polaron2d");
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  RunResult r;
  r.rc = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> ls;
  std::istringstream in(s);
  std::string l;
  while (std::getline(in, l)) ls.push_back(l);
  return ls;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> fs;
  std::istringstream in(line);
  std::string f;
  while (std::getline(in, f, ',')) fs.push_back(f);
  if (!line.empty() && line.back() == ',') fs.push_back("");
  return fs;
}

constexpr const char* kEnclosureHeader =
    "L,E_B,mu,mu_tilde,N,E0,e_p,lambda_shift,exact_shift,feasible,"
    "theorem_ratio,polaron_ratio";

}  // namespace

TEST_CASE("version and argument errors") {
  const RunResult v = run({"--version"});
  CHECK(v.rc == 0);
  CHECK(v.out.find("0.1.0") != std::string::npos);

  CHECK(run({}).rc == 2);                          // subcommand required
  CHECK(run({"frobnicate"}).rc == 2);              // unknown subcommand
  CHECK(run({"shells"}).rc == 2);                  // missing required --L
  CHECK(run({"solve"}).rc == 2);                   // no parameters at all
  const RunResult help = run({"--help"});
  CHECK(help.rc == 0);
  CHECK(help.out.find("sweep") != std::string::npos);
}

TEST_CASE("shells emits the frozen small table") {
  const RunResult r = run({"shells", "--L", "6.28318530717958648",
                           "--cutoff", "4"});
  REQUIRE(r.rc == 0);
  const auto ls = lines_of(r.out);
  REQUIRE(ls.size() == 6);
  CHECK(ls[0].rfind("# polaron2d", 0) == 0);
  CHECK(ls[1] == "n,m,energy");
  const char* expect[4][2] = {{"0", "1"}, {"1", "4"}, {"2", "4"}, {"4", "4"}};
  for (int i = 0; i < 4; ++i) {
    const auto fs = fields_of(ls[2 + i]);
    REQUIRE(fs.size() == 3);
    CHECK(fs[0] == expect[i][0]);
    CHECK(fs[1] == expect[i][1]);
  }
}

TEST_CASE("shells json round trips through a parser") {
  const RunResult r = run({"--format", "json", "shells", "--L", "6.2832",
                           "--cutoff", "2"});
  REQUIRE(r.rc == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 3);
  CHECK(j[0]["n"] == 0);
  CHECK(j[0]["m"] == 1);
  CHECK(j[2]["m"] == 4);
}

TEST_CASE("gmu reports a consistent enclosure") {
  const RunResult r = run({"gmu", "--mu-tilde", "10", "--tau", "0",
                           "--sum-tol", "1e-8"});
  REQUIRE(r.rc == 0);
  const auto ls = lines_of(r.out);
  REQUIRE(ls.size() == 3);
  CHECK(ls[1] == "tau,value,lo,hi,cutoff");
  const auto fs = fields_of(ls[2]);
  REQUIRE(fs.size() == 5);
  // The value column is the bare truncated sum; lo/hi bracket it together
  // with the tail, whose center can pull the interval below the bare value.
  const double value = std::stod(fs[1]);
  const double lo = std::stod(fs[2]);
  const double hi = std::stod(fs[3]);
  CHECK(lo <= hi);
  CHECK(hi - lo <= 1e-8 * 1.000001);
  CHECK(std::fabs(value - 0.5 * (lo + hi)) <= 1e-3);

  // tau far below the summability threshold is a domain error.
  CHECK(run({"gmu", "--mu-tilde", "10", "--tau", "-1e9"}).rc == 2);
}

TEST_CASE("polaron solves from the command line") {
  const RunResult r = run({"polaron", "--mu-tilde", "50", "--sum-tol", "1e-6",
                           "--root-tol", "1e-9"});
  REQUIRE(r.rc == 0);
  const auto ls = lines_of(r.out);
  REQUIRE(ls.size() == 3);
  const auto fs = fields_of(ls[2]);
  REQUIRE(fs.size() == 10);
  const double e_p = std::stod(fs[4]);
  CHECK(e_p < 0.0);
  CHECK(e_p > -51.0);
  CHECK(std::stod(fs[5]) <= 1e-9 * -e_p * 1.0000001);
}

TEST_CASE("solve prints the pinned enclosure schema") {
  const RunResult r = run({"solve", "--mu-tilde", "1000", "--sum-tol", "1e-6",
                           "--root-tol", "1e-8"});
  REQUIRE(r.rc == 0);
  const auto ls = lines_of(r.out);
  REQUIRE(ls.size() == 3);
  CHECK(ls[1] == kEnclosureHeader);
  const auto fs = fields_of(ls[2]);
  REQUIRE(fs.size() == 12);
  CHECK(fs[9] == "1");  // feasible at a deep sea
  const double e_p = std::stod(fs[6]);
  const double lam = std::stod(fs[7]);
  const double exact = std::stod(fs[8]);
  CHECK(lam <= exact);
  CHECK(exact <= e_p);

  // The alias spelling drives the same command.
  CHECK(run({"enclosure", "--mu-tilde", "100", "--sum-tol", "1e-6",
             "--root-tol", "1e-7"})
            .rc == 0);
}

TEST_CASE("solve reports infeasible points without failing") {
  const RunResult r = run({"solve", "--mu-tilde", "100", "--sum-tol", "1e-6",
                           "--root-tol", "1e-7"});
  REQUIRE(r.rc == 0);
  const auto fs = fields_of(lines_of(r.out)[2]);
  CHECK(fs[9] == "0");
  // The unconditional bound is still a number, not an empty field.
  CHECK(!fs[7].empty());
}

TEST_CASE("solve json carries the diagnostic fields") {
  const RunResult r = run({"--format", "json", "solve", "--mu-tilde", "1000",
                           "--sum-tol", "1e-6", "--root-tol", "1e-8"});
  REQUIRE(r.rc == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 1);
  CHECK(j[0]["ok"] == true);
  CHECK(j[0]["feasible"] == true);
  CHECK(j[0]["r_bar"].is_number());
  CHECK(j[0]["gap_lhs"].is_number());
  CHECK(j[0]["gap_rhs"].is_number());
  CHECK(j[0]["e_p"].is_number());
  CHECK(j[0]["N"].is_number_integer());
}

TEST_CASE("fault injection trips the certification exit path") {
  const RunResult r = run({"solve", "--mu-tilde", "60", "--sum-tol", "1e-6",
                           "--root-tol", "1e-7", "--inject-fault"});
  CHECK(r.rc == 1);
}

TEST_CASE("parameter validation maps to usage errors") {
  CHECK(run({"solve", "--mu-tilde", "-5"}).rc == 2);
  // Mixing reduced and physical parameters is ambiguous.
  CHECK(run({"solve", "--mu-tilde", "10", "--mu", "5"}).rc == 2);
  // Physical mode needs the full triple.
  CHECK(run({"solve", "--L", "6.28", "--mu", "5"}).rc == 2);
  // Physical mode works when complete.
  CHECK(run({"solve", "--L", "6.28", "--E-B", "-1", "--mu", "30",
             "--sum-tol", "1e-6", "--root-tol", "1e-7"})
            .rc == 0);
}

TEST_CASE("sweep lays out the grid in input order") {
  const RunResult r = run({"sweep", "--mu-tilde", "20", "--mu-tilde", "40",
                           "--sum-tol", "1e-6", "--root-tol", "1e-6",
                           "--parallel", "2"});
  REQUIRE(r.rc == 0);
  const auto ls = lines_of(r.out);
  REQUIRE(ls.size() == 4);
  CHECK(ls[1] == kEnclosureHeader);
  CHECK(std::stod(fields_of(ls[2])[3]) == doctest::Approx(20.0));
  CHECK(std::stod(fields_of(ls[3])[3]) == doctest::Approx(40.0));
}

TEST_CASE("sweep geometric ranges") {
  const RunResult r = run({"sweep", "--mu-tilde-range", "10:40:3",
                           "--sum-tol", "1e-6", "--root-tol", "1e-6"});
  REQUIRE(r.rc == 0);
  const auto ls = lines_of(r.out);
  REQUIRE(ls.size() == 5);
  CHECK(std::stod(fields_of(ls[2])[3]) == doctest::Approx(10.0));
  CHECK(std::stod(fields_of(ls[3])[3]) == doctest::Approx(20.0));
  CHECK(std::stod(fields_of(ls[4])[3]) == doctest::Approx(40.0));

  CHECK(run({"sweep", "--mu-tilde-range", "10:x:3"}).rc == 2);
  CHECK(run({"sweep", "--mu-tilde", "10", "--mu-tilde", "20", "--max-points",
             "1"})
            .rc == 2);
  CHECK(run({"sweep"}).rc == 2);  // empty grid
}

TEST_CASE("verify runs a full check family") {
  const RunResult r = run({"verify", "--family", "inv32"});
  REQUIRE(r.rc == 0);
  const auto ls = lines_of(r.out);
  REQUIRE(ls.size() >= 10);
  for (std::size_t i = 0; i + 1 < ls.size(); ++i)
    CHECK(ls[i].rfind("ok   ", 0) == 0);
  CHECK(ls.back() == "verify: all checks passed");

  CHECK(run({"verify", "--family", "nope"}).rc == 2);
}

TEST_CASE("cache commands need a directory and then work") {
  CHECK(run({"cache", "inspect"}).rc == 2);
  CHECK(run({"cache", "clear"}).rc == 2);

  const auto dir =
      (std::filesystem::temp_directory_path() / "p2d_cli_cache").string();
  std::filesystem::remove_all(dir);

  // Populate through a computation that builds a table.
  const RunResult g = run({"--cache-dir", dir, "gmu", "--mu-tilde", "10",
                           "--tau", "0", "--sum-tol", "1e-6"});
  REQUIRE(g.rc == 0);

  const RunResult ins = run({"--cache-dir", dir, "cache", "inspect"});
  REQUIRE(ins.rc == 0);
  CHECK(lines_of(ins.out).size() >= 3);

  const RunResult clr = run({"--cache-dir", dir, "cache", "clear"});
  REQUIRE(clr.rc == 0);
  CHECK(clr.out.rfind("removed ", 0) == 0);

  const RunResult ins2 = run({"--cache-dir", dir, "cache", "inspect"});
  REQUIRE(ins2.rc == 0);
  CHECK(lines_of(ins2.out).size() == 2);  // banner and header only
  std::filesystem::remove_all(dir);
}

TEST_CASE("output redirection and config files") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto out_file = (dir / "p2d_out.csv").string();
  const auto cfg_file = (dir / "p2d_cfg.ini").string();

  const RunResult r = run({"--output", out_file, "solve", "--mu-tilde", "30",
                           "--sum-tol", "1e-6", "--root-tol", "1e-6"});
  REQUIRE(r.rc == 0);
  CHECK(r.out.empty());
  std::ifstream in(out_file);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(lines_of(buf.str()).size() == 3);
  CHECK(lines_of(buf.str())[1] == kEnclosureHeader);

  {
    std::ofstream cfg(cfg_file);
    cfg << "format=json\n";
  }
  const RunResult j = run({"--config", cfg_file, "solve", "--mu-tilde", "30",
                           "--sum-tol", "1e-6", "--root-tol", "1e-6"});
  REQUIRE(j.rc == 0);
  CHECK(nlohmann::json::parse(j.out).is_array());

  std::filesystem::remove(out_file);
  std::filesystem::remove(cfg_file);
}

TEST_CASE("spectrum command lists the lowest levels") {
  const RunResult r = run({"spectrum", "--mu-tilde", "30", "--levels", "3",
                           "--sum-tol", "1e-6", "--root-tol", "1e-8"});
  REQUIRE(r.rc == 0);
  const auto ls = lines_of(r.out);
  REQUIRE(ls.size() == 5);
  CHECK(ls[1] == "value,multiplicity");
  const double ground = std::stod(fields_of(ls[2])[0]);
  CHECK(ground == doctest::Approx(-1.0).epsilon(1e-9));

  const RunResult s = run({"spectrum", "--mu-tilde", "25", "--sum-tol",
                           "1e-6", "--root-tol", "1e-8"});
  REQUIRE(s.rc == 0);
  const auto sl = lines_of(s.out);
  REQUIRE(sl.size() == 3);
  const auto fs = fields_of(sl[2]);
  REQUIRE(fs.size() == 10);
  CHECK(fs[7] == "1");  // interlacing_ok
}
