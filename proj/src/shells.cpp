#include "polaron2d/shells.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>
#include <string>
#include <system_error>

#include "polaron2d/errors.hpp"

namespace polaron2d {

namespace {

std::int64_t isqrt64(std::int64_t v) {
  if (v < 0) return -1;
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
  while (r > 0 && r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

}  // namespace

std::size_t ShellTable::first_above(double energy) const {
  // Predicate matches the direct per-shell comparison unit*n <= energy, so
  // tie handling is identical everywhere.
  auto it = std::partition_point(n.begin(), n.end(), [&](std::int64_t v) {
    return unit * static_cast<double>(v) <= energy;
  });
  return static_cast<std::size_t>(it - n.begin());
}

ShellTable build_shell_table(double unit, double cutoff,
                             std::size_t budget_bytes) {
  if (!(unit > 0.0) || !std::isfinite(unit))
    throw std::domain_error("build_shell_table: unit must be positive");
  if (!(cutoff >= 0.0) || !std::isfinite(cutoff))
    throw std::domain_error("build_shell_table: cutoff must be >= 0");

  // Largest n with unit*n <= cutoff.  The quotient is nudged by one ulp so
  // an exactly representable boundary shell is never lost to rounding.
  double q = cutoff / unit;
  auto n_max = static_cast<std::int64_t>(
      std::floor(q * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())));
  if (n_max < 0) n_max = 0;

  std::size_t need = (static_cast<std::size_t>(n_max) + 1) * sizeof(std::uint32_t);
  if (need > budget_bytes)
    throw resource_error(
        "build_shell_table: count array for n_max=" + std::to_string(n_max) +
        " needs " + std::to_string(need) + " bytes, exceeding the table budget of " +
        std::to_string(budget_bytes) + " bytes");

  std::vector<std::uint32_t> counts(static_cast<std::size_t>(n_max) + 1, 0u);
  counts[0] = 1;  // origin
  const std::int64_t amax = isqrt64(n_max);
  for (std::int64_t a = 1; a <= amax; ++a) counts[a * a] += 4;  // (+-a,0),(0,+-a)
  for (std::int64_t a = 1; a <= amax; ++a) {
    const std::int64_t a2 = a * a;
    const std::int64_t bmax = isqrt64(n_max - a2);
    for (std::int64_t b = 1; b <= bmax; ++b) counts[a2 + b * b] += 4;  // (+-a,+-b)
  }

  ShellTable t;
  t.unit = unit;
  t.n_max = n_max;
  std::size_t nz = 0;
  for (auto c : counts) nz += (c != 0);
  t.n.reserve(nz);
  t.m.reserve(nz);
  for (std::int64_t v = 0; v <= n_max; ++v) {
    if (counts[v]) {
      t.n.push_back(v);
      t.m.push_back(static_cast<std::int32_t>(counts[v]));
    }
  }
  return t;
}

namespace {

void check_query(const ShellTable& table, double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw std::domain_error("shell query: mu must be finite and >= 0");
  if (mu > table.cutoff())
    throw std::out_of_range(
        "shell query: mu=" + std::to_string(mu) + " exceeds table cutoff " +
        std::to_string(table.cutoff()) + "; rebuild the table with a larger cutoff");
}

}  // namespace

std::int64_t count_fermions(const ShellTable& table, double mu) {
  check_query(table, mu);
  std::size_t end = table.first_above(mu);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < end; ++i) total += table.m[i];
  return total;
}

std::int64_t fermi_sea_energy_reduced(const ShellTable& table, double mu) {
  check_query(table, mu);
  std::size_t end = table.first_above(mu);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < end; ++i) total += table.m[i] * table.n[i];
  return total;
}

double fermi_sea_energy(const ShellTable& table, double mu) {
  return table.unit * static_cast<double>(fermi_sea_energy_reduced(table, mu));
}

DensityReport density_deviation(const ModelParams& params,
                                const ShellTable& table) {
  params.validate();
  const double N = static_cast<double>(count_fermions(table, params.mu));
  const double L = params.L;
  DensityReport r;
  r.deviation = std::abs(N / (L * L) - params.mu / (4.0 * M_PI));
  r.bound = 2.0 * std::sqrt(params.mu) / (M_PI * L) + 3.0 / (L * L);
  if (r.deviation > r.bound)
    throw certification_error(
        "density_deviation: measured deviation " + std::to_string(r.deviation) +
        " exceeds the proven bound " + std::to_string(r.bound));
  return r;
}

// ---------------------------------------------------------------------------
// Disk format:
//   POLARON-SHELLS v1
//   unit <%.17g> cutoff <n_max>
//   <n> <m>          (one pair per line, increasing n)

static constexpr const char* kMagic = "POLARON-SHELLS v1";

std::string ShellCache::file_name(double unit, std::int64_t n_max) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "shells-%016" PRIx64 "-%" PRId64 ".txt",
                static_cast<std::uint64_t>(std::bit_cast<std::uint64_t>(unit)),
                n_max);
  return buf;
}

void write_shell_table(const ShellTable& table, const std::filesystem::path& file) {
  std::filesystem::path tmp = file;
  tmp += ".tmp";
  FILE* f = std::fopen(tmp.string().c_str(), "w");
  if (!f)
    throw std::runtime_error("write_shell_table: cannot open " + tmp.string() +
                             ": " + std::strerror(errno));
  std::fprintf(f, "%s\n", kMagic);
  std::fprintf(f, "unit %.17g cutoff %" PRId64 "\n", table.unit, table.n_max);
  for (std::size_t i = 0; i < table.size(); ++i)
    std::fprintf(f, "%" PRId64 " %d\n", table.n[i], table.m[i]);
  if (std::fclose(f) != 0)
    throw std::runtime_error("write_shell_table: close failed on " + tmp.string());
  std::filesystem::rename(tmp, file);
}

ShellTable read_shell_table(const std::filesystem::path& file) {
  FILE* f = std::fopen(file.string().c_str(), "r");
  if (!f)
    throw std::runtime_error("read_shell_table: cannot open " + file.string());
  struct Closer {
    FILE* f;
    ~Closer() { std::fclose(f); }
  } closer{f};

  char line[128];
  if (!std::fgets(line, sizeof line, f) ||
      std::strncmp(line, kMagic, std::strlen(kMagic)) != 0)
    throw std::runtime_error("read_shell_table: bad magic in " + file.string());

  ShellTable t;
  if (!std::fgets(line, sizeof line, f))
    throw std::runtime_error("read_shell_table: missing header in " + file.string());
  {
    double unit = 0.0;
    long long nm = -1;
    if (std::sscanf(line, "unit %lg cutoff %lld", &unit, &nm) != 2 || nm < 0)
      throw std::runtime_error("read_shell_table: bad header in " + file.string());
    t.unit = unit;
    t.n_max = nm;
  }
  long long prev = -1;
  while (std::fgets(line, sizeof line, f)) {
    long long n = 0, m = 0;
    if (std::sscanf(line, "%lld %lld", &n, &m) != 2 || n <= prev || m <= 0 ||
        n > t.n_max)
      throw std::runtime_error("read_shell_table: bad shell row in " + file.string());
    prev = n;
    t.n.push_back(n);
    t.m.push_back(static_cast<std::int32_t>(m));
  }
  if (t.n.empty() || t.n.front() != 0)
    throw std::runtime_error("read_shell_table: table must start at n=0 in " +
                             file.string());
  return t;
}

ShellCache::ShellCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::shared_ptr<const ShellTable> ShellCache::get(double unit,
                                                  std::int64_t n_max,
                                                  std::size_t budget_bytes) {
  const auto key = std::make_pair(std::bit_cast<std::uint64_t>(unit), n_max);
  std::lock_guard<std::mutex> lock(mutex_);
  if (auto it = mem_.find(key); it != mem_.end()) return it->second;

  if (!dir_.empty()) {
    auto file = dir_ / file_name(unit, n_max);
    if (std::filesystem::exists(file)) {
      try {
        auto loaded = read_shell_table(file);
        if (loaded.unit == unit && loaded.n_max == n_max) {
          auto sp = std::make_shared<const ShellTable>(std::move(loaded));
          mem_.emplace(key, sp);
          return sp;
        }
      } catch (const std::exception&) {
        // corrupt or mismatched file: fall through and rebuild
      }
    }
  }

  auto built = std::make_shared<const ShellTable>(
      build_shell_table(unit, unit * static_cast<double>(n_max), budget_bytes));
  mem_.emplace(key, built);
  if (!dir_.empty()) write_shell_table(*built, dir_ / file_name(unit, n_max));
  return built;
}

std::shared_ptr<const ShellTable> ShellCache::get_at_least(
    double unit, std::int64_t n_max, std::size_t budget_bytes) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto bits = std::bit_cast<std::uint64_t>(unit);
    auto it = mem_.lower_bound(std::make_pair(bits, n_max));
    if (it != mem_.end() && it->first.first == bits) return it->second;
  }
  return get(unit, n_max, budget_bytes);
}

std::vector<ShellCache::Entry> ShellCache::inspect() const {
  std::vector<Entry> out;
  if (dir_.empty() || !std::filesystem::exists(dir_)) return out;
  for (const auto& e : std::filesystem::directory_iterator(dir_)) {
    if (!e.is_regular_file()) continue;
    auto name = e.path().filename().string();
    std::uint64_t bits = 0;
    long long nm = 0;
    if (std::sscanf(name.c_str(), "shells-%16" SCNx64 "-%lld.txt", &bits, &nm) != 2)
      continue;
    out.push_back(Entry{e.path(), std::bit_cast<double>(bits), nm,
                        e.file_size()});
  }
  std::sort(out.begin(), out.end(),
            [](const Entry& a, const Entry& b) { return a.file < b.file; });
  return out;
}

ShellCache& default_shell_cache() {
  static ShellCache cache;
  return cache;
}

std::size_t ShellCache::clear() {
  std::size_t removed = 0;
  for (const auto& e : inspect()) {
    std::error_code ec;
    if (std::filesystem::remove(e.file, ec)) ++removed;
  }
  std::lock_guard<std::mutex> lock(mutex_);
  mem_.clear();
  return removed;
}

}  // namespace polaron2d
