#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "polaron2d/params.hpp"

namespace polaron2d {

// Energy shells of the lattice Laplacian on (2*pi/L)*Z^2.  A shell is a
// value n expressible as a sum of two integer squares together with its
// representation count m = r2(n); the physical shell energy is unit * n.
// Shells are stored in increasing n with the unit factored out, so counts
// and Fermi-sea energies reduce to exact int64 arithmetic.
struct ShellTable {
  double unit = 0.0;
  std::int64_t n_max = -1;               // every n <= n_max is enumerated
  std::vector<std::int64_t> n;           // strictly increasing
  std::vector<std::int32_t> m;           // r2(n), always > 0 here

  double cutoff() const { return unit * static_cast<double>(n_max); }
  std::size_t size() const { return n.size(); }

  // Index one past the last shell with unit*n <= energy.  Boundary shells
  // (unit*n == energy) are included, matching the k^2 <= mu convention.
  std::size_t first_above(double energy) const;
};

inline constexpr std::size_t kDefaultTableBudgetBytes = std::size_t{512} << 20;

// Enumerates all shells with unit*n <= cutoff by a full quadrant scan with
// symmetry completion.  Throws resource_error when the transient count
// array would exceed budget_bytes.
ShellTable build_shell_table(double unit, double cutoff,
                             std::size_t budget_bytes = kDefaultTableBudgetBytes);

// Number of lattice modes with k^2 <= mu (mu >= 0; boundary included).
// Requires mu <= table.cutoff(), else std::out_of_range.
std::int64_t count_fermions(const ShellTable& table, double mu);

// Sum of k^2 over modes with k^2 <= mu, i.e. the free Fermi-sea energy.
double fermi_sea_energy(const ShellTable& table, double mu);

// Same quantity with the unit factored out (exact integer).
std::int64_t fermi_sea_energy_reduced(const ShellTable& table, double mu);

// |N(mu)/L^2 - mu/(4*pi)| together with its proven bound
// 2*sqrt(mu)/(pi*L) + 3/L^2.  The bound is a theorem; a violation throws
// certification_error.
struct DensityReport {
  double deviation = 0.0;
  double bound = 0.0;
};
DensityReport density_deviation(const ModelParams& params,
                                const ShellTable& table);

// Shared registry of immutable shell tables with an optional disk layer.
// Many readers, single writer: concurrent get() calls for the same key
// build once.  Disk files are one per (unit, n_max) key, written atomically.
class ShellCache {
 public:
  ShellCache() = default;                                // memory only
  explicit ShellCache(std::filesystem::path dir);        // with disk layer

  // Table with exactly the requested n_max (loaded, else built and stored).
  std::shared_ptr<const ShellTable> get(double unit, std::int64_t n_max,
                                        std::size_t budget_bytes =
                                            kDefaultTableBudgetBytes);

  // Cheapest table covering n_max: an already-cached larger table is
  // reused, otherwise equivalent to get().
  std::shared_ptr<const ShellTable> get_at_least(double unit,
                                                 std::int64_t n_max,
                                                 std::size_t budget_bytes =
                                                     kDefaultTableBudgetBytes);

  const std::filesystem::path& dir() const { return dir_; }

  struct Entry {
    std::filesystem::path file;
    double unit;
    std::int64_t n_max;
    std::uintmax_t bytes;
  };
  std::vector<Entry> inspect() const;  // disk entries, lexicographic
  std::size_t clear();                 // removes disk entries, returns count

  static std::string file_name(double unit, std::int64_t n_max);

 private:
  std::filesystem::path dir_;
  std::mutex mutex_;
  std::map<std::pair<std::uint64_t, std::int64_t>,
           std::shared_ptr<const ShellTable>>
      mem_;
};

// Process-wide memory-only cache used whenever a caller does not supply
// its own.  Keeps every module clipping into the same grown tables.
ShellCache& default_shell_cache();

// Serialization used by the disk layer (exposed for tests and the CLI).
void write_shell_table(const ShellTable& table, const std::filesystem::path& file);
ShellTable read_shell_table(const std::filesystem::path& file);

}  // namespace polaron2d
