#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace polaron2d {

// Hierarchical evaluator for Cauchy-kernel sums over a fixed sorted set of
// real points p_i with nonnegative weights w_i:
//
//   sum_inv(x)    = sum_i w_i / (p_i - x)
//   sum_inv_sq(x) = sum_i w_i / (p_i - x)^2
//
// restricted to an arbitrary contiguous index window [i0, i1).  Clusters
// well separated from x are collapsed into scaled moments; everything else
// is summed directly.  Each query can report an upper bound on the absolute
// truncation error of the multipole part, so callers can fold it into a
// certified radius.
//
// Build cost is O(n * kMoments), queries cost O(log n * kMoments) plus a
// few direct leaves.  Results depend only on (points, weights, x, i0, i1),
// never on query history, so repeated and concurrent use is reproducible.
class CauchyTree {
 public:
  // Points must be sorted ascending and both vectors equally long.
  CauchyTree(std::vector<double> positions, std::vector<double> weights);

  std::size_t size() const { return pos_.size(); }
  const std::vector<double>& positions() const { return pos_; }
  const std::vector<double>& weights() const { return wgt_; }

  // Evaluates both kernels over [i0, i1) in one traversal.  x must not
  // coincide exactly with any point inside the window.  err_inv / err_sq,
  // when non-null, receive bounds on the truncation error committed by the
  // far-field expansions (zero when every term was summed directly).
  void eval(double x, std::size_t i0, std::size_t i1, double* inv,
            double* inv_sq, double* err_inv = nullptr,
            double* err_sq = nullptr) const;

  double sum_inv(double x, std::size_t i0, std::size_t i1,
                 double* err = nullptr) const;
  double sum_inv_sq(double x, std::size_t i0, std::size_t i1,
                    double* err = nullptr) const;

  static constexpr std::size_t kLeafSize = 256;
  static constexpr int kMoments = 48;
  // Opening threshold: a cluster of radius r at distance d from x is
  // expanded only when r <= kTheta * d, which caps the expansion ratio and
  // makes the kMoments-term truncation error ~2^-48 relative.
  static constexpr double kTheta = 0.5;

 private:
  struct Node {
    std::size_t lo = 0, hi = 0;        // index window covered, [lo, hi)
    std::int32_t left = -1, right = -1;
    double center = 0.0;
    double radius = 0.0;
    double wsum = 0.0;                  // total weight in the window
    double q[kMoments] = {};            // q_d = sum w ((p - center)/radius)^d
  };

  std::int32_t build(std::size_t lo, std::size_t hi);
  void leaf_moments(Node& node) const;
  void merge_child(Node& parent, const Node& child) const;

  std::vector<double> pos_;
  std::vector<double> wgt_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace polaron2d
