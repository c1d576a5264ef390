#include "polaron2d/cauchy_tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polaron2d {

namespace {

// Pascal's triangle up to kMoments rows.  C(47, 23) ~ 1.6e13 is still exact
// in double.
struct Binomials {
  double c[CauchyTree::kMoments][CauchyTree::kMoments];
  Binomials() {
    for (int n = 0; n < CauchyTree::kMoments; ++n) {
      c[n][0] = 1.0;
      c[n][n] = 1.0;
      for (int k = 1; k < n; ++k) c[n][k] = c[n - 1][k - 1] + c[n - 1][k];
    }
  }
};

const Binomials& binom() {
  static const Binomials table;
  return table;
}

// Tail of sum_{d >= D} theta^d and sum_{d >= D} (d+1) theta^d, divided by
// the leading |coefficient| bound.  Multiplied by wsum/|c-x| (resp. ^2) at
// query time.
constexpr double tail_geometric(double theta, int d0) {
  double t = 1.0;
  for (int i = 0; i < d0; ++i) t *= theta;
  return t / (1.0 - theta);
}

constexpr double tail_geometric_deriv(double theta, int d0) {
  // sum_{d>=d0} (d+1) theta^d = theta^d0 ((d0+1)(1-theta) + theta)/(1-theta)^2
  double t = 1.0;
  for (int i = 0; i < d0; ++i) t *= theta;
  return t * ((d0 + 1) * (1.0 - theta) + theta) /
         ((1.0 - theta) * (1.0 - theta));
}

constexpr double kErrInv =
    tail_geometric(CauchyTree::kTheta, CauchyTree::kMoments);
constexpr double kErrSq =
    tail_geometric_deriv(CauchyTree::kTheta, CauchyTree::kMoments);

}  // namespace

CauchyTree::CauchyTree(std::vector<double> positions,
                       std::vector<double> weights)
    : pos_(std::move(positions)), wgt_(std::move(weights)) {
  if (pos_.size() != wgt_.size())
    throw std::invalid_argument("CauchyTree: positions/weights size mismatch");
  if (pos_.empty()) return;
  if (!std::is_sorted(pos_.begin(), pos_.end()))
    throw std::invalid_argument("CauchyTree: positions must be ascending");
  nodes_.reserve(2 * (pos_.size() / kLeafSize + 2));
  root_ = build(0, pos_.size());
}

std::int32_t CauchyTree::build(std::size_t lo, std::size_t hi) {
  const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  {
    Node& node = nodes_.back();
    node.lo = lo;
    node.hi = hi;
    node.center = 0.5 * (pos_[lo] + pos_[hi - 1]);
    node.radius = std::max(0.5 * (pos_[hi - 1] - pos_[lo]), 1e-12);
  }
  if (hi - lo <= kLeafSize) {
    leaf_moments(nodes_[id]);
    nodes_[id].wsum = nodes_[id].q[0];
    return id;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  const std::int32_t l = build(lo, mid);
  const std::int32_t r = build(mid, hi);
  // nodes_ may have reallocated during recursion; re-resolve the reference.
  Node& node = nodes_[id];
  node.left = l;
  node.right = r;
  merge_child(node, nodes_[l]);
  merge_child(node, nodes_[r]);
  node.wsum = node.q[0];
  return id;
}

void CauchyTree::leaf_moments(Node& node) const {
  const double inv_r = 1.0 / node.radius;
  for (std::size_t i = node.lo; i < node.hi; ++i) {
    const double u = (pos_[i] - node.center) * inv_r;
    double t = wgt_[i];
    for (int d = 0; d < kMoments; ++d) {
      node.q[d] += t;
      t *= u;
    }
  }
}

void CauchyTree::merge_child(Node& parent, const Node& child) const {
  // q_d^P = sum_k C(d,k) (delta/r_P)^(d-k) (r_C/r_P)^k q_k^C, with
  // |delta| + r_C <= r_P so every coefficient sum is bounded by 1 and the
  // translation never amplifies the weights.
  const double alpha = (child.center - parent.center) / parent.radius;
  const double beta = child.radius / parent.radius;
  const Binomials& B = binom();
  double alpha_pow[kMoments];
  double bq[kMoments];
  alpha_pow[0] = 1.0;
  double beta_pow = 1.0;
  for (int k = 1; k < kMoments; ++k)
    alpha_pow[k] = alpha_pow[k - 1] * alpha;
  for (int k = 0; k < kMoments; ++k) {
    bq[k] = beta_pow * child.q[k];
    beta_pow *= beta;
  }
  for (int d = 0; d < kMoments; ++d) {
    double acc = 0.0;
    for (int k = 0; k <= d; ++k) acc += B.c[d][k] * alpha_pow[d - k] * bq[k];
    parent.q[d] += acc;
  }
}

void CauchyTree::eval(double x, std::size_t i0, std::size_t i1, double* inv,
                      double* inv_sq, double* err_inv, double* err_sq) const {
  double acc_inv = 0.0, acc_sq = 0.0, e_inv = 0.0, e_sq = 0.0;
  i1 = std::min(i1, pos_.size());
  if (root_ >= 0 && i0 < i1) {
    // Explicit stack; depth is ~log2(n / kLeafSize) + a few.
    std::int32_t stack[64];
    int top = 0;
    stack[top++] = root_;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (node.hi <= i0 || node.lo >= i1) continue;
      const bool whole = node.lo >= i0 && node.hi <= i1;
      if (whole) {
        const double denom = node.center - x;
        if (node.radius <= kTheta * std::abs(denom)) {
          const double v = -node.radius / denom;
          double p = 0.0, pd = 0.0;
          for (int d = kMoments - 1; d >= 0; --d) {
            p = node.q[d] + v * p;
            pd = (d + 1) * node.q[d] + v * pd;
          }
          acc_inv += p / denom;
          acc_sq += pd / (denom * denom);
          e_inv += node.wsum * kErrInv / std::abs(denom);
          e_sq += node.wsum * kErrSq / (denom * denom);
          continue;
        }
      }
      if (node.left < 0) {
        const std::size_t a = std::max(node.lo, i0);
        const std::size_t b = std::min(node.hi, i1);
        for (std::size_t i = a; i < b; ++i) {
          const double d = pos_[i] - x;
          acc_inv += wgt_[i] / d;
          acc_sq += wgt_[i] / (d * d);
        }
        continue;
      }
      stack[top++] = node.right;
      stack[top++] = node.left;
    }
  }
  if (inv) *inv = acc_inv;
  if (inv_sq) *inv_sq = acc_sq;
  if (err_inv) *err_inv = e_inv;
  if (err_sq) *err_sq = e_sq;
}

double CauchyTree::sum_inv(double x, std::size_t i0, std::size_t i1,
                           double* err) const {
  double v = 0.0;
  eval(x, i0, i1, &v, nullptr, err, nullptr);
  return v;
}

double CauchyTree::sum_inv_sq(double x, std::size_t i0, std::size_t i1,
                              double* err) const {
  double v = 0.0;
  eval(x, i0, i1, nullptr, &v, nullptr, err);
  return v;
}

}  // namespace polaron2d
