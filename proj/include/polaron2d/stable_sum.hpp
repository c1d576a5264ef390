#pragma once

#include <cmath>

namespace polaron2d {

// Neumaier-compensated accumulator.  All shell sums in this project add
// terms in ascending shell order through one of these, so results are
// reproducible bit for bit across runs and thread counts.
class StableSum {
 public:
  void add(double x) {
    double t = s_ + x;
    if (std::abs(s_) >= std::abs(x))
      c_ += (s_ - t) + x;
    else
      c_ += (x - t) + s_;
    s_ = t;
  }

  StableSum& operator+=(double x) {
    add(x);
    return *this;
  }

  double get() const { return s_ + c_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace polaron2d
