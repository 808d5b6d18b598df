#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

// Small numerical kernels shared by the distribution catalog and the index
// evaluators.

namespace tailidx {

// Closed interval [lo, hi] used for certified enclosures.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

inline Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Interval operator*(double s, Interval a) {
  return s >= 0 ? Interval{s * a.lo, s * a.hi} : Interval{s * a.hi, s * a.lo};
}

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// (1 - p)^n for p in [0, 1].  Uses exp(n * log1p(-p)) except for p close to
// one, where repeated squaring of the exactly representable 1 - p is more
// accurate.
double pow1m(double p, std::uint64_t n);

// Same with a real exponent (used by the index evaluators for n beyond 2^64).
double pow1m(double p, double n);

// Enclosure of N^s * sum_{k >= N} k^{-s} for s > 1 and integer N >= 1,
// from the Euler-Maclaurin expansion.  x^{-s} is completely monotone, so the
// remainder after m correction terms lies between zero and the next term.
Interval scaled_hurwitz_tail(double s, double N);

// Enclosure of sum_{k >= N} k^{-s} (not scaled), N >= 1.
Interval hurwitz_tail(double s, std::uint64_t N);

// Enclosure of sum_{x >= N} 1 / (x * ln(x)^lambda) for integer N >= 2, from
// the trapezoid bounds for completely monotone summands: the sum lies in
// [I + h(N)/2, I + h(N)/2 - h'(N)/12] with I the tail integral.
Interval log_power_tail(double lambda, std::uint64_t N);

inline double log2_add(double a, double b) {
  // log2(2^a + 2^b) without overflow.
  if (a < b) std::swap(a, b);
  if (std::isinf(b) && b < 0) return a;
  return a + std::log2(1.0 + std::exp2(b - a));
}

}  // namespace tailidx
