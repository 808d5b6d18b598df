#include "tailidx/numeric.hpp"

#include <algorithm>
#include <array>

namespace tailidx {

double pow1m(double p, std::uint64_t n) {
  if (n == 0 || p <= 0.0) return 1.0;
  if (p >= 1.0) return 0.0;
  if (p > 0.99) {
    // 1 - p is exact here (Sterbenz), so squaring loses only rounding.
    double base = 1.0 - p;
    double result = 1.0;
    while (n != 0) {
      if (n & 1u) result *= base;
      base *= base;
      n >>= 1u;
      if (result == 0.0) break;
    }
    return result;
  }
  return std::exp(static_cast<double>(n) * std::log1p(-p));
}

double pow1m(double p, double n) {
  if (n <= 0.0 || p <= 0.0) return 1.0;
  if (p >= 1.0) return 0.0;
  if (n < 9.0e15 && n == std::floor(n)) return pow1m(p, static_cast<std::uint64_t>(n));
  return std::exp(n * std::log1p(-p));
}

namespace {

// B_{2i} / (2i)! for i = 1..6.
constexpr std::array<double, 6> kBernoulliOverFactorial = {
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
};

}  // namespace

Interval scaled_hurwitz_tail(double s, double N) {
  // N^s * sum_{k>=N} k^{-s}
  //   = N/(s-1) + 1/2 + sum_i B_{2i}/(2i)! (s)_{2i-1} N^{1-2i} + R_m.
  constexpr int kTerms = 4;
  double partial = N / (s - 1.0) + 0.5;
  double rising = s;  // (s)_1
  double npow = 1.0 / N;
  double next = 0.0;
  for (int i = 1; i <= kTerms + 1; ++i) {
    const double term = kBernoulliOverFactorial[i - 1] * rising * npow;
    if (i == kTerms + 1) {
      next = term;
      break;
    }
    partial += term;
    // (s)_{2i+1} = (s)_{2i-1} (s + 2i - 1)(s + 2i)
    rising *= (s + 2.0 * i - 1.0) * (s + 2.0 * i);
    npow /= N * N;
  }
  return {std::min(partial, partial + next), std::max(partial, partial + next)};
}

Interval hurwitz_tail(double s, std::uint64_t N) {
  constexpr std::uint64_t kSwitch = 16;
  CompensatedSum head;
  std::uint64_t k = std::max<std::uint64_t>(N, 1);
  for (; k < kSwitch; ++k) head.add(std::pow(static_cast<double>(k), -s));
  const double kd = static_cast<double>(k);
  const double scale = std::pow(kd, -s);
  const Interval tail = scaled_hurwitz_tail(s, kd);
  return {head.value() + scale * tail.lo, head.value() + scale * tail.hi};
}

Interval log_power_tail(double lambda, std::uint64_t N) {
  const double x = static_cast<double>(N);
  const double lx = std::log(x);
  const double h = 1.0 / (x * std::pow(lx, lambda));
  const double dh = -h * (1.0 + lambda / lx) / x;
  const double integral = std::pow(lx, 1.0 - lambda) / (lambda - 1.0);
  const double lo = integral + 0.5 * h;
  return {lo, lo - dh / 12.0};
}

}  // namespace tailidx
