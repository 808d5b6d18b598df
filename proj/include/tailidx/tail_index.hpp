#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tailidx/distribution.hpp"

namespace tailidx {

inline constexpr double kDefaultEps = 1e-9;

// One evaluation of zeta_{1,n} or t_n.  `value` is a lower bound for the
// series and value + trunc_error an upper bound (up to floating-point
// rounding).  within_eps is false when the evaluator ran out of its term
// budget before the truncation bound reached the requested eps; the bracket
// is still valid.
struct IndexValue {
  std::uint64_t n = 0;
  double value = 0.0;
  double trunc_error = 0.0;
  std::uint64_t terms_used = 0;
  bool within_eps = true;
};

// The same for sample sizes given as n = 2^log2_n, possibly far beyond 2^64.
struct LargeIndexValue {
  double log2_n = 0.0;
  double value = 0.0;
  double trunc_error = 0.0;
  std::uint64_t terms_used = 0;
};

struct IndexSeries {
  std::vector<std::uint64_t> schedule;
  std::vector<IndexValue> points;
};

struct EvalOptions {
  // Terms summed directly before an evaluator falls back to its best
  // certified bracket.
  std::uint64_t max_terms = std::uint64_t{1} << 26;
  // Direct-summation budget for LogPower, whose tail admits no fast
  // expansion.
  std::uint64_t log_power_terms = std::uint64_t{1} << 22;
};

// zeta_{1,n} = sum_k p_k (1 - p_k)^n; trunc_error <= eps / n when within_eps.
IndexValue zeta1(const Distribution& dist, std::uint64_t n, double eps = kDefaultEps,
                 const EvalOptions& opts = {});

// t_n = n zeta_{1,n}, with value and trunc_error scaled by n.
IndexValue tn(const Distribution& dist, std::uint64_t n, double eps = kDefaultEps,
              const EvalOptions& opts = {});

// t_n for n = 2^log2_n, evaluated in log space.  eps is absolute on t_n.
// Throws NoTailBound for Power and LogPower (no log-space tail certificate)
// when n exceeds 2^62.
LargeIndexValue tn_log2(const Distribution& dist, double log2_n, double eps = kDefaultEps);

// sum_k p_k exp(-n p_k) with the same truncation policy as zeta1.
IndexValue poisson_zeta1(const Distribution& dist, double n, double eps = kDefaultEps,
                         const EvalOptions& opts = {});

// (n^{1-delta} sum p_k (1-p_k)^n, n^{1-delta} sum p_k e^{-n p_k}).
std::pair<double, double> scaled_pair(const Distribution& dist, std::uint64_t n, double delta,
                                      double eps = kDefaultEps);

// c^{1/lambda} lambda^{-1} Gamma(1 - 1/lambda).
double power_tail_limit(double c, double lambda);

struct EmGap {
  double sum = 0.0;       // sum_{k >= x0} f_n(k)
  double integral = 0.0;  // integral_{x0}^inf f_n(x) dx
  double bound = 0.0;     // f_n(x0) + 2 f_n(x(n))
  double mode_value = 0.0;  // f_n(x(n)) = 1 / (e n^{1/lambda})
};

// f_n(x) = n^{1-1/lambda} c x^{-lambda} exp(-n c x^{-lambda}) for a Power
// distribution.  Throws InvalidParams for other families.
EmGap em_gap(const Distribution& dist, std::uint64_t n, std::uint64_t x0 = 1);

IndexSeries index_series(const Distribution& dist, const std::vector<std::uint64_t>& schedule,
                         double eps = kDefaultEps);

// Geometric schedule start, start*factor, ... up to stop (inclusive when hit);
// factor may be real, values are rounded and deduplicated.
std::vector<std::uint64_t> geometric_schedule(std::uint64_t start, std::uint64_t stop,
                                              double factor);

struct OscillationState {
  std::uint64_t n = 0;
  std::uint64_t k_star = 0;
  double c_of_n = 0.0;
};

// k* with p_{k*+1} < 1/(n+1) <= p_{k*} and c(n) = n p_{k*}.  Requires an
// infinite support with positive, non-increasing probabilities from k*.
OscillationState oscillation_state(const Distribution& dist, std::uint64_t n);

// c sum_{j>=0} e^j e^{-c e^j} + c sum_{j>=1} e^{-j} e^{-c e^{-j}}.
double oscillation_t(double c);

}  // namespace tailidx
