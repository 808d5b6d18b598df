#include "tailidx/tail_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "tailidx/error.hpp"

namespace tailidx {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

enum class Kernel { Binomial, Poisson };

double weight(Kernel kernel, double p, double n) {
  return kernel == Kernel::Binomial ? pow1m(p, n) : std::exp(-n * p);
}

void check_eps(double eps) {
  if (!(eps > 0) || !std::isfinite(eps)) fail(Errc::InvalidParams, "eps must be positive");
}

// Result on the zeta scale.
struct Sum {
  double value = 0;
  double trunc = 0;
  std::uint64_t terms = 0;
  bool within = true;
};

Sum finite_sum(const Distribution& dist, Kernel kernel, double n) {
  // Sorting makes the result independent of the order the vector was given in.
  std::vector<double> p(*dist.support_size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = dist.prob(k + 1);
  std::sort(p.begin(), p.end(), std::greater<>());
  CompensatedSum acc;
  for (double x : p) acc.add(x * weight(kernel, x, n));
  return {acc.value(), 0.0, p.size(), true};
}

Sum generic_sum(const Distribution& dist, Kernel kernel, double n, double eps_z,
                std::uint64_t max_terms) {
  CompensatedSum acc;
  const std::uint64_t limit = dist.max_index();
  for (std::uint64_t k = 1;; ++k) {
    if (k > limit) {
      fail(Errc::DepthExceeded,
           std::string(kind_name(dist.kind())) + ": generation depth " + std::to_string(limit) +
               " reached before the truncation bound met eps");
    }
    const double p = dist.prob(k);
    acc.add(p * weight(kernel, p, n));
    const double u = dist.tail_mass_bound(k);
    if (u <= eps_z) return {acc.value(), u, k, true};
    if (k >= max_terms) return {acc.value(), u, k, false};
  }
}

// sum_{k >= 1} p_k w(p_k) for p_k = c k^{-lambda}.  Terms below the index N
// with n p_N <= 1/2 are summed directly; the rest is expanded as
// sum_j (-1)^j coef_j sum_{k >= N} p_k^{j+1}, whose per-k terms alternate and
// decrease, so consecutive partial sums bracket the tail.
Sum power_sum(const PowerLaw& law, Kernel kernel, double n, double eps_z) {
  const double c = law.c;
  const double lambda = law.lambda;
  double Nd = std::max(64.0, std::ceil(std::pow(2.0 * n * c, 1.0 / lambda)));
  while (n * c * std::pow(Nd, -lambda) > 0.5) Nd += 1.0;
  if (Nd > 4.0e9) fail(Errc::NoTailBound, "power: n too large for the direct head summation");
  const auto N = static_cast<std::uint64_t>(Nd);

  CompensatedSum head;
  for (std::uint64_t k = 1; k < N; ++k) {
    const double p = c * std::pow(static_cast<double>(k), -lambda);
    head.add(p * weight(kernel, p, n));
  }

  const double pN = c * std::pow(Nd, -lambda);
  double b = pN;  // coef_j p_N^{j+1}
  Interval prev{0, 0};
  Interval cur{0, 0};
  std::uint64_t j = 0;
  for (; j < 400; ++j) {
    const Interval h = scaled_hurwitz_tail(lambda * static_cast<double>(j + 1), Nd);
    const Interval a{b * h.lo, b * h.hi};
    prev = cur;
    if (j % 2 == 0) {
      cur = {cur.lo + a.lo, cur.hi + a.hi};
    } else {
      cur = {cur.lo - a.hi, cur.hi - a.lo};
    }
    if (a.hi <= 1e-18 * std::fabs(cur.lo) || b == 0.0) break;
    const double jd = static_cast<double>(j);
    const double coef = kernel == Kernel::Binomial ? std::max(0.0, n - jd) / (jd + 1.0)
                                                   : n / (jd + 1.0);
    b *= coef * pN;
  }
  const Interval tail{std::min(prev.lo, cur.lo), std::max(prev.hi, cur.hi)};
  // Allowance for rounding in the head sum and the expansion.
  const double width = std::max(0.0, tail.hi - tail.lo) +
                       4.0 * std::numeric_limits<double>::epsilon() * (head.value() + tail.hi);
  return {head.value() + tail.lo, width, N - 1 + j + 1, width <= eps_z};
}

// LogPower: direct summation within a budget, then the tail
// sum_{k > K} p_k w(p_k) is bracketed below by max(w(p_{K+1}) S1, S1 - n S2)
// and above by S1, where S1, S2 bound sum p_k and sum p_k^2 beyond K.
Sum log_power_sum(const Distribution& dist, Kernel kernel, double n, double eps_z,
                  std::uint64_t budget) {
  CompensatedSum acc;
  std::uint64_t K = 0;
  for (std::uint64_t k = 1; k <= budget; ++k) {
    const double p = dist.prob(k);
    acc.add(p * weight(kernel, p, n));
    K = k;
    const double u = dist.tail_mass_bound(k);
    if (u <= eps_z) return {acc.value(), u, k, true};
  }
  const double c = dist.norm_constant();
  const double lambda = dist.spec().param("lambda");
  const auto k0 = static_cast<std::uint64_t>(dist.spec().param("k0"));
  const std::uint64_t X = K + k0;  // x of index K + 1
  const Interval s1 = c * log_power_tail(lambda, X);
  const double pX = dist.prob(K + 1);
  const double Xd = static_cast<double>(X);
  const double s2 = pX * pX + c * c / (Xd * std::pow(std::log(Xd), 2.0 * lambda));
  const double lo = std::max(weight(kernel, pX, n) * s1.lo, s1.lo - n * s2);
  const double width = s1.hi - lo;
  return {acc.value() + lo, width, K, width <= eps_z};
}

Sum dispatch(const Distribution& dist, Kernel kernel, double n, double eps_z,
             const EvalOptions& opts) {
  if (dist.support_size()) return finite_sum(dist, kernel, n);
  if (auto law = dist.power_law()) return power_sum(*law, kernel, n, eps_z);
  if (dist.kind() == FamilyKind::LogPower)
    return log_power_sum(dist, kernel, n, eps_z, opts.log_power_terms);
  return generic_sum(dist, kernel, n, eps_z, opts.max_terms);
}

void check_n(std::uint64_t n) {
  if (n == 0) fail(Errc::InvalidParams, "n must be >= 1");
}

}  // namespace

IndexValue zeta1(const Distribution& dist, std::uint64_t n, double eps, const EvalOptions& opts) {
  check_n(n);
  check_eps(eps);
  const double nd = static_cast<double>(n);
  const Sum s = dispatch(dist, Kernel::Binomial, nd, eps / nd, opts);
  return {n, s.value, s.trunc, s.terms, s.within};
}

IndexValue tn(const Distribution& dist, std::uint64_t n, double eps, const EvalOptions& opts) {
  IndexValue z = zeta1(dist, n, eps, opts);
  const double nd = static_cast<double>(n);
  z.value *= nd;
  z.trunc_error *= nd;
  return z;
}

IndexValue poisson_zeta1(const Distribution& dist, double n, double eps,
                         const EvalOptions& opts) {
  if (!(n > 0) || !std::isfinite(n)) fail(Errc::InvalidParams, "n must be positive");
  check_eps(eps);
  const Sum s = dispatch(dist, Kernel::Poisson, n, eps / n, opts);
  return {static_cast<std::uint64_t>(n), s.value, s.trunc, s.terms, s.within};
}

LargeIndexValue tn_log2(const Distribution& dist, double L, double eps) {
  if (!std::isfinite(L) || L < 0) fail(Errc::InvalidParams, "log2 n must be finite and >= 0");
  check_eps(eps);
  const double n = std::exp2(L);
  if (dist.power_law() || dist.kind() == FamilyKind::LogPower) {
    if (L > 62)
      fail(Errc::NoTailBound, std::string(kind_name(dist.kind())) +
                                  ": no certified tail bound for n beyond 2^62");
    const Sum s = dispatch(dist, Kernel::Binomial, n, eps / n, {});
    return {L, n * s.value, n * s.trunc, s.terms};
  }

  // term = n p (1-p)^n = exp(x - exp(x + corr)) with x = ln(n p) and
  // corr = ln(-log1p(-p) / p), which keeps every intermediate in range.
  const double log2_eps = std::log2(eps);
  const std::uint64_t limit = dist.support_size() ? *dist.support_size() : dist.max_index();
  CompensatedSum acc;
  for (std::uint64_t k = 1;; ++k) {
    if (k > limit) {
      if (dist.support_size()) return {L, acc.value(), 0.0, k - 1};
      fail(Errc::DepthExceeded,
           std::string(kind_name(dist.kind())) + ": generation depth " + std::to_string(limit) +
               " reached before the truncation bound met eps");
    }
    const double q = dist.log2_prob(k);
    if (std::isfinite(q)) {
      double corr = 0.0;
      if (q > -60.0) {
        const double p = std::exp2(q);
        corr = p >= 1.0 ? std::numeric_limits<double>::infinity() : std::log(-std::log1p(-p) / p);
      } else {
        corr = 0.5 * std::exp2(q);  // ln(1 + p/2 + ...) to first order
      }
      const double x = (L + q) * kLn2;
      const double inner = x + corr;
      const double term = inner > 709.0 ? 0.0 : std::exp(x - std::exp(inner));
      acc.add(term);
    }
    const double lt = dist.log2_tail_mass_bound(k);
    if (L + lt <= log2_eps) return {L, acc.value(), std::exp2(L + lt), k};
    if (k >= (std::uint64_t{1} << 28)) fail(Errc::NoTailBound, "log-space evaluation budget exceeded");
  }
}

std::pair<double, double> scaled_pair(const Distribution& dist, std::uint64_t n, double delta,
                                      double eps) {
  if (!(delta > 0 && delta < 1)) fail(Errc::InvalidParams, "delta must lie in (0, 1)");
  const double scale = std::pow(static_cast<double>(n), 1.0 - delta);
  const IndexValue z = zeta1(dist, n, eps);
  const IndexValue e = poisson_zeta1(dist, static_cast<double>(n), eps);
  return {scale * z.value, scale * e.value};
}

double power_tail_limit(double c, double lambda) {
  if (!(c > 0) || !std::isfinite(c)) fail(Errc::InvalidParams, "c must be positive");
  if (!(lambda > 1) || !std::isfinite(lambda)) fail(Errc::InvalidParams, "lambda must exceed 1");
  return std::pow(c, 1.0 / lambda) / lambda * std::tgamma(1.0 - 1.0 / lambda);
}

EmGap em_gap(const Distribution& dist, std::uint64_t n, std::uint64_t x0) {
  const auto law = dist.power_law();
  if (!law) fail(Errc::InvalidParams, "em_gap requires a power distribution");
  check_n(n);
  if (x0 == 0) fail(Errc::InvalidParams, "x0 must be >= 1");
  const double c = law->c;
  const double lambda = law->lambda;
  const double nd = static_cast<double>(n);
  const double scale = std::pow(nd, 1.0 - 1.0 / lambda);
  auto f = [&](double x) {
    const double p = c * std::pow(x, -lambda);
    return scale * p * std::exp(-nd * p);
  };

  EmGap out;
  const IndexValue all = poisson_zeta1(dist, nd, 1e-13);
  CompensatedSum head;
  for (std::uint64_t k = 1; k < x0; ++k) head.add(f(static_cast<double>(k)) / scale);
  out.sum = scale * (all.value - head.value());
  const double u0 = nd * c * std::pow(static_cast<double>(x0), -lambda);
  out.integral =
      std::pow(c, 1.0 / lambda) / lambda * boost::math::tgamma_lower(1.0 - 1.0 / lambda, u0);
  out.mode_value = f(std::pow(nd * c, 1.0 / lambda));
  out.bound = f(static_cast<double>(x0)) + 2.0 * out.mode_value;
  return out;
}

IndexSeries index_series(const Distribution& dist, const std::vector<std::uint64_t>& schedule,
                         double eps) {
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i] <= schedule[i - 1])
      fail(Errc::InvalidParams, "schedule must be strictly increasing");
  IndexSeries out;
  out.schedule = schedule;
  out.points.reserve(schedule.size());
  for (std::uint64_t n : schedule) out.points.push_back(tn(dist, n, eps));
  return out;
}

std::vector<std::uint64_t> geometric_schedule(std::uint64_t start, std::uint64_t stop,
                                              double factor) {
  if (start < 1) fail(Errc::InvalidParams, "schedule start must be >= 1");
  if (stop < start) fail(Errc::InvalidParams, "schedule stop must be >= start");
  if (!(factor > 1) || !std::isfinite(factor))
    fail(Errc::InvalidParams, "schedule factor must exceed 1");
  std::vector<std::uint64_t> out;
  const double limit = static_cast<double>(stop) * (1.0 + 1e-12);
  for (int i = 0;; ++i) {
    const double v = std::round(static_cast<double>(start) * std::pow(factor, i));
    if (v > limit || v >= 1.8e19) break;
    const auto n = std::min(static_cast<std::uint64_t>(v), stop);
    if (out.empty() || n > out.back()) out.push_back(n);
    if (out.size() > 100000) fail(Errc::InvalidParams, "schedule has too many points");
  }
  return out;
}

OscillationState oscillation_state(const Distribution& dist, std::uint64_t n) {
  check_n(n);
  if (dist.support_size())
    fail(Errc::FiniteSupport, "oscillation_state needs an infinite support");
  const double n1 = static_cast<double>(n) + 1.0;
  auto above = [&](std::uint64_t k) { return dist.prob(k) * n1 >= 1.0; };
  std::uint64_t lo = dist.k0_head();
  if (!above(lo)) fail(Errc::InvalidParams, "n too small: no p_k >= 1/(n+1) in the monotone range");
  // Gallop to a k with p_k < 1/(n+1), then bisect (lo above, hi below).
  std::uint64_t step = 1;
  std::uint64_t hi = lo + step;
  while (above(hi)) {
    lo = hi;
    step *= 2;
    hi = lo + step;
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (above(mid) ? lo : hi) = mid;
  }
  OscillationState s{n, lo, static_cast<double>(n) * dist.prob(lo)};
  if (!(s.c_of_n * n1 >= static_cast<double>(n) * (1.0 - 1e-15)))
    fail(Errc::NonFinite, "oscillation_state: sandwich lower bound violated");
  return s;
}

double oscillation_t(double c) {
  if (!(c > 0) || !std::isfinite(c)) fail(Errc::InvalidParams, "c must be positive");
  constexpr int kCap = 200;
  CompensatedSum fwd;
  for (int j = 0; j < kCap; ++j) {
    const double x = c * std::exp(static_cast<double>(j));
    const double term = x * std::exp(-x);
    fwd.add(term);
    if (x >= 1.0 && term < 1e-16 * fwd.value()) break;
  }
  CompensatedSum bwd;
  for (int j = 1; j <= kCap; ++j) {
    const double x = c * std::exp(-static_cast<double>(j));
    const double term = x * std::exp(-x);
    bwd.add(term);
    if (term < 1e-16 * (fwd.value() + bwd.value())) break;
  }
  return fwd.value() + bwd.value();
}

}  // namespace tailidx
