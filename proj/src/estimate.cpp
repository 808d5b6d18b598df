#include "tailidx/estimate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <string>

#include "tailidx/error.hpp"

namespace tailidx {

namespace {

__extension__ typedef unsigned __int128 u128;

// a (a-1) ... (a-v+1); caller keeps the result within 128 bits.
u128 falling(std::uint64_t a, std::uint64_t v) {
  u128 r = 1;
  for (std::uint64_t j = 0; j < v; ++j) r *= static_cast<u128>(a - j);
  return r;
}

void check_v(const FrequencyTable& freq, std::uint64_t v) {
  if (freq.n < 2 || v < 1 || v > freq.n - 1)
    fail(Errc::InvalidV, "v must lie in [1, n-1] (n = " + std::to_string(freq.n) +
                             ", v = " + std::to_string(v) + ")");
}

std::uint64_t parse_uint(std::string_view s, int lineno) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(Errc::ParseError, "line " + std::to_string(lineno) + ": expected a non-negative integer");
  return v;
}

}  // namespace

FrequencyTable FrequencyTable::from_counts(std::map<std::uint64_t, std::uint64_t> counts) {
  FrequencyTable f;
  for (auto it = counts.begin(); it != counts.end();) {
    if (it->first == 0) fail(Errc::InvalidParams, "letter indices start at 1");
    if (it->second == 0) {
      it = counts.erase(it);
      continue;
    }
    f.n += it->second;
    f.N1 += it->second == 1;
    ++it;
  }
  f.counts = std::move(counts);
  return f;
}

void write_csv(std::ostream& out, const FrequencyTable& freq) {
  out << "k,y\n";
  for (const auto& [k, y] : freq.counts) out << k << ',' << y << '\n';
}

FrequencyTable read_csv(std::istream& in) {
  std::string line;
  int lineno = 1;
  if (!std::getline(in, line)) fail(Errc::ParseError, "empty frequency table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "k,y") fail(Errc::ParseError, "frequency table header must be 'k,y'");
  std::map<std::uint64_t, std::uint64_t> counts;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(Errc::ParseError, "line " + std::to_string(lineno) + ": expected k,y");
    const std::string_view sv(line);
    const std::uint64_t k = parse_uint(sv.substr(0, comma), lineno);
    const std::uint64_t y = parse_uint(sv.substr(comma + 1), lineno);
    if (k == 0 || y == 0) fail(Errc::ParseError, "line " + std::to_string(lineno) + ": k and y must be positive");
    if (!counts.emplace(k, y).second)
      fail(Errc::ParseError, "line " + std::to_string(lineno) + ": duplicate letter " + std::to_string(k));
  }
  return FrequencyTable::from_counts(std::move(counts));
}

FrequencyTable sample(const Distribution& dist, std::uint64_t n, std::uint64_t seed,
                      const SampleOptions& opts) {
  if (n == 0) fail(Errc::InvalidParams, "sample size must be >= 1");
  std::uint64_t limit = std::min(opts.max_index, dist.max_index());
  if (dist.support_size()) limit = std::min(limit, *dist.support_size());

  std::mt19937_64 rng(seed);
  std::vector<double> cdf;  // cdf[k-1] = p_1 + ... + p_k
  CompensatedSum acc;
  std::uint64_t last_positive = 0;
  bool exhausted = false;  // the remaining mass is below double resolution
  std::map<std::uint64_t, std::uint64_t> counts;
  for (std::uint64_t draw = 0; draw < n; ++draw) {
    const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
    while (!exhausted && (cdf.empty() || cdf.back() <= u)) {
      const std::uint64_t k = cdf.size() + 1;
      if (k > limit) break;
      const double p = dist.prob(k);
      if (p > 0) last_positive = k;
      acc.add(p);
      cdf.push_back(acc.value());
      if (dist.tail_mass_bound(k) <= 0x1p-53) exhausted = true;
    }
    std::uint64_t letter = 0;
    if (!cdf.empty() && cdf.back() > u) {
      letter = static_cast<std::uint64_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()) + 1;
    } else if (exhausted || dist.support_size()) {
      // u fell in the rounding gap between the prefix sum and 1.
      letter = last_positive;
    } else {
      fail(Errc::DepthExceeded, "sample: draw beyond index " + std::to_string(limit));
    }
    ++counts[letter];
  }
  return FrequencyTable::from_counts(std::move(counts));
}

double turing(const FrequencyTable& freq) {
  if (freq.n == 0) fail(Errc::InvalidParams, "empty sample");
  return static_cast<double>(freq.N1) / static_cast<double>(freq.n);
}

double true_missing_mass(const Distribution& dist, const FrequencyTable& freq) {
  CompensatedSum seen;
  for (const auto& entry : freq.counts) seen.add(dist.prob(entry.first));
  return std::clamp(1.0 - seen.value(), 0.0, 1.0);
}

double z1v(const FrequencyTable& freq, std::uint64_t v) {
  check_v(freq, v);
  const std::uint64_t n = freq.n;
  if (n <= 30) {
    // Exact: sum_k y_k ff(n - y_k, v), over ff(n, v + 1).
    u128 num = 0;
    for (const auto& [k, y] : freq.counts) {
      if (n - y < v) continue;
      num += static_cast<u128>(y) * falling(n - y, v);
    }
    const u128 den = falling(n, v + 1);
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
  }
  const long double nl = static_cast<long double>(n);
  const long double vl = static_cast<long double>(v);
  const long double log_den = std::lgamma(nl + 1.0L) - std::lgamma(nl - vl);
  long double sum = 0;
  long double comp = 0;
  for (const auto& [k, y] : freq.counts) {
    if (n - y < v) continue;
    const long double a = nl - static_cast<long double>(y);
    const long double term = static_cast<long double>(y) *
                             std::exp(std::lgamma(a + 1.0L) - std::lgamma(a - vl + 1.0L) - log_den);
    const long double t = sum + term;
    comp += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return static_cast<double>(sum + comp);
}

double t_hat(const FrequencyTable& freq, std::uint64_t v) {
  return static_cast<double>(v) * z1v(freq, v);
}

double z1v_product_form(const FrequencyTable& freq, std::uint64_t v) {
  check_v(freq, v);
  const long double n = static_cast<long double>(freq.n);
  long double coef = 1;  // n^{1+v} (n-1-v)! / n! = prod_{j=0}^{v} n / (n - j)
  for (std::uint64_t j = 0; j <= v; ++j) coef *= n / (n - static_cast<long double>(j));
  long double sum = 0;
  for (const auto& [k, y] : freq.counts) {
    const long double ph = static_cast<long double>(y) / n;
    long double prod = ph;
    for (std::uint64_t j = 0; j < v; ++j) prod *= 1.0L - ph - static_cast<long double>(j) / n;
    sum += prod;
  }
  return static_cast<double>(coef * sum);
}

EstimatorReport estimator_report(const FrequencyTable& freq, const std::vector<std::uint64_t>& vs) {
  EstimatorReport r;
  for (std::uint64_t v : vs) {
    const double z = z1v(freq, v);
    r.v_values.push_back(v);
    r.z1v.push_back(z);
    r.t_hat.push_back(static_cast<double>(v) * z);
  }
  return r;
}

double exact_expectation(const Distribution& dist, std::uint64_t n, Statistic stat) {
  if (!dist.support_size()) fail(Errc::InvalidParams, "exact_expectation needs a finite distribution");
  const std::uint64_t K = *dist.support_size();
  if (K > 6 || n > 12)
    fail(Errc::TooLarge, "exact_expectation supports at most 6 letters and n <= 12");
  if (n == 0) fail(Errc::InvalidParams, "n must be >= 1");
  if (stat.kind == StatisticKind::Z1v && (stat.v < 1 || stat.v > n - 1))
    fail(Errc::InvalidV, "v must lie in [1, n-1]");

  std::vector<long double> p(K);
  for (std::uint64_t k = 0; k < K; ++k) p[k] = dist.prob(k + 1);
  std::vector<std::uint64_t> fact(n + 1, 1);
  for (std::uint64_t i = 1; i <= n; ++i) fact[i] = fact[i - 1] * i;

  long double sum = 0;
  long double comp = 0;
  std::vector<std::uint64_t> y(K, 0);
  // Visit every composition y_1 + ... + y_K = n.
  auto visit = [&]() {
    std::uint64_t denom = 1;
    long double weight = 1;
    for (std::uint64_t k = 0; k < K; ++k) {
      denom *= fact[y[k]];
      for (std::uint64_t j = 0; j < y[k]; ++j) weight *= p[k];
    }
    if (weight == 0) return;
    weight *= static_cast<long double>(fact[n] / denom);
    long double value = 0;
    switch (stat.kind) {
      case StatisticKind::Z1v: {
        std::map<std::uint64_t, std::uint64_t> counts;
        for (std::uint64_t k = 0; k < K; ++k)
          if (y[k] > 0) counts[k + 1] = y[k];
        value = z1v(FrequencyTable::from_counts(std::move(counts)), stat.v);
        break;
      }
      case StatisticKind::Turing: {
        std::uint64_t n1 = 0;
        for (std::uint64_t k = 0; k < K; ++k) n1 += y[k] == 1;
        value = static_cast<long double>(n1) / static_cast<long double>(n);
        break;
      }
      case StatisticKind::MissingMass:
        for (std::uint64_t k = 0; k < K; ++k)
          if (y[k] == 0) value += p[k];
        break;
    }
    const long double term = weight * value;
    const long double t = sum + term;
    comp += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  };
  auto rec = [&](auto&& self, std::uint64_t idx, std::uint64_t left) -> void {
    if (idx + 1 == K) {
      y[idx] = left;
      visit();
      return;
    }
    for (std::uint64_t c = 0; c <= left; ++c) {
      y[idx] = c;
      self(self, idx + 1, left - c);
    }
  };
  rec(rec, 0, n);
  return static_cast<double>(sum + comp);
}

}  // namespace tailidx
