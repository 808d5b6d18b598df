#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tailidx/distribution.hpp"
#include "tailidx/tail_index.hpp"

namespace tailidx {

enum class Domain { Domain0, Domain1, Domain2, Transient, Inconclusive };
enum class Method { Analytic, Numeric };

std::string_view domain_name(Domain d);
std::string_view method_name(Method m);

// Numeric semi-decision thresholds.
struct Thresholds {
  double theta0 = 1e-6;          // Domain 0: final t_n below this
  double theta2 = 10.0;          // Domain 2: final t_n above this
  double band_floor = 0.26787944117144233;  // e^{-1} - 0.1
  double band_ceiling = 10.0;    // Domain 1: max t_n at most this
  double min_decades = 4.0;
  std::size_t min_points = 8;
  double decay_ratio = 0.5;      // Domain 0: successive ratios below this
  double growth_min = 0.1;       // fitted log-log slope counted as growth
};

// Reads `key = value` lines (theta0, theta2, band_floor, band_ceiling,
// min_decades, min_points, decay_ratio, growth_min); '#' starts a comment.
Thresholds parse_thresholds(std::string_view text);

struct Diagnostics {
  double decay_ratio = 0.0;       // largest successive t ratio over the last half
  double growth_exponent = 0.0;   // slope of log t vs log n over the last half
  double band_min = 0.0;          // min / max of t over the schedule
  double band_max = 0.0;
};

struct DomainVerdict {
  Domain domain = Domain::Inconclusive;
  Method method = Method::Analytic;
  std::vector<std::pair<double, double>> evidence;  // (n, t_n) on the schedule
  // (log2 n, t_n) along the probe subsequences; n may exceed double range.
  std::vector<std::pair<double, double>> probe_evidence;
  Diagnostics diagnostics;
  std::string citation;   // theorem used, analytic verdicts only
  std::string rationale;  // one-line explanation
};

// Verdict from the family's closed form.  Constructed families without a
// theorem covering them get Inconclusive.
DomainVerdict classify_analytic(const Distribution& dist);

// Probe subsequences for Transient detection, given as log2 n values.
struct Probes {
  std::vector<double> growing;  // expected to diverge
  std::vector<double> bounded;  // expected to stay bounded
};

// Run-start probes n_i = 1/p_{k_i} and m_i = 1/p_{k_i-(d_i+1)} - 1 for a
// Diffusion distribution, as log2 n_i and log2 m_i.  The last generated run
// is omitted.
Probes diffusion_probes(const Distribution& dist);

DomainVerdict classify_numeric(const Distribution& dist, const std::vector<std::uint64_t>& schedule,
                               const Thresholds& th = {}, const Probes& probes = {});

struct ProbePoint {
  std::uint64_t k = 0;
  double n_k = 0.0;       // floor(1 / p_k), as a real (may exceed 2^64)
  double log2_n_k = 0.0;
  double t = 0.0;
};

// t_{n_k} for n_k = floor(1/p_k) over k in [k_lo, k_hi].
std::vector<ProbePoint> subsequence_probe(const Distribution& dist, std::uint64_t k_lo,
                                          std::uint64_t k_hi, double eps = kDefaultEps);

}  // namespace tailidx
