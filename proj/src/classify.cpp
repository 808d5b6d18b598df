#include "tailidx/classify.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <string>

#include "tailidx/dominance.hpp"
#include "tailidx/error.hpp"

namespace tailidx {

std::string_view domain_name(Domain d) {
  switch (d) {
    case Domain::Domain0: return "Domain0";
    case Domain::Domain1: return "Domain1";
    case Domain::Domain2: return "Domain2";
    case Domain::Transient: return "Transient";
    case Domain::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::string_view method_name(Method m) {
  return m == Method::Analytic ? "Analytic" : "Numeric";
}

Thresholds parse_thresholds(std::string_view text) {
  Thresholds th;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (strip(line).empty()) continue;
    if (eq == std::string::npos)
      fail(Errc::ParseError, "thresholds line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = strip(line.substr(0, eq));
    const std::string val = strip(line.substr(eq + 1));
    double v = 0;
    auto res = std::from_chars(val.data(), val.data() + val.size(), v);
    if (val.empty() || res.ec != std::errc() || res.ptr != val.data() + val.size() ||
        !std::isfinite(v))
      fail(Errc::ParseError, "thresholds line " + std::to_string(lineno) + ": bad number");
    if (key == "theta0") th.theta0 = v;
    else if (key == "theta2") th.theta2 = v;
    else if (key == "band_floor") th.band_floor = v;
    else if (key == "band_ceiling") th.band_ceiling = v;
    else if (key == "min_decades") th.min_decades = v;
    else if (key == "min_points") {
      if (v < 2 || std::floor(v) != v) fail(Errc::ParseError, "min_points must be an integer >= 2");
      th.min_points = static_cast<std::size_t>(v);
    } else if (key == "decay_ratio") th.decay_ratio = v;
    else if (key == "growth_min") th.growth_min = v;
    else fail(Errc::ParseError, "unknown threshold key '" + key + "'");
  }
  if (!(th.theta0 > 0) || !(th.theta2 > 0) || !(th.band_ceiling > th.band_floor))
    fail(Errc::InvalidParams, "thresholds: need theta0 > 0, theta2 > 0, band_ceiling > band_floor");
  return th;
}

namespace {

DomainVerdict analytic(Domain d, std::string citation, std::string rationale) {
  DomainVerdict v;
  v.domain = d;
  v.method = Method::Analytic;
  v.citation = std::move(citation);
  v.rationale = std::move(rationale);
  return v;
}

}  // namespace

DomainVerdict classify_analytic(const Distribution& dist) {
  const FamilySpec& s = dist.spec();
  switch (s.kind) {
    case FamilyKind::Finite:
      return analytic(Domain::Domain0, "Theorem 1", "finite effective cardinality");
    case FamilyKind::Power:
    case FamilyKind::LogPower:
      return analytic(Domain::Domain2, "Theorem 2", "p_k >= c k^{-lambda} with lambda > 1");
    case FamilyKind::Geometric:
    case FamilyKind::GaussianType:
    case FamilyKind::TiltedGeometric:
      return analytic(Domain::Domain1, "Corollary 2", "exponentially decaying tail");
    case FamilyKind::Diffusion:
      return analytic(Domain::Transient, "diffusion construction",
                      "t_n diverges along run starts and stays bounded before them");
    case FamilyKind::Congregated:
    case FamilyKind::PairAveraged: break;
  }

  const DomainVerdict base = classify_analytic(make_distribution(*s.base));
  const char* name = s.kind == FamilyKind::Congregated ? "congregated" : "pair-averaged";
  switch (base.domain) {
    case Domain::Domain0:
      return analytic(Domain::Domain0, "Theorem 1",
                      std::string(name) + " sequence of a finite-support base is finite");
    case Domain::Domain2:
      // Both constructions keep p_k >= q_{2k} (congregated: m(m+1)/2 <= 2k on
      // group m; pair-averaged: p_k >= q_{k+1}), so a power-type lower bound
      // on the base carries over with a smaller constant.
      return analytic(Domain::Domain2, "Theorem 2",
                      std::string(name) + " sequence keeps the base's power-type lower bound");
    case Domain::Domain1: {
      const Distribution q = make_distribution(*s.base);
      const DominanceReport r = dominates(q, dist);
      if (r.verdict == DominanceVerdict::DominatedWithin) {
        return analytic(Domain::Domain1, "Theorem 4",
                        "dominated by its Domain 1 base at depth " + std::to_string(r.depth) +
                            " (max count " + std::to_string(r.max_count) + ")");
      }
      DomainVerdict v = analytic(Domain::Inconclusive, "",
                                 "base is in Domain 1 but dominance fails at depth " +
                                     std::to_string(r.depth) + "; no theorem applies");
      return v;
    }
    default: break;
  }
  return analytic(Domain::Inconclusive, "", "no theorem covers this base");
}

Probes diffusion_probes(const Distribution& dist) {
  Probes p;
  const auto& runs = diffusion_runs(dist);
  // The last generated run is followed by mass whose layout is unknown, so
  // t_n near its start has no certified tail; it is left out.
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    const DiffusionRun& run = runs[i];
    p.growing.push_back(static_cast<double>(run.exponent));
    const double e = static_cast<double>(run.pre_exponent);
    p.bounded.push_back(e + std::log2(-std::expm1(-e * 0.69314718055994530942)));
  }
  return p;
}

DomainVerdict classify_numeric(const Distribution& dist, const std::vector<std::uint64_t>& schedule,
                               const Thresholds& th, const Probes& probes) {
  if (schedule.size() < th.min_points)
    fail(Errc::ScheduleTooShort, "schedule needs at least " + std::to_string(th.min_points) +
                                     " points, got " + std::to_string(schedule.size()));
  const double decades = std::log10(static_cast<double>(schedule.back()) /
                                    static_cast<double>(schedule.front()));
  if (decades < th.min_decades)
    fail(Errc::ScheduleTooShort, "schedule spans " + std::to_string(decades) +
                                     " decades, need " + std::to_string(th.min_decades));

  const IndexSeries series = index_series(dist, schedule);
  DomainVerdict v;
  v.method = Method::Numeric;
  std::vector<double> t;
  for (const IndexValue& p : series.points) {
    if (!std::isfinite(p.value)) fail(Errc::NonFinite, "non-finite t_n");
    v.evidence.emplace_back(static_cast<double>(p.n), p.value);
    t.push_back(p.value);
  }

  const std::size_t m = t.size();
  const std::size_t half = m / 2;
  Diagnostics& dg = v.diagnostics;
  dg.band_min = *std::min_element(t.begin(), t.end());
  dg.band_max = *std::max_element(t.begin(), t.end());
  double tail_max = 0;
  bool nondecreasing = true;
  for (std::size_t i = half; i < m; ++i) {
    tail_max = std::max(tail_max, t[i]);
    if (i + 1 < m) {
      const double r = t[i] > 0 ? t[i + 1] / t[i] : (t[i + 1] > 0 ? 1e300 : 0.0);
      dg.decay_ratio = std::max(dg.decay_ratio, r);
      if (t[i + 1] < t[i]) nondecreasing = false;
    }
  }
  // Least-squares slope of ln t against ln n over the last half.
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t i = half; i < m; ++i) {
      if (!(t[i] > 0)) continue;
      const double x = std::log(static_cast<double>(schedule[i]));
      const double y = std::log(t[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++cnt;
    }
    const double den = cnt * sxx - sx * sx;
    dg.growth_exponent = cnt >= 2 && den > 0 ? (cnt * sxy - sx * sy) / den : 0.0;
  }

  if (!probes.growing.empty() && !probes.bounded.empty()) {
    std::vector<double> grow;
    double bounded_max = 0;
    for (double L : probes.growing) {
      grow.push_back(tn_log2(dist, L).value);
      v.probe_evidence.emplace_back(L, grow.back());
    }
    for (double L : probes.bounded) {
      const double value = tn_log2(dist, L).value;
      bounded_max = std::max(bounded_max, value);
      v.probe_evidence.emplace_back(L, value);
    }
    const bool growing = grow.back() > th.theta2 && std::is_sorted(grow.begin(), grow.end());
    if (growing && bounded_max <= th.band_ceiling) {
      v.domain = Domain::Transient;
      v.rationale = "probe subsequence grows past theta2 while the other stays below band_ceiling";
      return v;
    }
  }

  if (t.back() < th.theta0 && dg.decay_ratio < th.decay_ratio) {
    v.domain = Domain::Domain0;
    v.rationale = "t_n below theta0 with geometric decay";
  } else if (t.back() > th.theta2 && nondecreasing && dg.growth_exponent >= th.growth_min) {
    v.domain = Domain::Domain2;
    v.rationale = "t_n above theta2 and increasing";
  } else if (dg.band_max <= th.band_ceiling && tail_max >= th.band_floor &&
             dg.growth_exponent < th.growth_min) {
    v.domain = Domain::Domain1;
    v.rationale = "t_n stays within [band_floor, band_ceiling] without growth";
  } else {
    v.domain = Domain::Inconclusive;
    v.rationale = "no threshold rule matched";
  }
  return v;
}

std::vector<ProbePoint> subsequence_probe(const Distribution& dist, std::uint64_t k_lo,
                                          std::uint64_t k_hi, double eps) {
  if (dist.support_size()) fail(Errc::FiniteSupport, "subsequence_probe needs infinite support");
  if (k_lo < 1 || k_hi < k_lo) fail(Errc::InvalidParams, "k range must satisfy 1 <= k_lo <= k_hi");
  std::vector<ProbePoint> out;
  for (std::uint64_t k = k_lo; k <= k_hi; ++k) {
    ProbePoint pt;
    pt.k = k;
    const double lp = dist.log2_prob(k);
    if (!std::isfinite(lp)) fail(Errc::InvalidParams, "p_k is zero");
    const double inv = std::exp2(-lp);
    if (inv < 0x1p62) {
      const auto n = static_cast<std::uint64_t>(std::floor(inv));
      pt.n_k = static_cast<double>(n);
      pt.log2_n_k = std::log2(pt.n_k);
      pt.t = tn(dist, n, eps).value;
    } else {
      // floor() changes 1/p_k by a relative 2^-62 or less at this size.
      pt.log2_n_k = -lp;
      pt.n_k = inv;
      pt.t = tn_log2(dist, -lp, eps).value;
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace tailidx
