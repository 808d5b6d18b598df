#include "tailidx/dominance.hpp"

#include <algorithm>
#include <functional>

#include "tailidx/error.hpp"

namespace tailidx {

std::string_view verdict_name(DominanceVerdict v) {
  switch (v) {
    case DominanceVerdict::DominatedWithin: return "DominatedWithin";
    case DominanceVerdict::NotDominatedAtDepth: return "NotDominatedAtDepth";
    case DominanceVerdict::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

DominanceReport dominates(const Distribution& Q, const Distribution& P,
                          const DominanceOptions& opts) {
  if (Q.support_size()) fail(Errc::InvalidParams, "dominance: Q must have infinite support");
  if (P.support_size()) fail(Errc::InvalidParams, "dominance: P must have infinite support");
  if (opts.depth < 1) fail(Errc::InvalidParams, "dominance: depth must be >= 1");
  if (opts.probe_limit < 1) fail(Errc::InvalidParams, "dominance: probe_limit must be >= 1");

  const std::uint64_t depth = opts.depth;
  // Q is non-increasing from k0_head, so its depth + 1 largest values sit
  // among the first k0_head + depth + 1 indices.  Compare in log2 so that
  // underflowing tails keep their order.
  std::vector<double> q;
  const std::uint64_t take = Q.k0_head() + depth + 1;
  q.reserve(take);
  for (std::uint64_t k = 1; k <= take; ++k) q.push_back(Q.log2_prob(k));
  std::sort(q.begin(), q.end(), std::greater<>());
  q.resize(depth + 1);
  const double floor = q[depth];

  DominanceReport r;
  r.depth = depth;
  r.counts.assign(depth, 0);
  const std::uint64_t k0 = P.k0_head();
  for (std::uint64_t i = 1;; ++i) {
    if (i > opts.probe_limit || i > P.max_index()) break;
    r.scanned = i;
    const double x = P.log2_prob(i);
    if (x <= floor) {
      if (i >= k0) {
        r.complete = true;
        break;
      }
      continue;
    }
    // c = #{j : q_j >= x}; x then lies in (q_{c+1}, q_c].
    const auto c = static_cast<std::uint64_t>(
        std::upper_bound(q.begin(), q.end(), x, std::greater<>()) - q.begin());
    if (c == 0) {
      ++r.above_top;
    } else {
      ++r.counts[c - 1];
    }
  }

  std::uint64_t first_half = 0;
  for (std::uint64_t k = 1; k <= depth; ++k) {
    const std::uint64_t v = r.counts[k - 1];
    r.max_count = std::max(r.max_count, v);
    if (2 * k > depth) {
      r.tail_max_count = std::max(r.tail_max_count, v);
    } else {
      first_half = std::max(first_half, v);
    }
  }
  if (!r.complete) {
    r.verdict = DominanceVerdict::Undetermined;
  } else if (r.max_count > opts.growth_threshold && r.tail_max_count > first_half) {
    r.verdict = DominanceVerdict::NotDominatedAtDepth;
  } else {
    r.verdict = DominanceVerdict::DominatedWithin;
  }
  return r;
}

}  // namespace tailidx
