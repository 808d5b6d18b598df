#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "tailidx/distribution.hpp"

namespace tailidx {

enum class DominanceVerdict { DominatedWithin, NotDominatedAtDepth, Undetermined };

std::string_view verdict_name(DominanceVerdict v);

struct DominanceOptions {
  std::uint64_t depth = 50;
  std::uint64_t probe_limit = 1000000;
  // NotDominatedAtDepth needs a count above this that is still growing
  // (second half of the intervals peaks higher than the first half).
  std::uint64_t growth_threshold = 4;
};

struct DominanceReport {
  std::uint64_t depth = 0;
  std::vector<std::uint64_t> counts;  // counts[k-1] = #{i : p_i in (q_{k+1}, q_k]}
  std::uint64_t max_count = 0;
  std::uint64_t tail_max_count = 0;   // max over k > depth / 2
  std::uint64_t above_top = 0;        // p_i > q_1, outside every interval
  std::uint64_t scanned = 0;          // P indices examined
  bool complete = false;              // scan reached p_i <= q_{depth+1} on P's monotone part
  DominanceVerdict verdict = DominanceVerdict::Undetermined;
};

// Finite-depth check of whether Q dominates P: every interval (q_{k+1}, q_k]
// of Q's non-increasing ordering holds a bounded number of P's
// probabilities.  Q and P must have infinite support.
DominanceReport dominates(const Distribution& Q, const Distribution& P,
                          const DominanceOptions& opts = {});

}  // namespace tailidx
