#pragma once

// Internal interface behind Distribution.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "tailidx/distribution.hpp"

namespace tailidx::detail {

class Model {
 public:
  virtual ~Model() = default;

  FamilySpec spec;
  double norm = 1.0;
  Interval mass{1.0, 1.0};
  std::uint64_t k0_head = 1;
  std::optional<std::uint64_t> support;  // listed indices, finite families only
  std::uint64_t max_index = kUnbounded;
  bool strictly_decreasing = false;

  virtual double prob(std::uint64_t k) const = 0;
  virtual double log2_prob(std::uint64_t k) const {
    const double p = prob(k);
    return p > 0 ? std::log2(p) : -std::numeric_limits<double>::infinity();
  }
  virtual double tail_mass_bound(std::uint64_t K) const = 0;
  virtual double log2_tail_mass_bound(std::uint64_t K) const {
    const double u = tail_mass_bound(K);
    return u > 0 ? std::log2(u) : -std::numeric_limits<double>::infinity();
  }
};

std::shared_ptr<const Model> make_closed_form(const FamilySpec& spec);

}  // namespace tailidx::detail
