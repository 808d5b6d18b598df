#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "tailidx/family_spec.hpp"
#include "tailidx/numeric.hpp"

namespace tailidx {

namespace detail {
class Model;
}

inline constexpr std::uint64_t kUnbounded = std::numeric_limits<std::uint64_t>::max();

// p_k = c k^{-lambda} for every k >= 1.
struct PowerLaw {
  double c = 0.0;
  double lambda = 0.0;
};

// An immutable probability sequence p_1, p_2, ... on a countable alphabet.
// Cheap to copy; copies share the underlying model, which is read-only after
// construction and therefore safe to use from several threads.
class Distribution {
 public:
  explicit Distribution(std::shared_ptr<const detail::Model> model);

  const FamilySpec& spec() const;
  FamilyKind kind() const { return spec().kind; }

  // The c with total mass one (1 for families given directly as
  // probabilities, such as Finite and the constructed sequences).
  double norm_constant() const;

  // Certified enclosure of the total mass.
  Interval mass_certificate() const;

  // First index from which p_k is non-increasing.
  std::uint64_t k0_head() const;

  // Number of listed indices for finite support; nullopt for infinite support.
  std::optional<std::uint64_t> support_size() const;

  // Number of strictly positive p_k (finite support only).
  std::optional<std::uint64_t> effective_cardinality() const;

  // Largest index prob() will produce; kUnbounded for closed forms.
  std::uint64_t max_index() const;

  bool strictly_decreasing() const;

  // Set for the Power family.
  std::optional<PowerLaw> power_law() const;

  // p_k for k >= 1.  Throws InvalidParams for k == 0 and DepthExceeded
  // beyond max_index().
  double prob(std::uint64_t k) const;

  // log2 p_k, exact for constructed sequences whose probabilities underflow.
  // -inf when p_k == 0.
  double log2_prob(std::uint64_t k) const;

  // U with sum_{k > K} p_k <= U.
  double tail_mass_bound(std::uint64_t K) const;

  // log2 of an upper bound on sum_{k > K} p_k; usable where the bound itself
  // underflows.
  double log2_tail_mass_bound(std::uint64_t K) const;

  const detail::Model& model() const { return *model_; }

 private:
  std::shared_ptr<const detail::Model> model_;
};

// Builds and normalizes the distribution described by `spec`, including the
// constructed families.  Throws InvalidParams / NormalizationDivergent /
// InvalidBase / StagesExceeded.
Distribution make_distribution(const FamilySpec& spec);

// Groups G_m of m consecutive indices (m = 1, 2, ...); every index of G_m,
// m >= 2, carries q_{m(m+1)/2}; p_1 takes the remaining mass.  `depth` is the
// largest generated group.
Distribution construct_congregated(const Distribution& base, std::uint64_t depth);

// p_{2m-1} = p_{2m} = (q_{2m-1} + q_{2m}) / 2 for m <= depth.
Distribution construct_pair_averaged(const Distribution& base, std::uint64_t depth);

// The dyadic diffusion sequence built from q_j = 2^{-j} with d_i = 2^i.
Distribution construct_diffusion(int stages);

// One run of equal terms in the diffusion sequence.
struct DiffusionRun {
  int stage = 0;                  // i
  std::uint64_t d = 0;            // d_i = 2^i
  std::uint64_t first_index = 0;  // k_i, index of the run's first term
  std::int64_t exponent = 0;      // run value is 2^{-exponent}
  // Exponent of p_{k_i - (d_i + 1)}; m_i = 2^{pre_exponent} - 1.
  std::int64_t pre_exponent = 0;
};

// The run table of a Diffusion distribution; throws InvalidParams for other
// kinds.
const std::vector<DiffusionRun>& diffusion_runs(const Distribution& dist);

// Exponent e_k with p_k = 2^{-e_k} for a Diffusion distribution.
std::int64_t diffusion_exponent(const Distribution& dist, std::uint64_t k);

}  // namespace tailidx
