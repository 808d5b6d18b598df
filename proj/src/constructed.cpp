#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "model.hpp"
#include "tailidx/error.hpp"

namespace tailidx {

namespace {

constexpr std::uint64_t triangular(std::uint64_t m) { return m * (m + 1) / 2; }

// Smallest m with m(m+1)/2 >= k.
std::uint64_t group_of(std::uint64_t k) {
  auto m = static_cast<std::uint64_t>(
      std::ceil((std::sqrt(8.0 * static_cast<double>(k) + 1.0) - 1.0) / 2.0));
  while (triangular(m) < k) ++m;
  while (m > 1 && triangular(m - 1) >= k) --m;
  return m;
}

void require_base(const Distribution& base, const char* what) {
  if (!base.strictly_decreasing())
    fail(Errc::InvalidBase, std::string(what) + ": base distribution must be strictly decreasing");
}

class CongregatedModel final : public detail::Model {
 public:
  CongregatedModel(Distribution base, std::uint64_t depth) : base_(std::move(base)) {
    require_base(base_, "congregated");
    spec = FamilySpec::congregated(base_.spec(), depth);
    validate(spec);
    max_index = triangular(depth);

    // sum_{k >= 2} p_k = sum_{m >= 2} m q_{T(m)}; the part beyond group M is
    // at most the base tail beyond T(M) because p_k <= q_k for k >= 2.
    constexpr std::uint64_t kMaxGroups = std::uint64_t{1} << 24;
    CompensatedSum rest;
    double rem = 1.0;
    for (std::uint64_t m = 2; m <= kMaxGroups; ++m) {
      const std::uint64_t t = triangular(m);
      rest.add(static_cast<double>(m) * base_.prob(t));
      rem = base_.tail_mass_bound(t);
      if (rem <= 1e-16) break;
    }
    p1_ = 1.0 - rest.value() - 0.5 * rem;
    mass = {1.0 - 0.5 * rem, 1.0 + 0.5 * rem};
  }

  double prob(std::uint64_t k) const override {
    return k == 1 ? p1_ : base_.prob(triangular(group_of(k)));
  }
  double log2_prob(std::uint64_t k) const override {
    return k == 1 ? std::log2(p1_) : base_.log2_prob(triangular(group_of(k)));
  }
  double tail_mass_bound(std::uint64_t K) const override {
    return K == 0 ? mass.hi : base_.tail_mass_bound(K);
  }
  double log2_tail_mass_bound(std::uint64_t K) const override {
    return K == 0 ? std::log2(mass.hi) : base_.log2_tail_mass_bound(K);
  }

 private:
  Distribution base_;
  double p1_ = 0;
};

class PairAveragedModel final : public detail::Model {
 public:
  PairAveragedModel(Distribution base, std::uint64_t depth) : base_(std::move(base)) {
    require_base(base_, "pairavg");
    spec = FamilySpec::pair_averaged(base_.spec(), depth);
    validate(spec);
    max_index = depth > kUnbounded / 2 ? kUnbounded : 2 * depth;
    mass = base_.mass_certificate();
    if (base_.support_size()) support = *base_.support_size() + (*base_.support_size() & 1u);
  }

  double prob(std::uint64_t k) const override {
    const std::uint64_t odd = k - ((k + 1) & 1u);
    return 0.5 * (base_.prob(odd) + base_.prob(odd + 1));
  }
  double log2_prob(std::uint64_t k) const override {
    const std::uint64_t odd = k - ((k + 1) & 1u);
    return log2_add(base_.log2_prob(odd), base_.log2_prob(odd + 1)) - 1.0;
  }
  // Even K ends on a pair boundary, where the tails coincide with the base.
  double tail_mass_bound(std::uint64_t K) const override {
    if (K % 2 == 0) return base_.tail_mass_bound(K);
    return prob(K + 1) + base_.tail_mass_bound(K + 1);
  }
  double log2_tail_mass_bound(std::uint64_t K) const override {
    if (K % 2 == 0) return base_.log2_tail_mass_bound(K);
    return log2_add(log2_prob(K + 1), base_.log2_tail_mass_bound(K + 1));
  }

 private:
  Distribution base_;
};

class DiffusionModel final : public detail::Model {
 public:
  explicit DiffusionModel(int stages) {
    spec = FamilySpec::diffusion(stages);
    validate(spec);
    std::int64_t j0 = 1;
    for (int i = 1; i <= stages; ++i) {
      const std::int64_t d = std::int64_t{1} << i;
      const std::int64_t J = j0 + 2 * d;  // the diffused q_J
      for (std::int64_t j = j0; j < J; ++j) e_.push_back(j);
      // q_{J+1}..q_{J+i} are >= the diffused value 2^{-(J+i)}.
      for (std::int64_t j = J + 1; j <= J + i; ++j) e_.push_back(j);
      DiffusionRun run;
      run.stage = i;
      run.d = static_cast<std::uint64_t>(d);
      run.first_index = e_.size();
      run.exponent = J + i;
      run.pre_exponent = e_[run.first_index - run.d - 2];
      runs_.push_back(run);
      for (std::int64_t c = 0; c < d; ++c) e_.push_back(J + i);
      j0 = J + i + 1;
    }
    rest_exponent_ = j0 - 1;
    max_index = e_.size();
    log2_tail_.assign(e_.size() + 1, 0.0);
    double acc = -static_cast<double>(rest_exponent_);
    log2_tail_[e_.size()] = acc;
    for (std::size_t K = e_.size(); K-- > 0;) {
      acc = log2_add(acc, -static_cast<double>(e_[K]));
      log2_tail_[K] = acc;
    }
  }

  double prob(std::uint64_t k) const override {
    return std::exp2(-static_cast<double>(e_[k - 1]));
  }
  double log2_prob(std::uint64_t k) const override { return -static_cast<double>(e_[k - 1]); }
  double tail_mass_bound(std::uint64_t K) const override {
    return std::exp2(log2_tail_mass_bound(K));
  }
  double log2_tail_mass_bound(std::uint64_t K) const override {
    return K < log2_tail_.size() ? log2_tail_[K] : log2_tail_.back();
  }

  std::int64_t exponent(std::uint64_t k) const { return e_[k - 1]; }
  const std::vector<DiffusionRun>& runs() const { return runs_; }

 private:
  std::vector<std::int64_t> e_;
  std::vector<DiffusionRun> runs_;
  std::int64_t rest_exponent_ = 0;  // mass beyond the generated prefix is 2^{-rest}
  std::vector<double> log2_tail_;
};

const DiffusionModel& as_diffusion(const Distribution& dist) {
  const auto* m = dynamic_cast<const DiffusionModel*>(&dist.model());
  if (m == nullptr) fail(Errc::InvalidParams, "not a diffusion distribution");
  return *m;
}

}  // namespace

Distribution construct_congregated(const Distribution& base, std::uint64_t depth) {
  return Distribution(std::make_shared<CongregatedModel>(base, depth));
}

Distribution construct_pair_averaged(const Distribution& base, std::uint64_t depth) {
  return Distribution(std::make_shared<PairAveragedModel>(base, depth));
}

Distribution construct_diffusion(int stages) {
  return Distribution(std::make_shared<DiffusionModel>(stages));
}

const std::vector<DiffusionRun>& diffusion_runs(const Distribution& dist) {
  return as_diffusion(dist).runs();
}

std::int64_t diffusion_exponent(const Distribution& dist, std::uint64_t k) {
  if (k == 0 || k > dist.max_index())
    fail(Errc::DepthExceeded, "diffusion index " + std::to_string(k) + " out of range");
  return as_diffusion(dist).exponent(k);
}

}  // namespace tailidx
