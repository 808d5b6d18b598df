#include "tailidx/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "model.hpp"
#include "tailidx/error.hpp"

namespace tailidx {

namespace detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.69314718055994530942;

// Relative size of the normalization remainder we are willing to leave
// unsummed; the remainder itself is bracketed, not dropped.
constexpr double kNormCutoff = 1e-17;

class FiniteModel final : public Model {
 public:
  explicit FiniteModel(const FamilySpec& s) : p_(s.probabilities) {
    spec = s;
    const std::size_t m = p_.size();
    support = m;
    tail_.assign(m + 1, 0.0);
    CompensatedSum acc;
    for (std::size_t K = m; K-- > 0;) {
      acc.add(p_[K]);
      tail_[K] = acc.value();
    }
    mass = {tail_[0], tail_[0]};
    for (std::size_t i = 1; i < m; ++i)
      if (p_[i] > p_[i - 1]) k0_head = i + 1;
    bool strict = true;
    for (std::size_t i = 1; i < m; ++i) {
      if (p_[i] == 0.0) {
        strict = strict && std::all_of(p_.begin() + i, p_.end(), [](double x) { return x == 0; });
        break;
      }
      strict = strict && p_[i] < p_[i - 1];
    }
    strictly_decreasing = strict && p_[0] > 0;
  }

  double prob(std::uint64_t k) const override { return k <= p_.size() ? p_[k - 1] : 0.0; }
  double tail_mass_bound(std::uint64_t K) const override {
    return K < tail_.size() ? tail_[K] : 0.0;
  }

 private:
  std::vector<double> p_;
  std::vector<double> tail_;  // tail_[K] = sum_{k > K} p_k
};

class GeometricModel final : public Model {
 public:
  explicit GeometricModel(const FamilySpec& s) : a_(s.param("a")), log2a_(std::log2(a_)) {
    spec = s;
    norm = a_ - 1.0;
    strictly_decreasing = true;
  }
  double prob(std::uint64_t k) const override {
    return norm * std::pow(a_, -static_cast<double>(k));
  }
  double log2_prob(std::uint64_t k) const override {
    return std::log2(norm) - static_cast<double>(k) * log2a_;
  }
  double tail_mass_bound(std::uint64_t K) const override {
    return std::pow(a_, -static_cast<double>(K));
  }
  double log2_tail_mass_bound(std::uint64_t K) const override {
    return -static_cast<double>(K) * log2a_;
  }

 private:
  double a_;
  double log2a_;
};

// p_k = c exp(-lambda k^2).
class GaussianModel final : public Model {
 public:
  explicit GaussianModel(const FamilySpec& s) : lambda_(s.param("lambda")) {
    spec = s;
    strictly_decreasing = true;
    CompensatedSum sum;
    double rem = 0;
    for (std::uint64_t k = 1;; ++k) {
      sum.add(std::exp(-lambda_ * static_cast<double>(k) * static_cast<double>(k)));
      rem = std::exp(log_raw_tail(k));
      if (rem <= kNormCutoff * sum.value()) break;
      if (k > (std::uint64_t{1} << 26))
        fail(Errc::InvalidParams, "gaussian: lambda too small to normalize");
    }
    const double total = sum.value();
    norm = 1.0 / (total + 0.5 * rem);
    log_norm_ = -std::log(total + 0.5 * rem);
    mass = {norm * total, norm * (total + rem)};
  }
  double prob(std::uint64_t k) const override { return std::exp(log_prob(k)); }
  double log2_prob(std::uint64_t k) const override { return log_prob(k) / kLn2; }
  double tail_mass_bound(std::uint64_t K) const override {
    return std::exp(log_norm_ + log_raw_tail(K));
  }
  double log2_tail_mass_bound(std::uint64_t K) const override {
    return (log_norm_ + log_raw_tail(K)) / kLn2;
  }

 private:
  double log_prob(std::uint64_t k) const {
    const double kd = static_cast<double>(k);
    return log_norm_ - lambda_ * kd * kd;
  }
  // log of sum_{k > K} exp(-lambda k^2) bound: consecutive ratios beyond K+1
  // are at most exp(-lambda (2K + 3)).
  double log_raw_tail(std::uint64_t K) const {
    const double k1 = static_cast<double>(K) + 1.0;
    return -lambda_ * k1 * k1 - std::log(-std::expm1(-lambda_ * (2.0 * k1 + 1.0)));
  }

  double lambda_;
  double log_norm_ = 0;
};

// p_k = c k^r exp(-lambda k).
class TiltedModel final : public Model {
 public:
  explicit TiltedModel(const FamilySpec& s) : r_(s.param("r")), lambda_(s.param("lambda")) {
    spec = s;
    const double e_lambda = std::exp(-lambda_);
    if (r_ > 0) {
      constexpr std::uint64_t kLimit = std::uint64_t{1} << 24;
      const double rho_target = 0.5 * (1.0 + e_lambda);
      k0_head = 0;
      for (std::uint64_t k = 1;; ++k) {
        const double rho = ratio(k);
        if (k0_head == 0 && rho <= 1.0) k0_head = k;
        if (rho <= rho_target) {
          kh_ = k;
          break;
        }
        if (k > kLimit) fail(Errc::InvalidParams, "tilted: r / lambda too large");
      }
    }
    strictly_decreasing = ratio(1) < 1.0;

    // Raw log weights relative to the peak to keep exp() in range.
    const double peak = r_ > 0 ? std::max(1.0, std::floor(r_ / lambda_)) : 1.0;
    offset_ = raw_log(peak);

    // Normalize: direct sum until the ratio bound certifies the remainder.
    CompensatedSum sum;
    double rem = 0;
    for (std::uint64_t k = 1;; ++k) {
      const double g = std::exp(raw_log(static_cast<double>(k)) - offset_);
      sum.add(g);
      if (k + 1 >= kh_) {
        rem = std::exp(raw_log(static_cast<double>(k + 1)) - offset_) / (1.0 - rho_sup(k + 1));
        if (rem <= kNormCutoff * sum.value()) break;
      }
      if (k > (std::uint64_t{1} << 27)) fail(Errc::InvalidParams, "tilted: lambda too small");
    }
    const double total = sum.value();
    log_norm_ = -offset_ - std::log(total + 0.5 * rem);
    norm = std::exp(log_norm_);
    const double scale = 1.0 / (total + 0.5 * rem);
    mass = {scale * total, scale * (total + rem)};

    // Suffix tails for K + 1 < kh: head terms p_{K+1}..p_{kh-1} plus the
    // ratio bound from kh.
    if (kh_ > 1) {
      head_tail_.assign(kh_, 0.0);
      double acc = ratio_tail(kh_ - 1);
      head_tail_[kh_ - 1] = acc;
      for (std::uint64_t K = kh_ - 1; K-- > 0;) {
        acc += prob(K + 1);
        head_tail_[K] = acc;
      }
    }
  }

  double prob(std::uint64_t k) const override { return std::exp(log_prob(k)); }
  double log2_prob(std::uint64_t k) const override { return log_prob(k) / kLn2; }
  double tail_mass_bound(std::uint64_t K) const override {
    if (K + 1 < kh_) return head_tail_[K] * (1.0 + 1e-15);
    return ratio_tail(K);
  }
  double log2_tail_mass_bound(std::uint64_t K) const override {
    if (K + 1 < kh_) return std::log2(tail_mass_bound(K));
    return log_ratio_tail(K) / kLn2;
  }

 private:
  double raw_log(double k) const { return r_ * std::log(k) - lambda_ * k; }
  double log_prob(std::uint64_t k) const {
    return log_norm_ + raw_log(static_cast<double>(k));
  }
  double ratio(std::uint64_t k) const {
    return std::exp(r_ * std::log1p(1.0 / static_cast<double>(k)) - lambda_);
  }
  // Supremum of the consecutive ratios p_{k+1}/p_k over k >= j.
  double rho_sup(std::uint64_t j) const { return r_ > 0 ? ratio(j) : std::exp(-lambda_); }
  // Requires K + 1 >= kh_.
  double log_ratio_tail(std::uint64_t K) const {
    return log_prob(K + 1) - std::log1p(-rho_sup(K + 1));
  }
  double ratio_tail(std::uint64_t K) const { return std::exp(log_ratio_tail(K)); }

  double r_;
  double lambda_;
  std::uint64_t kh_ = 1;  // ratios from kh_ on are bounded away from 1
  double offset_ = 0;
  double log_norm_ = 0;
  std::vector<double> head_tail_;
};

// p_k = c k^{-lambda}, c = 1 / zeta(lambda).
class PowerModel final : public Model {
 public:
  explicit PowerModel(const FamilySpec& s) : lambda_(s.param("lambda")) {
    spec = s;
    strictly_decreasing = true;
    const Interval z = hurwitz_tail(lambda_, 1);
    norm = 1.0 / z.mid();
    mass = norm * z;
    log2_norm_ = std::log2(norm);
  }
  double prob(std::uint64_t k) const override {
    return norm * std::pow(static_cast<double>(k), -lambda_);
  }
  double log2_prob(std::uint64_t k) const override {
    return log2_norm_ - lambda_ * std::log2(static_cast<double>(k));
  }
  double tail_mass_bound(std::uint64_t K) const override {
    return norm * hurwitz_tail(lambda_, K + 1).hi;
  }
  double log2_tail_mass_bound(std::uint64_t K) const override {
    if (K + 1 < 16) return std::log2(tail_mass_bound(K));
    const double N = static_cast<double>(K) + 1.0;
    return log2_norm_ + std::log2(scaled_hurwitz_tail(lambda_, N).hi) - lambda_ * std::log2(N);
  }
  double lambda() const { return lambda_; }

 private:
  double lambda_;
  double log2_norm_ = 0;
};

// p_k = c / (x ln(x)^lambda) with x = k + k0 - 1.
class LogPowerModel final : public Model {
 public:
  explicit LogPowerModel(const FamilySpec& s)
      : lambda_(s.param("lambda")), k0_(static_cast<std::uint64_t>(s.param("k0"))) {
    spec = s;
    strictly_decreasing = true;
    constexpr std::uint64_t kStored = std::uint64_t{1} << 16;
    constexpr std::uint64_t kDirect = std::uint64_t{1} << 20;
    cum_.reserve(kStored + 1);
    cum_.push_back(0.0);
    CompensatedSum sum;
    for (std::uint64_t i = 0; i < kDirect; ++i) {
      sum.add(raw(k0_ + i));
      if (i < kStored) cum_.push_back(sum.value());
    }
    const Interval tail = log_power_tail(lambda_, k0_ + kDirect);
    z_ = {sum.value() + tail.lo, sum.value() + tail.hi};
    norm = 1.0 / z_.mid();
    mass = norm * z_;
  }
  double prob(std::uint64_t k) const override { return norm * raw(k + k0_ - 1); }
  double tail_mass_bound(std::uint64_t K) const override {
    if (K + 1 < cum_.size()) {
      const double slack = 4.0 * std::numeric_limits<double>::epsilon() * z_.hi;
      return norm * (z_.hi - cum_[K] + slack);
    }
    return norm * log_power_tail(lambda_, K + k0_).hi;
  }

 private:
  double raw(std::uint64_t x) const {
    const double xd = static_cast<double>(x);
    return 1.0 / (xd * std::pow(std::log(xd), lambda_));
  }

  double lambda_;
  std::uint64_t k0_;
  Interval z_;
  std::vector<double> cum_;  // cum_[K] = sum_{k <= K} raw(k + k0 - 1)
};

}  // namespace

std::shared_ptr<const Model> make_closed_form(const FamilySpec& spec) {
  switch (spec.kind) {
    case FamilyKind::Finite: return std::make_shared<FiniteModel>(spec);
    case FamilyKind::Geometric: return std::make_shared<GeometricModel>(spec);
    case FamilyKind::GaussianType: return std::make_shared<GaussianModel>(spec);
    case FamilyKind::TiltedGeometric: return std::make_shared<TiltedModel>(spec);
    case FamilyKind::Power: return std::make_shared<PowerModel>(spec);
    case FamilyKind::LogPower: return std::make_shared<LogPowerModel>(spec);
    default: break;
  }
  fail(Errc::InvalidParams, "not a closed-form family: " + std::string(kind_name(spec.kind)));
}

}  // namespace detail

Distribution::Distribution(std::shared_ptr<const detail::Model> model) : model_(std::move(model)) {}

const FamilySpec& Distribution::spec() const { return model_->spec; }
double Distribution::norm_constant() const { return model_->norm; }
Interval Distribution::mass_certificate() const { return model_->mass; }
std::uint64_t Distribution::k0_head() const { return model_->k0_head; }
std::optional<std::uint64_t> Distribution::support_size() const { return model_->support; }
std::uint64_t Distribution::max_index() const { return model_->max_index; }
bool Distribution::strictly_decreasing() const { return model_->strictly_decreasing; }

std::optional<std::uint64_t> Distribution::effective_cardinality() const {
  if (!model_->support) return std::nullopt;
  std::uint64_t count = 0;
  for (std::uint64_t k = 1; k <= *model_->support; ++k) count += model_->prob(k) > 0;
  return count;
}

std::optional<PowerLaw> Distribution::power_law() const {
  if (kind() != FamilyKind::Power) return std::nullopt;
  return PowerLaw{model_->norm, spec().param("lambda")};
}

namespace {
void check_index(const detail::Model& m, std::uint64_t k) {
  if (k == 0) fail(Errc::InvalidParams, "index k must be >= 1");
  if (k > m.max_index)
    fail(Errc::DepthExceeded, "index " + std::to_string(k) + " is beyond the generation depth (" +
                                  std::to_string(m.max_index) + ") of " +
                                  std::string(kind_name(m.spec.kind)));
}
}  // namespace

double Distribution::prob(std::uint64_t k) const {
  check_index(*model_, k);
  return model_->prob(k);
}

double Distribution::log2_prob(std::uint64_t k) const {
  check_index(*model_, k);
  return model_->log2_prob(k);
}

double Distribution::tail_mass_bound(std::uint64_t K) const {
  const double u = model_->tail_mass_bound(K);
  // An underflowed bound on an infinite tail is still positive.
  if (u == 0.0 && !model_->support) return std::numeric_limits<double>::denorm_min();
  return u;
}

double Distribution::log2_tail_mass_bound(std::uint64_t K) const {
  return model_->log2_tail_mass_bound(K);
}

Distribution make_distribution(const FamilySpec& spec) {
  validate(spec);
  switch (spec.kind) {
    case FamilyKind::Congregated:
      return construct_congregated(make_distribution(*spec.base),
                                   static_cast<std::uint64_t>(spec.param("depth")));
    case FamilyKind::PairAveraged:
      return construct_pair_averaged(make_distribution(*spec.base),
                                     static_cast<std::uint64_t>(spec.param("depth")));
    case FamilyKind::Diffusion:
      return construct_diffusion(static_cast<int>(spec.param("stages")));
    default: return Distribution(detail::make_closed_form(spec));
  }
}

}  // namespace tailidx
