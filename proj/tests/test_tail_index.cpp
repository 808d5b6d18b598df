#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "tailidx/distribution.hpp"
#include "tailidx/error.hpp"
#include "tailidx/family_spec.hpp"
#include "tailidx/tail_index.hpp"

using namespace tailidx;

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

Errc error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return Errc::Io;
}

Distribution uniform(int K) { return make_distribution(FamilySpec::finite(std::vector<double>(K, 1.0 / K))); }

// Reference t_n by long-double direct summation over k <= K plus a bracket
// for the rest: sum_{k>K} p (1-p)^n lies in [T1 - n T2, T1] with T1, T2 the
// first and second moment tails.
struct Reference {
  double lo, hi;
};

Reference direct_reference(const Distribution& d, std::uint64_t n, std::uint64_t K, double T1,
                           double T2) {
  long double s = 0;
  for (std::uint64_t k = K; k >= 1; --k) {
    const long double p = d.prob(k);
    s += p * std::pow(1.0L - p, static_cast<long double>(n));
  }
  const double nd = static_cast<double>(n);
  return {nd * (static_cast<double>(s) + std::max(0.0, T1 - nd * T2)),
          nd * (static_cast<double>(s) + T1)};
}

// sum_{k > M} k^{-s} by Euler-Maclaurin (error far below 1e-30 for M >= 1e5)
double zeta_tail(double s, double M) {
  const double Mp = M + 1;
  return std::pow(Mp, 1 - s) / (s - 1) + 0.5 * std::pow(Mp, -s) + s / 12 * std::pow(Mp, -s - 1) -
         s * (s + 1) * (s + 2) / 720 * std::pow(Mp, -s - 3);
}

void expect_brackets(const IndexValue& v, Reference r, const char* what) {
  const double slack = 1e-13 * std::max(1.0, r.hi);
  EXPECT_LE(v.value, r.hi + slack) << what << " n=" << v.n;
  EXPECT_GE(v.value + v.trunc_error, r.lo - slack) << what << " n=" << v.n;
}

std::vector<FamilySpec> zoo() {
  return {
      FamilySpec::finite({0.5, 0.3, 0.2}),
      FamilySpec::finite(std::vector<double>(10, 0.1)),
      FamilySpec::geometric(2),
      FamilySpec::geometric(std::numbers::e),
      FamilySpec::gaussian_type(1),
      FamilySpec::gaussian_type(0.1),
      FamilySpec::tilted_geometric(-1, 1),
      FamilySpec::tilted_geometric(1, 1),
      FamilySpec::power(2),
      FamilySpec::power(1.5),
      FamilySpec::log_power(2),
      FamilySpec::congregated(FamilySpec::geometric(2)),
      FamilySpec::pair_averaged(FamilySpec::geometric(2)),
      FamilySpec::diffusion(6),
  };
}

}  // namespace

TEST(Zeta1, FiniteExamples) {
  EXPECT_EQ(zeta1(make_distribution(FamilySpec::finite({1.0})), 7).value, 0.0);
  EXPECT_EQ(zeta1(uniform(2), 1).value, 0.5);
  EXPECT_EQ(zeta1(uniform(2), 2).value, 0.25);
  const auto t = tn(uniform(2), 2);
  EXPECT_EQ(t.value, 0.5);
  EXPECT_EQ(t.trunc_error, 0.0);
}

TEST(Zeta1, RejectsZeroSampleSize) {
  EXPECT_EQ(error_code([] { zeta1(uniform(2), 0); }), Errc::InvalidParams);
  EXPECT_EQ(error_code([] { tn(uniform(2), 0); }), Errc::InvalidParams);
  EXPECT_EQ(error_code([] { tn(uniform(2), 5, 0.0); }), Errc::InvalidParams);
}

TEST(Tn, UniformTenClosedForm) {
  // 100 * 10 * 0.1 * 0.9^100
  EXPECT_NEAR(tn(uniform(10), 100).value, 2.656139888758748e-3, 1e-12 * 2.656139888758748e-3);
}

TEST(Tn, EqualsNTimesZetaExactly) {
  for (const auto& s : zoo()) {
    const auto d = make_distribution(s);
    for (std::uint64_t n : {1u, 7u, 100u, 12345u}) {
      const auto z = zeta1(d, n), t = tn(d, n);
      EXPECT_EQ(t.value, static_cast<double>(n) * z.value) << format_family_spec(s);
    }
  }
}

TEST(Tn, GeometricTwoApproachesBand) {
  const auto d = make_distribution(FamilySpec::geometric(2));
  for (std::uint64_t n : geometric_schedule(16, 1048576, 4)) {
    const auto t = tn(d, n);
    EXPECT_TRUE(t.within_eps);
    EXPECT_LE(t.trunc_error, 1e-9);
    // Settles into a small oscillation around 1/ln 2.
    if (n >= 1024) EXPECT_NEAR(t.value, 1 / std::numbers::ln2, 0.01) << n;
  }
}

TEST(Tn, PowerEngineMatchesDirectSummation) {
  const auto d = make_distribution(FamilySpec::power(2));
  const double c = d.norm_constant();
  const std::uint64_t M = 2000000;
  const double T1 = c * zeta_tail(2, M), T2 = c * c * zeta_tail(4, M);
  for (std::uint64_t n : {1u, 10u, 100u, 1000u, 10000u, 100000u}) {
    const auto v = tn(d, n, 1e-11);
    expect_brackets(v, direct_reference(d, n, M, T1, T2), "power2");
    EXPECT_TRUE(v.within_eps);
    EXPECT_LE(v.trunc_error, 1e-11 * 1.0001);
  }
}

TEST(Tn, PowerOneHalfEngineMatchesDirectSummation) {
  const auto d = make_distribution(FamilySpec::power(1.5));
  const double c = d.norm_constant();
  const std::uint64_t M = 4000000;
  const double T1 = c * zeta_tail(1.5, M), T2 = c * c * zeta_tail(3, M);
  for (std::uint64_t n : {3u, 50u, 2000u}) {
    expect_brackets(tn(d, n, 1e-10), direct_reference(d, n, M, T1, T2), "power1.5");
  }
}

TEST(Tn, LogPowerBracketContainsDirectReference) {
  const auto d = make_distribution(FamilySpec::log_power(2));
  const double c = d.norm_constant();
  const std::uint64_t M = 4000000;
  // Tails of 1/(x ln^2 x) and its square beyond x = M + 1, from the
  // integral: the first is between 1/ln(M+2) and 1/ln(M+1).
  const double x = static_cast<double>(M) + 1;
  const double T1hi = c / std::log(x), T1lo = c / std::log(x + 1);
  const double T2 = c * c / (x * std::pow(std::log(x), 4));
  for (std::uint64_t n : {1u, 10u, 100u}) {
    const Reference r = direct_reference(d, n, M, T1lo, T2);
    const Reference r_hi = direct_reference(d, n, M, T1hi, 0);
    const auto v = tn(d, n);
    expect_brackets(v, {r.lo, r_hi.hi}, "logpower");
  }
}

TEST(Tn, SandwichSoundnessAgainstTighterEvaluation) {
  for (const auto& s : zoo()) {
    const auto d = make_distribution(s);
    for (std::uint64_t n = 10; n <= 100000; n *= 10) {
      const auto v = tn(d, n, 1e-9);
      const auto ref = tn(d, n, 1e-11);
      const double slack = 1e-13 * std::max(1.0, ref.value);
      EXPECT_LE(v.value, ref.value + ref.trunc_error + slack) << format_family_spec(s) << " n=" << n;
      EXPECT_GE(v.value + v.trunc_error, ref.value - slack) << format_family_spec(s) << " n=" << n;
      if (v.within_eps) EXPECT_LE(v.trunc_error, 1e-9 * 1.0001) << format_family_spec(s);
    }
  }
}

TEST(Tn, GeometricMatchesDirectSummation) {
  for (const auto& s : {FamilySpec::geometric(2), FamilySpec::geometric(std::numbers::e),
                        FamilySpec::gaussian_type(0.1), FamilySpec::tilted_geometric(1, 1)}) {
    const auto d = make_distribution(s);
    // Tails beyond k = 400 are below 1e-60 for all four.
    for (std::uint64_t n : {10u, 1000u, 100000u}) {
      expect_brackets(tn(d, n, 1e-12), direct_reference(d, n, 400, 0, 0), format_family_spec(s).c_str());
    }
  }
}

TEST(TnProperties, MonotoneDecayOfZeta) {
  for (const auto& s : zoo()) {
    const auto d = make_distribution(s);
    double prev = zeta1(d, 1, 1e-13).value;
    for (std::uint64_t n : {2u, 3u, 5u, 10u, 30u, 100u, 1000u}) {
      const double z = zeta1(d, n, 1e-13).value;
      EXPECT_LT(z, prev) << format_family_spec(s) << " n=" << n;
      prev = z;
    }
  }
}

TEST(TnProperties, MonotoneDecayConsecutive) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> w(2 + rng() % 6);
    double total = 0;
    for (auto& x : w) total += x = 0.05 + std::uniform_real_distribution<double>(0, 1)(rng);
    for (auto& x : w) x /= total;
    const auto d = make_distribution(FamilySpec::finite(w));
    for (std::uint64_t n = 1; n < 60; ++n) ASSERT_LT(zeta1(d, n + 1).value, zeta1(d, n).value);
  }
}

TEST(TnProperties, UnimodalTermBound) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int K = 1 + static_cast<int>(rng() % 30);
    std::vector<double> w(K);
    double total = 0;
    for (auto& x : w) total += x = std::uniform_real_distribution<double>(0.001, 1)(rng);
    for (auto& x : w) x /= total;
    const auto d = make_distribution(FamilySpec::finite(w));
    for (std::uint64_t n : {1u, 2u, 10u, 100u, 5000u}) {
      const double nd = static_cast<double>(n);
      const double term_max = std::pow(nd / (nd + 1), nd + 1);
      for (double p : w) EXPECT_LE(nd * p * std::pow(1 - p, nd), term_max * (1 + 1e-15));
      EXPECT_LT(tn(d, n).value, K / std::numbers::e);
    }
  }
}

TEST(TnProperties, PermutationInvarianceIsExact) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> w(1 + rng() % 12);
    double total = 0;
    for (auto& x : w) total += x = std::uniform_real_distribution<double>(0, 1)(rng);
    for (auto& x : w) x /= total;
    auto shuffled = w;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto a = make_distribution(FamilySpec::finite(w));
    const auto b = make_distribution(FamilySpec::finite(shuffled));
    for (std::uint64_t n : {1u, 3u, 40u, 999u}) EXPECT_EQ(zeta1(a, n).value, zeta1(b, n).value);
  }
}

TEST(TnLog2, AgreesWithDirectEvaluation) {
  for (const auto& s : {FamilySpec::geometric(2), FamilySpec::gaussian_type(1),
                        FamilySpec::tilted_geometric(-1, 1), FamilySpec::diffusion(4),
                        FamilySpec::pair_averaged(FamilySpec::geometric(3)),
                        FamilySpec::finite({0.5, 0.3, 0.2}), FamilySpec::power(2)}) {
    const auto d = make_distribution(s);
    for (int L : {3, 10, 20, 30}) {
      const double a = tn(d, std::uint64_t{1} << L, 1e-12).value;
      const auto b = tn_log2(d, L, 1e-12);
      EXPECT_NEAR(b.value, a, 1e-10 * std::max(1.0, a) + 1e-12) << format_family_spec(s) << " L=" << L;
    }
  }
}

TEST(TnLog2, ReachesAstronomicalSampleSizes) {
  const auto d = make_distribution(FamilySpec::geometric(2));
  // t_n for n = 2^L, L integer, is L-periodic in the limit around 1/ln 2.
  const auto v = tn_log2(d, 5000.0);
  EXPECT_NEAR(v.value, 1 / std::numbers::ln2, 0.01);
  EXPECT_EQ(error_code([&] { tn_log2(make_distribution(FamilySpec::power(2)), 100.0); }),
            Errc::NoTailBound);
  EXPECT_EQ(error_code([&] { tn_log2(d, -1.0); }), Errc::InvalidParams);
}

TEST(TnLog2, DiffusionBeyondGeneratedStagesIsDepthExceeded) {
  const auto d = make_distribution(FamilySpec::diffusion(2));
  EXPECT_EQ(error_code([&] { tn_log2(d, 200.0); }), Errc::DepthExceeded);
  EXPECT_EQ(error_code([&] { tn(d, std::uint64_t{1} << 50); }), Errc::DepthExceeded);
}

TEST(ScaledPair, FiniteUniformDecaysBoth) {
  const auto [a, b] = scaled_pair(uniform(2), 200, 0.5);
  EXPECT_LT(a, 1e-20);
  EXPECT_LT(b, 1e-20);
  EXPECT_GT(b, a);
}

TEST(ScaledPair, PowerTwoEquivalence) {
  const auto d = make_distribution(FamilySpec::power(2));
  const auto [a, b] = scaled_pair(d, 1000000, 0.5);
  EXPECT_LT(std::fabs(a - b) / b, 0.01);
  EXPECT_NEAR(b, 0.6909882989426710, 1e-3);
}

TEST(ScaledPair, GeometricBaseEThreeDigits) {
  const auto d = make_distribution(FamilySpec::geometric(std::numbers::e));
  auto round3 = [](double x) {
    const double scale = std::pow(10.0, 2 - std::floor(std::log10(std::fabs(x))));
    return std::round(x * scale) / scale;
  };
  for (std::uint64_t n : {1000u, 10000u}) {
    const auto [a, b] = scaled_pair(d, n, 0.5);
    EXPECT_LT(std::fabs(a - b) / b, 1.1e-3) << n;
    EXPECT_EQ(round3(a), round3(b)) << n << ": " << a << " vs " << b;
  }
}

TEST(PowerTailLimit, MatchesHighPrecisionGamma) {
  auto oracle = [](double c, double lambda) {
    const Big l(lambda);
    return static_cast<double>(boost::multiprecision::pow(Big(c), 1 / l) / l *
                               boost::multiprecision::tgamma(1 - 1 / l));
  };
  const double c2 = 6 / (std::numbers::pi * std::numbers::pi);
  EXPECT_NEAR(power_tail_limit(1, 2), oracle(1, 2), 1e-15);
  EXPECT_NEAR(power_tail_limit(1, 2), 0.8862269254527580, 1e-15);
  EXPECT_NEAR(power_tail_limit(c2, 2), 0.6909882989426710, 1e-15);
  EXPECT_NEAR(power_tail_limit(1, 10), 0.1068628702119319, 1e-15);
  for (double lambda : {1.1, 1.5, 3.0, 7.5}) {
    for (double c : {0.1, 0.5, 1.0}) {
      const double want = oracle(c, lambda);
      EXPECT_NEAR(power_tail_limit(c, lambda), want, 1e-13 * want) << c << " " << lambda;
    }
  }
}

TEST(EmGap, ModeValueClosedForm) {
  const auto d = make_distribution(FamilySpec::power(2));
  const auto g = em_gap(d, 10000);
  EXPECT_NEAR(g.mode_value, 1 / (100 * std::numbers::e), 1e-12 / (100 * std::numbers::e));
}

TEST(EmGap, GapWithinBound) {
  for (double lambda : {1.5, 2.0, 3.0}) {
    const auto d = make_distribution(FamilySpec::power(lambda));
    for (std::uint64_t n : {10u, 1000u, 10000u, 1000000u}) {
      for (std::uint64_t x0 : {1u, 3u}) {
        const auto g = em_gap(d, n, x0);
        EXPECT_LE(std::fabs(g.sum - g.integral), g.bound) << lambda << " " << n << " " << x0;
      }
    }
  }
}

TEST(EmGap, LatticeSumAgainstIndependentSum) {
  // sum_{k>=1} sqrt(n) c k^{-2} e^{-n c k^{-2}} at n = 1e4, c = 6/pi^2, from
  // 30-digit direct summation to 2e5 plus an Euler-Maclaurin remainder.
  const auto d = make_distribution(FamilySpec::power(2));
  const auto g = em_gap(d, 10000);
  EXPECT_NEAR(g.sum, 0.6909882989426710, 1e-13);
  EXPECT_NEAR(g.integral, 0.6909882989426710, 1e-13);
}

TEST(EmGap, IntegralApproachesGammaLimit) {
  const auto d = make_distribution(FamilySpec::power(2));
  const auto g = em_gap(d, 100000000);
  const double lim = power_tail_limit(d.norm_constant(), 2);
  EXPECT_NEAR(g.integral, lim, 5e-4 * lim);
}

TEST(EmGap, RejectsOtherFamilies) {
  EXPECT_EQ(error_code([] { em_gap(make_distribution(FamilySpec::geometric(2)), 10); }),
            Errc::InvalidParams);
}

TEST(PoissonZeta1, FiniteClosedForm) {
  const auto v = poisson_zeta1(uniform(4), 10.0);
  EXPECT_NEAR(v.value, std::exp(-2.5), 1e-16);
}

TEST(Schedules, GeometricSchedule) {
  const auto s = geometric_schedule(16, 1048576, 4);
  ASSERT_EQ(s.size(), 9u);
  EXPECT_EQ(s.front(), 16u);
  EXPECT_EQ(s.back(), 1048576u);
  const auto t = geometric_schedule(1, 10, 1.3);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_LT(t[i - 1], t[i]);
  EXPECT_EQ(geometric_schedule(5, 5, 2), std::vector<std::uint64_t>{5});
  EXPECT_EQ(error_code([] { geometric_schedule(0, 5, 2); }), Errc::InvalidParams);
  EXPECT_EQ(error_code([] { geometric_schedule(1, 5, 1); }), Errc::InvalidParams);
}

TEST(Schedules, IndexSeriesAlignsWithSchedule) {
  const auto d = make_distribution(FamilySpec::geometric(2));
  const auto sched = geometric_schedule(1, 1000, 3);
  const auto series = index_series(d, sched);
  ASSERT_EQ(series.points.size(), sched.size());
  for (std::size_t i = 0; i < sched.size(); ++i) EXPECT_EQ(series.points[i].n, sched[i]);
  EXPECT_EQ(error_code([&] { index_series(d, {5, 5}); }), Errc::InvalidParams);
}
