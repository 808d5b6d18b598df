#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "tailidx/distribution.hpp"
#include "tailidx/error.hpp"
#include "tailidx/estimate.hpp"
#include "tailidx/family_spec.hpp"
#include "tailidx/tail_index.hpp"

using namespace tailidx;

namespace {

__extension__ typedef unsigned __int128 u128;

FrequencyTable table(std::map<std::uint64_t, std::uint64_t> counts) {
  return FrequencyTable::from_counts(std::move(counts));
}

double direct_zeta1(const std::vector<double>& p, std::uint64_t n) {
  long double s = 0;
  for (double x : p) s += x * std::pow(1.0L - x, static_cast<long double>(n));
  return static_cast<double>(s);
}

// Z_{1,v} as an exact rational sum_k y_k ff(n - y_k, v) / ff(n, v + 1),
// reduced only at the final division.
double exact_z1v(const FrequencyTable& f, std::uint64_t v) {
  auto ff = [](std::uint64_t a, std::uint64_t m) {
    u128 r = 1;
    for (std::uint64_t j = 0; j < m; ++j) r *= a - j;
    return r;
  };
  u128 num = 0;
  for (const auto& [k, y] : f.counts)
    if (f.n - y >= v) num += y * ff(f.n - y, v);
  const u128 den = ff(f.n, v + 1);
  // Split into integer and fractional parts to keep full precision.
  const u128 q = num / den, r = num % den;
  return static_cast<double>(static_cast<long double>(q) +
                             static_cast<long double>(r) / static_cast<long double>(den));
}

FrequencyTable random_table(std::mt19937_64& rng, std::uint64_t n) {
  std::map<std::uint64_t, std::uint64_t> counts;
  const std::uint64_t letters = 1 + rng() % std::min<std::uint64_t>(n, 12);
  for (std::uint64_t i = 0; i < n; ++i) ++counts[1 + rng() % letters];
  return table(counts);
}

const std::vector<std::vector<double>> kSmallFinite = {
    {1.0},
    {0.5, 0.5},
    {0.75, 0.25},
    {0.9, 0.1},
    {0.5, 0.3, 0.2},
    {1.0 / 3, 1.0 / 3, 1.0 / 3},
    {0.4, 0.3, 0.2, 0.1},
    {0.25, 0.25, 0.25, 0.25},
    {0.7, 0.1, 0.1, 0.1},
};

}  // namespace

TEST(FrequencyTableTest, FromCounts) {
  const auto f = table({{1, 3}, {4, 1}, {9, 1}});
  EXPECT_EQ(f.n, 5u);
  EXPECT_EQ(f.N1, 2u);
  EXPECT_THROW(table({{0, 2}}), Error);
}

TEST(FrequencyTableTest, CsvRoundTrip) {
  const auto f = table({{1, 3}, {4, 1}, {90, 12}});
  std::stringstream ss;
  write_csv(ss, f);
  EXPECT_EQ(ss.str(), "k,y\n1,3\n4,1\n90,12\n");
  EXPECT_EQ(read_csv(ss), f);
}

TEST(FrequencyTableTest, CsvErrors) {
  std::istringstream bad_header("letter,count\n1,2\n");
  EXPECT_THROW(read_csv(bad_header), Error);
  std::istringstream bad_row("k,y\n1;2\n");
  EXPECT_THROW(read_csv(bad_row), Error);
  std::istringstream dup("k,y\n1,2\n1,3\n");
  EXPECT_THROW(read_csv(dup), Error);
  std::istringstream zero("k,y\n1,0\n");
  EXPECT_THROW(read_csv(zero), Error);
}

TEST(Sample, DegenerateDistribution) {
  const auto f = sample(make_distribution(FamilySpec::finite({1.0})), 5, 123);
  EXPECT_EQ(f.n, 5u);
  EXPECT_EQ(f.counts.size(), 1u);
  EXPECT_EQ(f.counts.at(1), 5u);
  EXPECT_EQ(f.N1, 0u);
}

TEST(Sample, DeterministicForSeed) {
  for (const auto& s : {FamilySpec::geometric(2), FamilySpec::power(1.5), FamilySpec::diffusion(3),
                        FamilySpec::finite({0.5, 0.3, 0.2})}) {
    const auto d = make_distribution(s);
    EXPECT_EQ(sample(d, 1000, 42), sample(d, 1000, 42)) << format_family_spec(s);
    EXPECT_NE(sample(d, 1000, 42), sample(d, 1000, 43)) << format_family_spec(s);
  }
}

TEST(Sample, EmpiricalFrequenciesMatch) {
  const auto d = make_distribution(FamilySpec::geometric(2));
  const std::uint64_t n = 200000;
  const auto f = sample(d, n, 9);
  for (std::uint64_t k = 1; k <= 6; ++k) {
    const double p = d.prob(k);
    const double se = std::sqrt(p * (1 - p) / n);
    EXPECT_NEAR(static_cast<double>(f.counts.at(k)) / n, p, 5 * se) << k;
  }
}

TEST(Sample, SkipsZeroProbabilityLetters) {
  const auto f = sample(make_distribution(FamilySpec::finite({0.5, 0.0, 0.5})), 1000, 1);
  EXPECT_EQ(f.counts.count(2), 0u);
}

TEST(Sample, ConstructedDepthLimit) {
  // Mass beyond index 3 of a depth-1 pair average is about 1/4.
  const auto d = construct_pair_averaged(make_distribution(FamilySpec::geometric(2)), 1);
  try {
    sample(d, 100, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DepthExceeded);
  }
}

TEST(Turing, Examples) {
  EXPECT_EQ(turing(table({{1, 1}, {2, 1}})), 1.0);
  EXPECT_EQ(turing(table({{1, 2}})), 0.0);
}

TEST(TrueMissingMass, Examples) {
  const auto d = make_distribution(FamilySpec::finite({0.5, 0.5}));
  EXPECT_EQ(true_missing_mass(d, table({{1, 1}, {2, 1}})), 0.0);
  EXPECT_EQ(true_missing_mass(d, table({{1, 2}})), 0.5);
}

TEST(Z1v, Examples) {
  EXPECT_EQ(z1v(table({{1, 1}, {2, 1}}), 1), 1.0);
  EXPECT_EQ(z1v(table({{1, 2}}), 1), 0.0);
  EXPECT_EQ(t_hat(table({{1, 1}, {2, 1}}), 1), 1.0);
  EXPECT_EQ(t_hat(table({{1, 2}}), 1), 0.0);
}

TEST(Z1v, RejectsBadV) {
  const auto f = table({{1, 2}, {2, 3}});
  for (std::uint64_t v : {0u, 5u, 6u}) {
    try {
      z1v(f, v);
      ADD_FAILURE() << v;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::InvalidV);
    }
  }
}

TEST(Z1v, VanishingPath) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::uint64_t n = 2 + rng() % 60;
    const auto f = random_table(rng, n);
    std::uint64_t min_y = n;
    for (const auto& [k, y] : f.counts) min_y = std::min(min_y, y);
    // Every letter has y_k > n - v exactly when v > n - min_y.
    for (std::uint64_t v = n - min_y + 1; v <= n - 1; ++v) EXPECT_EQ(z1v(f, v), 0.0);
  }
  EXPECT_EQ(z1v(table({{7, 40}}), 13), 0.0);
}

TEST(Z1v, MatchesLiteralProductForm) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 400; ++trial) {
    const std::uint64_t n = 2 + rng() % 19;
    const auto f = random_table(rng, n);
    for (std::uint64_t v = 1; v < n; ++v) {
      const double a = z1v(f, v), b = z1v_product_form(f, v);
      EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::fabs(a))) << "n=" << n << " v=" << v;
    }
  }
}

TEST(Z1v, ExactIntegerPathMatchesRational) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint64_t n = 2 + rng() % 29;
    const auto f = random_table(rng, n);
    for (std::uint64_t v = 1; v < n; ++v) EXPECT_NEAR(z1v(f, v), exact_z1v(f, v), 1e-15);
  }
}

TEST(Z1v, LogGammaPathAgreesAcrossCrossover) {
  // n = 31..33 go through log-gamma; the rational value still fits 128 bits.
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint64_t n = 31 + rng() % 3;
    const auto f = random_table(rng, n);
    for (std::uint64_t v = 1; v < n; ++v) {
      const double want = exact_z1v(f, v);
      EXPECT_NEAR(z1v(f, v), want, 1e-13 * std::max(want, 1e-300)) << "n=" << n << " v=" << v;
    }
  }
}

TEST(Z1v, LargeSampleStaysFinite) {
  const auto d = make_distribution(FamilySpec::power(3));
  const auto f = sample(d, 100000, 5);
  for (std::uint64_t v : {1u, 10u, 1000u, 99999u}) {
    const double z = z1v(f, v);
    EXPECT_TRUE(std::isfinite(z));
    EXPECT_GE(z, 0.0);
  }
}

TEST(EstimatorReportTest, THatIsExactlyVTimesZ) {
  const auto f = sample(make_distribution(FamilySpec::geometric(2)), 200, 7);
  std::vector<std::uint64_t> vs;
  for (std::uint64_t v = 1; v < 200; ++v) vs.push_back(v);
  const auto r = estimator_report(f, vs);
  ASSERT_EQ(r.v_values.size(), 199u);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    EXPECT_EQ(r.t_hat[i], static_cast<double>(r.v_values[i]) * r.z1v[i]);
    EXPECT_EQ(r.z1v[i], z1v(f, vs[i]));
  }
}

TEST(ExactExpectation, Examples) {
  const auto d3 = make_distribution(FamilySpec::finite({0.5, 0.3, 0.2}));
  // 0.5 * 0.125 + 0.3 * 0.343 + 0.2 * 0.512
  EXPECT_NEAR(exact_expectation(d3, 6, {StatisticKind::Z1v, 3}), 0.2678, 1e-15);
  const auto d2 = make_distribution(FamilySpec::finite({0.5, 0.5}));
  EXPECT_NEAR(exact_expectation(d2, 2, {StatisticKind::Turing, 1}), 0.5, 1e-16);
  const auto d1 = make_distribution(FamilySpec::finite({1.0}));
  for (std::uint64_t n : {1u, 5u, 12u}) EXPECT_EQ(exact_expectation(d1, n, {StatisticKind::MissingMass, 1}), 0.0);
}

TEST(ExactExpectation, Limits) {
  const auto d7 = make_distribution(FamilySpec::finite(std::vector<double>(7, 1.0 / 7)));
  const auto d2 = make_distribution(FamilySpec::finite({0.5, 0.5}));
  auto code = [](auto f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::Io;
  };
  EXPECT_EQ(code([&] { exact_expectation(d7, 5, {}); }), Errc::TooLarge);
  EXPECT_EQ(code([&] { exact_expectation(d2, 13, {}); }), Errc::TooLarge);
  EXPECT_EQ(code([&] { exact_expectation(d2, 4, {StatisticKind::Z1v, 4}); }), Errc::InvalidV);
  EXPECT_EQ(code([&] { exact_expectation(make_distribution(FamilySpec::geometric(2)), 4, {}); }),
            Errc::InvalidParams);
}

TEST(ExactExpectation, Unbiasedness) {
  for (const auto& p : kSmallFinite) {
    const auto d = make_distribution(FamilySpec::finite(p));
    for (std::uint64_t n : {4u, 5u, 6u, 8u}) {
      for (std::uint64_t v = 1; v < n; ++v) {
        EXPECT_NEAR(exact_expectation(d, n, {StatisticKind::Z1v, v}), direct_zeta1(p, v), 1e-12)
            << "K=" << p.size() << " n=" << n << " v=" << v;
      }
    }
  }
}

TEST(ExactExpectation, TuringAndMissingMassIdentities) {
  for (const auto& p : kSmallFinite) {
    const auto d = make_distribution(FamilySpec::finite(p));
    for (std::uint64_t n : {4u, 5u, 6u, 8u}) {
      EXPECT_NEAR(exact_expectation(d, n, {StatisticKind::Turing, 1}), direct_zeta1(p, n - 1), 1e-12);
      EXPECT_NEAR(exact_expectation(d, n, {StatisticKind::MissingMass, 1}), direct_zeta1(p, n), 1e-12);
    }
  }
}

TEST(ExactExpectation, LargerAlphabetsWithinLimits) {
  const std::vector<double> p = {0.3, 0.25, 0.2, 0.1, 0.1, 0.05};
  const auto d = make_distribution(FamilySpec::finite(p));
  for (std::uint64_t v : {1u, 6u, 11u})
    EXPECT_NEAR(exact_expectation(d, 12, {StatisticKind::Z1v, v}), direct_zeta1(p, v), 1e-12);
}

TEST(MonteCarlo, THatMeanMatchesIndex) {
  const auto d = make_distribution(FamilySpec::geometric(2));
  const std::uint64_t reps = 10000, n = 200, v = 100;
  long double s = 0, s2 = 0;
  for (std::uint64_t seed = 0; seed < reps; ++seed) {
    const double t = t_hat(sample(d, n, seed), v);
    s += t;
    s2 += static_cast<long double>(t) * t;
  }
  const double mean = static_cast<double>(s / reps);
  const double var = static_cast<double>(s2 / reps) - mean * mean;
  const double se = std::sqrt(var / reps);
  const double target = tn(d, v).value;
  EXPECT_LT(std::fabs(mean - target), 3 * se) << "mean " << mean << " target " << target << " se " << se;
}
