#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <vector>

#include "tailidx/distribution.hpp"

namespace tailidx {

// Letter counts of a sample: counts[k] = y_k > 0, n = sum of y_k,
// N1 = number of letters seen exactly once.
struct FrequencyTable {
  std::uint64_t n = 0;
  std::map<std::uint64_t, std::uint64_t> counts;
  std::uint64_t N1 = 0;

  static FrequencyTable from_counts(std::map<std::uint64_t, std::uint64_t> counts);
  friend bool operator==(const FrequencyTable&, const FrequencyTable&) = default;
};

// Two-column CSV with header `k,y`.
void write_csv(std::ostream& out, const FrequencyTable& freq);
FrequencyTable read_csv(std::istream& in);

struct SampleOptions {
  // Largest index the inverse-CDF search may reach; draws beyond it raise
  // DepthExceeded.
  std::uint64_t max_index = std::uint64_t{1} << 26;
};

// n iid letters by inverse-CDF search over prefix sums; reproducible for a
// given seed.
FrequencyTable sample(const Distribution& dist, std::uint64_t n, std::uint64_t seed,
                      const SampleOptions& opts = {});

// Turing's formula N1 / n.
double turing(const FrequencyTable& freq);

// 1 - sum of p_k over observed letters.
double true_missing_mass(const Distribution& dist, const FrequencyTable& freq);

// Z_{1,v} = sum_k y_k (n - y_k)! / (n - y_k - v)! * (n - 1 - v)! / n!,
// a term being zero when n - y_k < v.  Throws InvalidV unless 1 <= v <= n-1.
double z1v(const FrequencyTable& freq, std::uint64_t v);

// v * Z_{1,v}.
double t_hat(const FrequencyTable& freq, std::uint64_t v);

// Z_{1,v} from the literal product form
// n^{1+v} (n-1-v)! / n! * sum_k p^_k prod_{j<v} (1 - p^_k - j/n).
double z1v_product_form(const FrequencyTable& freq, std::uint64_t v);

struct EstimatorReport {
  std::vector<std::uint64_t> v_values;
  std::vector<double> z1v;
  std::vector<double> t_hat;
};

EstimatorReport estimator_report(const FrequencyTable& freq, const std::vector<std::uint64_t>& vs);

enum class StatisticKind { Z1v, Turing, MissingMass };

struct Statistic {
  StatisticKind kind = StatisticKind::Z1v;
  std::uint64_t v = 1;  // Z1v only
};

// E[statistic] over all count vectors of a sample of size n from a finite
// distribution, each weighted by its exact multinomial probability.
// Throws TooLarge for support above 6 or n above 12.
double exact_expectation(const Distribution& dist, std::uint64_t n, Statistic stat);

}  // namespace tailidx
