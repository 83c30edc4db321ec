//
// Copyright 2026 The bppfl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef BPPFL_STATS_H_
#define BPPFL_STATS_H_

#include <cstddef>
#include <span>
#include <vector>

namespace bppfl {

inline constexpr size_t kMinNormalitySamples = 1000;

struct NormalityReport {
  size_t samples = 0;
  double sigma = 1.0;
  double mean = 0.0;
  double variance = 0.0;
  double ks_stat = 0.0;
  double p_value = 0.0;

  // KS p-value and variance band gate used throughout the test suites.
  bool Passes(double min_p = 1e-3, double variance_band = 0.05) const;
};

// One-sample KS test against N(0, sigma^2) plus the first two moments.
// Throws std::domain_error with fewer than kMinNormalitySamples samples.
NormalityReport NormalityTest(std::span<const double> samples, double sigma);

// Asymptotic Kolmogorov survival function Q(lambda) = P(K > lambda).
double KolmogorovSurvival(double lambda);

// p-value for a KS statistic d with effective sample size n, using the
// Stephens small-sample correction of lambda.
double KolmogorovPValue(double d, double effective_n);

// Two-sample KS statistic. Inputs need not be sorted.
double TwoSampleKsStat(std::vector<double> a, std::vector<double> b);
double TwoSampleKsPValue(const std::vector<double>& a,
                         const std::vector<double>& b);

double NormalCdf(double x, double sigma = 1.0);

double Mean(std::span<const double> x);
// Unbiased sample variance.
double Variance(std::span<const double> x);
// Second moment about zero, for noise known to be centered.
double MeanSquare(std::span<const double> x);
double Median(std::vector<double> x);

}  // namespace bppfl

#endif  // BPPFL_STATS_H_
