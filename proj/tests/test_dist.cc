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

#include "bppfl/dist.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <gtest/gtest.h>

#include "bppfl/rng.h"
#include "bppfl/stats.h"

namespace bppfl {
namespace {

constexpr int kDraws = 100000;

std::vector<double> Draw(int n, const std::function<double()>& f) {
  std::vector<double> out(n);
  for (double& v : out) v = f();
  return out;
}

double SampleMean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / x.size();
}

double SampleVar(const std::vector<double>& x) {
  const double m = SampleMean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / (x.size() - 1);
}

// One-sample KS statistic against an arbitrary continuous CDF.
double KsStat(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

// (1/m) * (ln(L+1) - psi(L + 3/2)) / 2: the telescoped log terms minus the
// harmonic-like sum over 1/(2l+1), written with the digamma function.
double TailOracle(int m, double len) {
  return 0.5 * (std::log(len + 1.0) - boost::math::digamma(len + 1.5)) / m;
}

TEST(SampleGammaTest, ShapeOneIsExponential) {
  RngStream rng(1);
  const auto x = Draw(kDraws, [&] { return SampleGamma(1.0, rng); });
  const double m = SampleMean(x);
  EXPECT_GE(m, 0.99);
  EXPECT_LE(m, 1.01);
  const double d = KsStat(x, [](double v) { return 1.0 - std::exp(-v); });
  EXPECT_GT(KolmogorovPValue(d, x.size()), 1e-3);
}

TEST(SampleGammaTest, ShapeHalfMoments) {
  RngStream rng(2);
  const auto x = Draw(kDraws, [&] { return SampleGamma(0.5, rng); });
  EXPECT_NEAR(SampleMean(x), 0.5, 0.01);
  EXPECT_NEAR(SampleVar(x), 0.5, 0.02);
}

TEST(SampleGammaTest, ShapeThirdVariance) {
  RngStream rng(3);
  const auto x = Draw(kDraws, [&] { return SampleGamma(1.0 / 3.0, rng); });
  EXPECT_NEAR(SampleVar(x), 1.0 / 3.0, 0.05 / 3.0);
  EXPECT_NEAR(SampleMean(x), 1.0 / 3.0, 0.01);
}

TEST(SampleGammaTest, TinyShapeStaysPositiveAndFinite) {
  RngStream rng(4);
  const auto x = Draw(20000, [&] { return SampleGamma(0.01, rng); });
  for (double v : x) {
    ASSERT_GE(v, 0.0);
    ASSERT_TRUE(std::isfinite(v));
  }
  EXPECT_NEAR(SampleMean(x), 0.01, 0.003);
}

TEST(SampleGammaTest, RejectsShapeOutsideUnitInterval) {
  RngStream rng(5);
  EXPECT_THROW(SampleGamma(0.0, rng), std::domain_error);
  EXPECT_THROW(SampleGamma(-0.5, rng), std::domain_error);
  EXPECT_THROW(SampleGamma(1.5, rng), std::domain_error);
  EXPECT_THROW(SampleGamma(NAN, rng), std::domain_error);
}

TEST(SampleGammaTest, SeriesFastPathMatchesGenericSampler) {
  RngStream a(6);
  RngStream b(7);
  const auto fast = Draw(50000, [&] { return SampleSeriesGamma(0.5, a); });
  const auto slow = Draw(50000, [&] { return SampleGammaAnyShape(0.5, b); });
  EXPECT_GT(TwoSampleKsPValue(fast, slow), 1e-3);
}

TEST(SampleGammaTest, AnyShapeLargeShapeMoments) {
  RngStream rng(8);
  const auto x = Draw(kDraws, [&] { return SampleGammaAnyShape(7.5, rng); });
  EXPECT_NEAR(SampleMean(x), 7.5, 0.05);
  EXPECT_NEAR(SampleVar(x), 7.5, 0.3);
}

TEST(RademacherTest, BalancedAndUnitSquare) {
  RngStream rng(9);
  long sum = 0;
  long squares = 0;
  for (int i = 0; i < kDraws; ++i) {
    const int b = SampleRademacher(rng);
    ASSERT_TRUE(b == 1 || b == -1);
    sum += b;
    squares += b * b;
  }
  EXPECT_LE(std::abs(static_cast<double>(sum) / kDraws), 0.02);
  EXPECT_EQ(squares, kDraws);
}

TEST(RademacherTest, ReplaysUnderFixedSeed) {
  RngStream a(10, {1});
  RngStream b(10, {1});
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(SampleRademacher(a), SampleRademacher(b));
}

TEST(DnStarTailTest, MatchesDigammaClosedForm) {
  for (int m : {1, 2, 3}) {
    for (double len : {1.0, 7.0, 100.0, 4096.0, 50000.0, 1e6}) {
      const double got = DnStarTailExpectation(m, static_cast<int64_t>(len), 4096);
      const double want = TailOracle(m, len);
      EXPECT_NEAR(got, want, 1e-13 + 1e-10 * std::abs(want))
          << "m=" << m << " len=" << len;
    }
  }
}

TEST(DnStarTailTest, HorizonOnlyAffectsRounding) {
  for (int64_t h : {0, 16, 1000, 100000}) {
    EXPECT_NEAR(DnStarTailExpectation(1, 100, h), TailOracle(1, 100), 1e-13);
  }
}

TEST(DnStarTailTest, BruteForcePartialSum) {
  // Direct summation far past the cutoff plus a crude 1/(8l^2) tail bound.
  const int len = 50;
  double s = 0.0;
  for (int l = len + 1; l <= 2000000; ++l) {
    s += 1.0 / (2.0 * l + 1.0) - 0.5 * std::log1p(1.0 / l);
  }
  EXPECT_NEAR(DnStarTailExpectation(1, len, 4096), s, 1e-7);
}

TEST(DnStarTest, SpecValidation) {
  DnStarSpec s;
  EXPECT_NO_THROW(s.Validate());
  s.m = 0;
  EXPECT_THROW(s.Validate(), std::domain_error);
  s = DnStarSpec{};
  s.truncation_len = 0;
  EXPECT_THROW(s.Validate(), std::domain_error);
  s = DnStarSpec{};
  s.block_growth = 1.0;
  EXPECT_THROW(s.Validate(), std::domain_error);
  EXPECT_THROW(DnStarSampler{s}, std::domain_error);
}

TEST(DnStarTest, ProductWithDnIsStandardNormal) {
  DnStarSampler x(DnStarSpec{});
  RngStream rng(11);
  const DnSpec y{1.0, 1};
  const auto z = Draw(kDraws, [&] { return x(rng) * SampleDn(y, rng); });
  const NormalityReport r = NormalityTest(z, 1.0);
  EXPECT_GE(r.p_value, 1e-3);
  EXPECT_NEAR(r.variance, 1.0, 0.05);
  EXPECT_EQ(x.clamp_events(), 0u);
}

TEST(DnStarTest, SignIsFair) {
  for (int m : {1, 2}) {
    DnStarSpec spec;
    spec.m = m;
    DnStarSampler x(spec);
    RngStream rng(12, {static_cast<uint64_t>(m)});
    int pos = 0;
    for (int i = 0; i < kDraws; ++i) pos += x(rng) > 0.0;
    EXPECT_NEAR(static_cast<double>(pos) / kDraws, 0.5, 0.01);
  }
}

TEST(DnStarTest, TwoDnStarTwoTimesDnUnitVariance) {
  DnStarSpec spec;
  spec.m = 2;
  DnStarSampler x(spec);
  RngStream rng(13);
  const DnSpec y{1.0, 1};
  const auto z =
      Draw(kDraws, [&] { return x(rng) * x(rng) * SampleDn(y, rng); });
  const double v = SampleVar(z);
  EXPECT_GE(v, 0.95);
  EXPECT_LE(v, 1.05);
}

TEST(DnStarTest, LogMagnitudeMoments) {
  // ln|X| = offset - sum_l G_l / (2l+1) with G_l ~ Gamma(1/m):
  // Var = (1/m) sum 1/(2l+1)^2 = (pi^2/8 - 1)/m, E = psi(3/2) / (2m).
  for (int m : {1, 2}) {
    DnStarSpec spec;
    spec.m = m;
    DnStarSampler x(spec);
    RngStream rng(14, {static_cast<uint64_t>(m)});
    const auto lx =
        Draw(kDraws, [&] { return std::log(x.Draw(rng).magnitude); });
    const double var = (std::numbers::pi * std::numbers::pi / 8.0 - 1.0) / m;
    const double mean = boost::math::digamma(1.5) / (2.0 * m);
    EXPECT_NEAR(SampleVar(lx), var, 0.03 * var) << "m=" << m;
    EXPECT_NEAR(SampleMean(lx), mean, 5.0 * std::sqrt(var / kDraws))
        << "m=" << m;
  }
}

TEST(DnStarTest, DeterministicOffsetMatchesClosedForm) {
  DnStarSpec spec;
  spec.m = 2;
  spec.truncation_len = 1000;
  const DnStarSampler x(spec);
  EXPECT_NEAR(x.log_offset(), std::log(1001.0) / 4.0 - TailOracle(2, 1000.0),
              1e-13);
  spec.tail_correction = false;
  EXPECT_NEAR(DnStarSampler(spec).log_offset(), std::log(1001.0) / 4.0, 1e-13);
  spec.drop_compensator = true;
  EXPECT_EQ(DnStarSampler(spec).log_offset(), 0.0);
}

TEST(DnStarTest, BlockedSeriesMatchesLiteralSeries) {
  for (int m : {1, 2}) {
    DnStarSpec literal;
    literal.m = m;
    literal.truncation_len = 3000;
    literal.exact_terms = literal.truncation_len;
    DnStarSpec blocked = literal;
    blocked.exact_terms = 64;
    DnStarSampler a(literal);
    DnStarSampler b(blocked);
    RngStream ra(15, {1, static_cast<uint64_t>(m)});
    RngStream rb(15, {2, static_cast<uint64_t>(m)});
    const auto la =
        Draw(20000, [&] { return std::log(a.Draw(ra).magnitude); });
    const auto lb =
        Draw(20000, [&] { return std::log(b.Draw(rb).magnitude); });
    EXPECT_GT(TwoSampleKsPValue(la, lb), 1e-3) << "m=" << m;
    EXPECT_NEAR(SampleVar(la), SampleVar(lb), 0.05 * SampleVar(la));
  }
}

TEST(DnStarTest, TruncationErrorShrinksLikeInverseLength) {
  // With term-by-term sampling the same seed shares the first terms, so the
  // log difference between cutoffs L1 < L2 is sum_{L1<l<=L2} (1/m - G_l)/(2l+1)
  // with mean square (1/m) sum 1/(2l+1)^2 ~ 1/(4 m L1).
  for (int64_t l1 : {100, 400}) {
    const int64_t l2 = 4 * l1;
    DnStarSpec s1;
    s1.truncation_len = l1;
    s1.exact_terms = l2;
    DnStarSpec s2 = s1;
    s2.truncation_len = l2;
    DnStarSampler a(s1);
    DnStarSampler b(s2);
    double ms = 0.0;
    double mean = 0.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
      RngStream ra(16, {static_cast<uint64_t>(i)});
      RngStream rb(16, {static_cast<uint64_t>(i)});
      const SignedDraw da = a.Draw(ra);
      const SignedDraw db = b.Draw(rb);
      ASSERT_EQ(da.sign, db.sign);
      const double d = std::log(db.magnitude) - std::log(da.magnitude);
      ms += d * d / n;
      mean += d / n;
    }
    double want = 0.0;
    for (int64_t l = l1 + 1; l <= l2; ++l) {
      want += 1.0 / ((2.0 * l + 1.0) * (2.0 * l + 1.0));
    }
    EXPECT_NEAR(ms, want, 0.1 * want) << "L1=" << l1;
    EXPECT_NEAR(mean, 0.0, 5.0 * std::sqrt(want / n));
  }
}

TEST(DnStarTest, MissingCompensatorShiftsVariance) {
  DnStarSpec spec;
  spec.drop_compensator = true;
  DnStarSampler x(spec);
  RngStream rng(17);
  const DnSpec y{1.0, 1};
  const auto z = Draw(kDraws, [&] { return x(rng) * SampleDn(y, rng); });
  const NormalityReport r = NormalityTest(z, 1.0);
  EXPECT_FALSE(r.Passes());
  EXPECT_GT(std::abs(r.variance - 1.0), 0.10);
}

TEST(DnStarTest, TailCorrectionIsAConstantFactor) {
  // Same stream, with and without the correction: every draw differs by
  // exactly exp(tail). The summand is -1/(24 l^3) + O(l^-4), so the tail is
  // about -1/(48 L^2) and the variance effect at L = 100 is ~4e-6.
  DnStarSpec spec;
  spec.truncation_len = 100;
  spec.tail_correction = false;
  DnStarSampler bare(spec);
  spec.tail_correction = true;
  DnStarSampler corrected(spec);
  const double tail = TailOracle(1, 100.0);
  EXPECT_LT(tail, 0.0);
  EXPECT_NEAR(tail, -1.0 / (48.0 * 100.0 * 100.0), 1e-7);
  RngStream ra(18);
  RngStream rb(18);
  for (int i = 0; i < 1000; ++i) {
    const double a = bare(ra);
    const double b = corrected(rb);
    ASSERT_NEAR(a / b, std::exp(tail), 1e-12);
  }
}

TEST(DnStarTest, SymmetricAboutZero) {
  // |DN*| keeps away from zero, so a signed sample median can land anywhere
  // in the central gap. Symmetry is checked as: the positive draws and the
  // negated negative draws share one distribution.
  DnStarSampler x(DnStarSpec{});
  RngStream rng(19);
  std::vector<double> pos;
  std::vector<double> neg;
  for (int i = 0; i < kDraws; ++i) {
    const double v = x(rng);
    (v > 0.0 ? pos : neg).push_back(std::abs(v));
  }
  EXPECT_GT(TwoSampleKsPValue(pos, neg), 1e-3);
}

TEST(DnStarTest, Replays) {
  DnStarSampler x(DnStarSpec{});
  RngStream a(20, {3});
  RngStream b(20, {3});
  for (int i = 0; i < 200; ++i) ASSERT_EQ(x(a), x(b));
}

TEST(DnTest, SpecValidation) {
  EXPECT_THROW((DnSpec{0.0, 1}).Validate(), std::domain_error);
  EXPECT_THROW((DnSpec{1.0, 0}).Validate(), std::domain_error);
  RngStream rng(1);
  EXPECT_THROW(SampleDn(DnSpec{-1.0, 1}, rng), std::domain_error);
}

TEST(DnTest, SigmaScalesByNthRoot) {
  for (int n : {1, 2, 3}) {
    RngStream a(21, {static_cast<uint64_t>(n)});
    RngStream b(21, {static_cast<uint64_t>(n)});
    for (int i = 0; i < 1000; ++i) {
      const double one = SampleDn(DnSpec{1.0, n}, a);
      const double two = SampleDn(DnSpec{2.0, n}, b);
      ASSERT_NEAR(two / one, std::pow(2.0, 1.0 / n), 1e-12);
    }
  }
}

TEST(DnTest, LogMagnitudeMean) {
  RngStream rng(22);
  const auto lx = Draw(kDraws, [&] {
    return std::log(SampleDnDraw(DnSpec{1.0, 1}, rng).magnitude);
  });
  EXPECT_NEAR(SampleMean(lx), std::log(std::sqrt(2.0)) - 1.0, 0.02);
}

TEST(DnTest, MagnitudeIsScaledExponential) {
  // |DN(1,1)| = sqrt(2) exp(-E): -ln(|d| / sqrt(2)) is Exp(1).
  RngStream rng(23);
  const auto e = Draw(kDraws, [&] {
    return -std::log(SampleDnDraw(DnSpec{1.0, 1}, rng).magnitude /
                     std::sqrt(2.0));
  });
  const double d = KsStat(e, [](double v) { return 1.0 - std::exp(-v); });
  EXPECT_GT(KolmogorovPValue(d, e.size()), 1e-3);
}

TEST(DnTest, ProductWithDnStarIsHalfNormalInMagnitude) {
  DnStarSampler x(DnStarSpec{});
  RngStream rng(24);
  const auto z = Draw(kDraws, [&] {
    return std::abs(x(rng) * SampleDn(DnSpec{1.0, 1}, rng));
  });
  const double d =
      KsStat(z, [](double v) { return std::erf(v / std::numbers::sqrt2); });
  EXPECT_GT(KolmogorovPValue(d, z.size()), 1e-3);
}

TEST(DnTest, ClampCountsOverflowingDraws) {
  // ln(sqrt(2) * 1e306) ~ 705 exceeds the 700 guard unless G > ~5.
  RngStream rng(25);
  uint64_t clamps = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const SignedDraw d = SampleDnDraw(DnSpec{1e306, 1}, rng, &clamps);
    ASSERT_TRUE(std::isfinite(d.magnitude));
    ASSERT_LE(d.magnitude, std::exp(700.0) * (1.0 + 1e-12));
  }
  EXPECT_GT(clamps, 950u);
  EXPECT_LE(clamps, static_cast<uint64_t>(n));
  uint64_t none = 0;
  for (int i = 0; i < n; ++i) SampleDn(DnSpec{1.0, 1}, rng, &none);
  EXPECT_EQ(none, 0u);
}

TEST(DnTest, ProductNormalityAcrossCombos) {
  const int combos[4][2] = {{1, 1}, {2, 1}, {1, 2}, {2, 2}};
  for (const auto& c : combos) {
    DnStarSpec spec;
    spec.m = c[0];
    DnStarSampler x(spec);
    RngStream rng(26, {static_cast<uint64_t>(c[0]), static_cast<uint64_t>(c[1])});
    const DnSpec y{1.5, c[1]};
    const auto z = Draw(kDraws, [&] {
      double p = 1.0;
      for (int i = 0; i < c[0]; ++i) p *= x(rng);
      for (int j = 0; j < c[1]; ++j) p *= SampleDn(y, rng);
      return p;
    });
    const NormalityReport r = NormalityTest(z, 1.5);
    EXPECT_TRUE(r.Passes()) << "m=" << c[0] << " n=" << c[1]
                            << " p=" << r.p_value << " var=" << r.variance;
    EXPECT_NEAR(Median(z), 0.0, 0.02 * 1.5);
  }
}

}  // namespace
}  // namespace bppfl
