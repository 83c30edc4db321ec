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

#include "bppfl/client.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bppfl/dist.h"
#include "bppfl/rng.h"
#include "bppfl/server.h"
#include "bppfl/stats.h"
#include "bppfl/topology.h"

namespace bppfl {
namespace {

const std::vector<int> kDims = {6, 10, 8, 3};

std::vector<Sample> RandomBatch(int n, RngStream& rng) {
  std::vector<Sample> b(n);
  for (Sample& s : b) {
    s.x.resize(kDims.front());
    for (int i = 0; i < s.x.size(); ++i) s.x(i) = rng.Uniform();
    s.y_bar = Vector::Zero(kDims.back());
    s.y_bar(rng.UniformInt(kDims.back())) = 1.0;
  }
  return b;
}

TEST(IndependentNoiseTest, ZeroSigmaGivesZeros) {
  RngStream rng(1);
  EXPECT_EQ(DrawIndependentNoise({3, 4}, 0.0, rng), Matrix::Zero(3, 4));
  EXPECT_THROW(DrawIndependentNoise({3, 4}, -1.0, rng), std::domain_error);
}

TEST(IndependentNoiseTest, EntriesAreDnDraws) {
  // Column-major fill from the same stream reproduces SampleDn one by one.
  RngStream a(2, {5});
  RngStream b(2, {5});
  const Matrix m = DrawIndependentNoise({3, 2}, 0.7, a);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 3; ++i) EXPECT_EQ(m(i, j), SampleDn(DnSpec{0.7, 1}, b));
}

TEST(IndependentNoiseTest, ProductWithSignedDnStarIsGaussian) {
  RngStream rng(3);
  DnStarSampler x(DnStarSpec{});
  const Matrix eta = DrawIndependentNoise({1000, 100}, 1.7, rng);
  std::vector<double> z(eta.size());
  for (int i = 0; i < eta.size(); ++i) z[i] = x(rng) * eta.data()[i];
  EXPECT_TRUE(NormalityTest(z, 1.7).Passes());
}

TEST(IndependentNoiseTest, SecondMomentIsTwoThirdsSigmaSquared) {
  // |DN(s,1)|^2 = 2 s^2 exp(-2E), E ~ Exp(1), so E[eta^2] = 2 s^2 / 3.
  RngStream rng(4);
  const Matrix eta = DrawIndependentNoise({500, 200}, 2.0, rng);
  EXPECT_NEAR(eta.squaredNorm() / eta.size(), 8.0 / 3.0, 0.03 * 8.0 / 3.0);
}

TEST(IndependentNoiseTest, GaussianKind) {
  RngStream rng(5);
  const Matrix eta = DrawIndependentNoise({500, 200}, 0.5, rng, NoiseKind::kGaussian);
  std::vector<double> v(eta.data(), eta.data() + eta.size());
  EXPECT_TRUE(NormalityTest(v, 0.5).Passes());
}

TEST(IndependentNoiseTest, DistinctStreamsDiffer) {
  RngStream a(6, {1});
  RngStream b(6, {2});
  const Matrix ma = DrawIndependentNoise({4, 4}, 1.0, a);
  const Matrix mb = DrawIndependentNoise({4, 4}, 1.0, b);
  EXPECT_TRUE((ma.array() != mb.array()).all());
}

TEST(PairwiseNoiseTest, BitwiseAntisymmetric) {
  const std::vector<Shape> shapes = {{10, 6}, {8, 10}, {3, 8}};
  for (int k = 1; k <= 6; ++k) {
    for (int v = 1; v <= 6; ++v) {
      if (k == v) continue;
      const uint64_t seed = PairSeed(9, 2, k, v);
      const auto a = DrawPairwiseNoise(k, v, 2, seed, 3.0, shapes);
      const auto b = DrawPairwiseNoise(v, k, 2, seed, 3.0, shapes);
      for (size_t t = 0; t < shapes.size(); ++t) {
        EXPECT_TRUE(((a[t] + b[t]).array() == 0.0).all());
        EXPECT_TRUE((a[t].array() != 0.0).all());
      }
    }
  }
}

TEST(PairwiseNoiseTest, LowerIdKeepsDraws) {
  const auto a = DrawPairwiseNoise(2, 7, 3, 11, 1.0, {{4, 4}});
  RngStream rng(11, {PurposeTag(Purpose::kPairwiseNoise), 3, 2, 7});
  EXPECT_EQ(a[0], DrawIndependentNoise({4, 4}, 1.0, rng));
}

TEST(PairwiseNoiseTest, ZeroSigmaAndErrors) {
  const auto z = DrawPairwiseNoise(1, 2, 1, 5, 0.0, {{2, 2}});
  EXPECT_EQ(z[0], Matrix::Zero(2, 2));
  EXPECT_THROW(DrawPairwiseNoise(3, 3, 1, 5, 1.0, {{2, 2}}), std::domain_error);
}

TEST(PairwiseNoiseTest, RoundAndSeedChangeDraws) {
  const auto a = DrawPairwiseNoise(1, 2, 1, 5, 1.0, {{3, 3}});
  const auto b = DrawPairwiseNoise(1, 2, 2, 5, 1.0, {{3, 3}});
  const auto c = DrawPairwiseNoise(1, 2, 1, 6, 1.0, {{3, 3}});
  const auto d = DrawPairwiseNoise(1, 2, 1, 5, 1.0, {{3, 3}});
  EXPECT_TRUE((a[0].array() != b[0].array()).all());
  EXPECT_TRUE((a[0].array() != c[0].array()).all());
  EXPECT_EQ(a[0], d[0]);
}

TEST(PairwiseNoiseTest, SkipNegationBreaksCancellation) {
  const auto a = DrawPairwiseNoise(1, 2, 1, 5, 1.0, {{3, 3}}, true);
  const auto b = DrawPairwiseNoise(2, 1, 1, 5, 1.0, {{3, 3}}, true);
  EXPECT_EQ(a[0], b[0]);
}

class LocalRoundTest : public ::testing::Test {
 protected:
  void SetUp() override {
    RngStream rng(20);
    w_ = InitModel(kDims, rng);
    p_ = MpServer(w_, rng, 1);
  }
  ModelParams w_;
  Perturbed p_;
};

TEST_F(LocalRoundTest, NoiseFreeBundleIsClippedGradients) {
  RngStream rng(21);
  const std::vector<Sample> d = RandomBatch(12, rng);
  ClientOptions opt;
  opt.clip_threshold = 0.1;
  const LocalRoundResult r = LocalRound(p_.w_hat, d, 4, 1, {}, opt, rng);
  const GradBundle want = ClipBundle(BatchGradients(p_.w_hat, d), 0.1);
  EXPECT_EQ(r.bundle.client_id, 4);
  EXPECT_EQ(r.bundle.round, 1u);
  for (size_t t = 0; t < want.grads.size(); ++t) {
    EXPECT_EQ(r.bundle.bundle.grads[t], want.grads[t]);
    EXPECT_EQ(r.bundle.bundle.phi[t], want.phi[t]);
    EXPECT_EQ(r.clean.grads[t], want.grads[t]);
    EXPECT_LE(r.bundle.bundle.grads[t].norm(), 0.1 * (1.0 + 1e-12));
  }
  EXPECT_TRUE(r.warnings.empty());
}

TEST_F(LocalRoundTest, IdenticalDataNeighborsDifferByTwiceDelta) {
  RngStream rng(22);
  const std::vector<Sample> d = RandomBatch(12, rng);
  ClientOptions opt;
  opt.sigma_delta = 2.0;
  const uint64_t seed = PairSeed(3, 1, 1, 2);
  RngStream r1(0, {1});
  RngStream r2(0, {2});
  const LocalRoundResult a = LocalRound(p_.w_hat, d, 1, 1, {{2, seed}}, opt, r1);
  const LocalRoundResult b = LocalRound(p_.w_hat, d, 2, 1, {{1, seed}}, opt, r2);
  const auto delta = DrawPairwiseNoise(1, 2, 1, seed, 2.0, TrainableShapes(p_.w_hat));
  for (size_t t = 0; t < delta.size(); ++t) {
    const Matrix diff = a.bundle.bundle.grads[t] - b.bundle.bundle.grads[t];
    EXPECT_LE((diff - 2.0 * delta[t]).cwiseAbs().maxCoeff(),
              1e-12 * (1.0 + delta[t].cwiseAbs().maxCoeff()));
    // Corrections pass through untouched.
    EXPECT_EQ(a.bundle.bundle.phi[t], b.bundle.bundle.phi[t]);
  }
}

TEST_F(LocalRoundTest, CompleteGraphRoundCancelsPairwiseNoise) {
  RngStream rng(23);
  const int k = 5;
  const GraphTopology g = BuildComplete(k);
  const auto seeds = PairwiseSeeds(g, 1, 99);
  ClientOptions opt;
  opt.sigma_delta = 5.0;
  std::vector<ClientBundle> noisy;
  std::vector<ClientBundle> clean;
  for (int id = 1; id <= k; ++id) {
    std::vector<Neighbor> nb;
    for (int v : g.Neighbors(id)) nb.push_back({v, seeds.at(MakeEdge(id, v))});
    const LocalRoundResult r =
        LocalRound(p_.w_hat, RandomBatch(10, rng), id, 1, nb, opt, rng);
    noisy.push_back(r.bundle);
    clean.push_back({id, 1, r.clean});
  }
  const auto got = RecoverAggregate(Aggregate(noisy), p_.secret);
  const auto want = RecoverAggregate(Aggregate(clean), p_.secret);
  double num = 0.0;
  double den = 0.0;
  for (size_t t = 0; t < got.size(); ++t) {
    num = std::max(num, (got[t] - want[t]).cwiseAbs().maxCoeff());
    den = std::max(den, want[t].cwiseAbs().maxCoeff());
  }
  EXPECT_LE(num / den, 1e-9);
}

TEST_F(LocalRoundTest, BundleHidesGradientBehindNoise) {
  // Per entry the added noise is eta + sum of deg pairwise terms, each DN,
  // so its second moment is (2/3) (sigma_eta^2 + deg sigma_delta^2).
  RngStream rng(24);
  const std::vector<Sample> d = RandomBatch(8, rng);
  ClientOptions opt;
  opt.sigma_eta = 0.5;
  opt.sigma_delta = 1.5;
  const int deg = 3;
  std::vector<double> diffs;
  for (int rep = 0; diffs.size() < 20000; ++rep) {
    std::vector<Neighbor> nb;
    for (int v = 2; v < 2 + deg; ++v) nb.push_back({v, PairSeed(rep, 1, 1, v)});
    const LocalRoundResult r = LocalRound(p_.w_hat, d, 1, 1, nb, opt, rng);
    for (size_t t = 0; t < r.clean.grads.size(); ++t) {
      const Matrix m = r.bundle.bundle.grads[t] - r.clean.grads[t];
      for (int i = 0; i < m.size(); ++i) {
        ASSERT_NE(m.data()[i], 0.0);
        diffs.push_back(m.data()[i]);
      }
    }
  }
  const double want = 2.0 / 3.0 * (0.25 + deg * 2.25);
  EXPECT_NEAR(MeanSquare(diffs), want, 0.15 * want);
}

TEST_F(LocalRoundTest, MissingNeighborsWarn) {
  RngStream rng(25);
  ClientOptions opt;
  opt.sigma_delta = 1.0;
  const LocalRoundResult r = LocalRound(p_.w_hat, RandomBatch(4, rng), 7, 1, {}, opt, rng);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("client 7"), std::string::npos);
}

TEST_F(LocalRoundTest, Preconditions) {
  RngStream rng(26);
  ClientOptions opt;
  EXPECT_THROW(LocalRound(w_, RandomBatch(4, rng), 1, 1, {}, opt, rng),
               std::domain_error);
  EXPECT_THROW(LocalRound(p_.w_hat, {}, 1, 1, {}, opt, rng), std::domain_error);
  opt.require_expanded = false;
  EXPECT_NO_THROW(LocalRound(w_, RandomBatch(4, rng), 1, 1, {}, opt, rng));
}

TEST_F(LocalRoundTest, IndependentNoiseSurvivesRecoveryAsGaussian) {
  // Signed secrets: R o eta for one client is N(0, sigma^2) entrywise.
  RngStream rng(27);
  MpOptions mp;
  mp.sign_mode = SignMode::kSigned;
  ModelParams zero = w_;
  for (Matrix& m : zero.weights) m.setZero();
  std::vector<double> v;
  while (v.size() < 20000) {
    const Perturbed p = MpServer(zero, rng, 1, mp);
    const auto f = SignedTrainableFactors(p.secret);
    // First layer: one column, so every factor is a distinct r_i.
    const Matrix eta = DrawIndependentNoise({f[0].rows(), 1}, 1.3, rng);
    for (int i = 0; i < eta.rows(); ++i) v.push_back(f[0](i, 0) * eta(i, 0));
  }
  EXPECT_TRUE(NormalityTest(v, 1.3).Passes());
}

}  // namespace
}  // namespace bppfl
