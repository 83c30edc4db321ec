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

#ifndef BPPFL_DIST_H_
#define BPPFL_DIST_H_

#include <cstdint>
#include <vector>

#include "bppfl/rng.h"

namespace bppfl {

// Log-magnitudes are clamped to this range before exponentiation.
inline constexpr double kMaxLogMagnitude = 700.0;

// Draws Gamma(shape, 1) for 0 < shape <= 1. Shapes below one use the
// augmentation identity Gamma(a) = Gamma(a + 1) * U^(1/a).
// Throws std::domain_error when shape is outside (0, 1].
double SampleGamma(double shape, RngStream& rng);

// Gamma(shape, 1) for any positive shape. Used internally for block draws.
double SampleGammaAnyShape(double shape, RngStream& rng);

// Gamma draw used inside the DN* series. Shape 1/2 goes through the exact
// identity Gamma(1/2, 1) = Z^2 / 2; other shapes defer to SampleGammaAnyShape.
double SampleSeriesGamma(double shape, RngStream& rng);

// +1 or -1 with probability 1/2 each.
int SampleRademacher(RngStream& rng);

struct DnStarSpec {
  int m = 1;
  // Series cutoff: terms l = 1..truncation_len are sampled.
  int64_t truncation_len = 50000;
  // Subtract the expectation of the omitted terms l > truncation_len.
  bool tail_correction = true;
  // Terms 1..exact_terms are drawn one Gamma(1/m) at a time. Later terms are
  // grouped into blocks [a, ceil(a * block_growth)] whose weighted sum is
  // replaced by one Gamma draw matching the block's mean and variance.
  // exact_terms >= truncation_len reproduces the term-by-term series.
  int64_t exact_terms = 128;
  double block_growth = 1.1;
  // Horizon for the partial summation of the tail expectation; the remainder
  // past the horizon uses the digamma asymptotic series.
  int64_t tail_horizon = 4096;
  // Test fixture: drop the deterministic ln(1 + 1/l) / 2m compensator terms
  // and the tail correction. Produces a visibly wrong distribution.
  bool drop_compensator = false;

  void Validate() const;
};

struct DnSpec {
  double sigma = 1.0;
  int n = 1;

  void Validate() const;
};

struct SignedDraw {
  int sign = 1;
  double magnitude = 0.0;

  double value() const { return sign * magnitude; }
};

// Expectation of the series terms past `truncation_len`:
//   sum_{l > L} [1 / (m (2l + 1)) - ln(1 + 1/l) / (2m)].
double DnStarTailExpectation(int m, int64_t truncation_len, int64_t horizon);

// Sampler for DN*(m). Precomputes the series coefficients and block table
// once; each draw consumes the sign first, then the head terms in order, then
// the blocks in order, so draws with different truncation_len share a prefix.
class DnStarSampler {
 public:
  explicit DnStarSampler(const DnStarSpec& spec);

  SignedDraw Draw(RngStream& rng);
  double operator()(RngStream& rng) { return Draw(rng).value(); }

  const DnStarSpec& spec() const { return spec_; }
  // Number of draws whose log-magnitude hit the clamp.
  uint64_t clamp_events() const { return clamp_events_; }
  // Deterministic part of ln|X|.
  double log_offset() const { return log_offset_; }

 private:
  struct Block {
    double scale;
    double shape;
  };

  DnStarSpec spec_;
  double term_shape_;
  std::vector<double> head_coeffs_;
  std::vector<Block> blocks_;
  double log_offset_;
  uint64_t clamp_events_ = 0;
};

// One-shot DN*(m) draw. Builds a sampler per call; prefer DnStarSampler in
// loops.
double SampleDnStar(const DnStarSpec& spec, RngStream& rng);

// DN(sigma, n) = beta * exp(ln(sqrt(2) sigma) / n - G), G ~ Gamma(1/n, 1).
SignedDraw SampleDnDraw(const DnSpec& spec, RngStream& rng,
                        uint64_t* clamp_events = nullptr);
double SampleDn(const DnSpec& spec, RngStream& rng,
                uint64_t* clamp_events = nullptr);

}  // namespace bppfl

#endif  // BPPFL_DIST_H_
