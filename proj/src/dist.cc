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
#include <random>
#include <stdexcept>
#include <string>

namespace bppfl {
namespace {

double ClampLog(double log_mag, uint64_t* clamp_events) {
  if (log_mag > kMaxLogMagnitude || log_mag < -kMaxLogMagnitude) {
    if (clamp_events != nullptr) ++*clamp_events;
    return std::clamp(log_mag, -kMaxLogMagnitude, kMaxLogMagnitude);
  }
  return log_mag;
}

// sum_{l > n} [1/(2l+1) - ln(1 + 1/l)/2] = (ln(n+1) - psi(n + 3/2)) / 2,
// with psi from its asymptotic expansion. Accurate to ~1e-15 for n >= 16.
double SeriesRemainder(double n) {
  const double x = n + 1.5;
  const double x2 = x * x;
  const double psi_tail = 1.0 / (2.0 * x) + 1.0 / (12.0 * x2) -
                          1.0 / (120.0 * x2 * x2) +
                          1.0 / (252.0 * x2 * x2 * x2);
  // ln(n+1) - ln(n+1.5) written without cancellation.
  return 0.5 * (-std::log1p(0.5 / (n + 1.0)) + psi_tail);
}

}  // namespace

double SampleGammaAnyShape(double shape, RngStream& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw std::domain_error("gamma shape must be positive and finite, got " +
                            std::to_string(shape));
  }
  if (shape == 1.0) return -std::log(rng.Uniform());
  if (shape < 1.0) {
    std::gamma_distribution<double> boosted(shape + 1.0, 1.0);
    const double g = boosted(rng);
    return g * std::exp(std::log(rng.Uniform()) / shape);
  }
  std::gamma_distribution<double> gamma(shape, 1.0);
  return gamma(rng);
}

double SampleSeriesGamma(double shape, RngStream& rng) {
  if (shape == 0.5) {
    // Gamma(1/2, 1) is half a squared standard normal.
    const double z = rng.StandardNormal();
    return 0.5 * z * z;
  }
  return SampleGammaAnyShape(shape, rng);
}

double SampleGamma(double shape, RngStream& rng) {
  if (!(shape > 0.0 && shape <= 1.0)) {
    throw std::domain_error("SampleGamma requires 0 < shape <= 1, got " +
                            std::to_string(shape));
  }
  return SampleGammaAnyShape(shape, rng);
}

int SampleRademacher(RngStream& rng) { return (rng() >> 63) ? 1 : -1; }

void DnStarSpec::Validate() const {
  if (m < 1) throw std::domain_error("DN*: m must be >= 1");
  if (truncation_len < 1) {
    throw std::domain_error("DN*: truncation_len must be >= 1");
  }
  if (exact_terms < 0) throw std::domain_error("DN*: exact_terms must be >= 0");
  if (!(block_growth > 1.0)) {
    throw std::domain_error("DN*: block_growth must exceed 1");
  }
  if (tail_horizon < 0) {
    throw std::domain_error("DN*: tail_horizon must be >= 0");
  }
}

void DnSpec::Validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::domain_error("DN: sigma must be positive");
  }
  if (n < 1) throw std::domain_error("DN: n must be >= 1");
}

double DnStarTailExpectation(int m, int64_t truncation_len, int64_t horizon) {
  if (m < 1 || truncation_len < 1) {
    throw std::domain_error("DnStarTailExpectation: invalid m or length");
  }
  // Sum explicitly up to the horizon (at least 16 terms past the cutoff so the
  // asymptotic remainder is accurate), then add the closed-form remainder.
  const int64_t stop = std::max(horizon, truncation_len + 16);
  double sum = 0.0;
  for (int64_t l = stop; l > truncation_len; --l) {
    const double dl = static_cast<double>(l);
    sum += 1.0 / (2.0 * dl + 1.0) - 0.5 * std::log1p(1.0 / dl);
  }
  sum += SeriesRemainder(static_cast<double>(stop));
  return sum / m;
}

DnStarSampler::DnStarSampler(const DnStarSpec& spec) : spec_(spec) {
  spec_.Validate();
  const int64_t len = spec_.truncation_len;
  term_shape_ = 1.0 / spec_.m;

  const int64_t head = std::min(spec_.exact_terms, len);
  head_coeffs_.reserve(static_cast<size_t>(head));
  for (int64_t l = 1; l <= head; ++l) {
    head_coeffs_.push_back(1.0 / (2.0 * static_cast<double>(l) + 1.0));
  }
  // Block boundaries depend only on exact_terms and block_growth; only the
  // last block is cut short by truncation_len.
  int64_t start = head + 1;
  while (start <= len) {
    int64_t end = static_cast<int64_t>(
        std::ceil(static_cast<double>(start) * spec_.block_growth));
    end = std::min(std::max(end, start), len);
    double s1 = 0.0;
    double s2 = 0.0;
    for (int64_t l = start; l <= end; ++l) {
      const double c = 1.0 / (2.0 * static_cast<double>(l) + 1.0);
      s1 += c;
      s2 += c * c;
    }
    // sum_l c_l G_l has mean a*s1 and variance a*s2; Gamma(k, theta) with
    // k*theta = a*s1 and k*theta^2 = a*s2 matches both.
    blocks_.push_back({s2 / s1, term_shape_ * s1 * s1 / s2});
    start = end + 1;
  }

  if (spec_.drop_compensator) {
    log_offset_ = 0.0;
  } else {
    // sum_{l=1}^{L} ln(1 + 1/l) telescopes to ln(L + 1).
    log_offset_ = std::log(static_cast<double>(len) + 1.0) / (2.0 * spec_.m);
    if (spec_.tail_correction) {
      log_offset_ -= DnStarTailExpectation(spec_.m, len, spec_.tail_horizon);
    }
  }
}

SignedDraw DnStarSampler::Draw(RngStream& rng) {
  SignedDraw out;
  out.sign = SampleRademacher(rng);
  double weighted = 0.0;
  for (double c : head_coeffs_) {
    weighted += c * SampleSeriesGamma(term_shape_, rng);
  }
  for (const Block& b : blocks_) {
    weighted += b.scale * SampleSeriesGamma(b.shape, rng);
  }
  out.magnitude =
      std::exp(ClampLog(log_offset_ - weighted, &clamp_events_));
  return out;
}

double SampleDnStar(const DnStarSpec& spec, RngStream& rng) {
  DnStarSampler sampler(spec);
  return sampler(rng);
}

SignedDraw SampleDnDraw(const DnSpec& spec, RngStream& rng,
                        uint64_t* clamp_events) {
  spec.Validate();
  SignedDraw out;
  out.sign = SampleRademacher(rng);
  const double g = SampleGamma(1.0 / spec.n, rng);
  const double log_mag = std::log(std::sqrt(2.0) * spec.sigma) / spec.n - g;
  out.magnitude = std::exp(ClampLog(log_mag, clamp_events));
  return out;
}

double SampleDn(const DnSpec& spec, RngStream& rng, uint64_t* clamp_events) {
  return SampleDnDraw(spec, rng, clamp_events).value();
}

}  // namespace bppfl
