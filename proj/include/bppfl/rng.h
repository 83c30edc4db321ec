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

#ifndef BPPFL_RNG_H_
#define BPPFL_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace bppfl {

// Stream purposes. Used as the last element of a stream path so that two
// consumers in the same (round, party) never share a sequence.
enum class Purpose : uint64_t {
  kModelInit = 1,
  kSecret = 2,
  kClientSampling = 3,
  kTopology = 4,
  kIndependentNoise = 5,
  kPairwiseNoise = 6,
  kCentralNoise = 7,
  kData = 8,
  kPartition = 9,
  kStatistics = 10,
};

inline constexpr uint64_t PurposeTag(Purpose p) {
  return static_cast<uint64_t>(p);
}

// SplitMix64 finalizer.
uint64_t Mix64(uint64_t x);

// Folds a hierarchical path into a 64-bit seed. Order-sensitive.
uint64_t DeriveSeed(uint64_t seed, std::span<const uint64_t> path);
uint64_t DeriveSeed(uint64_t seed, std::initializer_list<uint64_t> path);

// A deterministic random stream identified by (seed, path). Two streams built
// from the same (seed, path) produce bit-identical sequences. Not thread-safe;
// each worker owns its streams.
class RngStream {
 public:
  using result_type = std::mt19937_64::result_type;

  RngStream(uint64_t seed, std::initializer_list<uint64_t> path);
  RngStream(uint64_t seed, std::span<const uint64_t> path);
  explicit RngStream(uint64_t seed) : RngStream(seed, {}) {}

  // Independent sub-stream keyed by `tag` under this stream's path.
  RngStream Child(uint64_t tag) const;
  RngStream Child(Purpose p) const { return Child(PurposeTag(p)); }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double Uniform();
  // Uniform integer in [0, bound).
  uint64_t UniformInt(uint64_t bound);
  double StandardNormal();

  uint64_t seed() const { return seed_; }
  const std::vector<uint64_t>& path() const { return path_; }

 private:
  uint64_t seed_;
  std::vector<uint64_t> path_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace bppfl

#endif  // BPPFL_RNG_H_
