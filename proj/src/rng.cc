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

#include "bppfl/rng.h"

namespace bppfl {

uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t DeriveSeed(uint64_t seed, std::span<const uint64_t> path) {
  uint64_t h = Mix64(seed);
  for (uint64_t p : path) {
    h = Mix64(h ^ Mix64(p + 0x632be59bd9b4e019ULL));
  }
  return h;
}

uint64_t DeriveSeed(uint64_t seed, std::initializer_list<uint64_t> path) {
  return DeriveSeed(seed, std::span<const uint64_t>(path.begin(), path.size()));
}

RngStream::RngStream(uint64_t seed, std::initializer_list<uint64_t> path)
    : RngStream(seed, std::span<const uint64_t>(path.begin(), path.size())) {}

RngStream::RngStream(uint64_t seed, std::span<const uint64_t> path)
    : seed_(seed),
      path_(path.begin(), path.end()),
      engine_(DeriveSeed(seed, path)) {}

RngStream RngStream::Child(uint64_t tag) const {
  std::vector<uint64_t> p = path_;
  p.push_back(tag);
  return RngStream(seed_, std::span<const uint64_t>(p));
}

double RngStream::Uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

uint64_t RngStream::UniformInt(uint64_t bound) {
  // Lemire-style rejection keeps the result unbiased.
  const uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const uint64_t x = engine_();
    const unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
    if (static_cast<uint64_t>(m) >= threshold) {
      return static_cast<uint64_t>(m >> 64);
    }
  }
}

double RngStream::StandardNormal() { return normal_(engine_); }

}  // namespace bppfl
