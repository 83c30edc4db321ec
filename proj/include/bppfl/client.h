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

#ifndef BPPFL_CLIENT_H_
#define BPPFL_CLIENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bppfl/nn.h"
#include "bppfl/rng.h"

namespace bppfl {

using Shape = std::pair<int, int>;  // (rows, cols)

struct ClientBundle {
  int client_id = 0;
  uint64_t round = 0;
  GradBundle bundle;
};

enum class NoiseKind {
  kDn,        // DN(sigma, 1) entries; products with R are Gaussian.
  kGaussian,  // Plain N(0, sigma^2) entries.
};

// Matrix of i.i.d. DN(sigma_eta, 1) draws, filled column-major. All zeros
// when sigma_eta == 0.
Matrix DrawIndependentNoise(Shape shape, double sigma_eta, RngStream& rng,
                            NoiseKind kind = NoiseKind::kDn);
std::vector<Matrix> DrawIndependentNoise(const std::vector<Shape>& shapes,
                                         double sigma_eta, RngStream& rng,
                                         NoiseKind kind = NoiseKind::kDn);

// Pairwise noise Delta_{k,v}. Both endpoints regenerate the same matrices from
// (shared_seed, round, {k, v}); the lower id keeps them, the higher id
// negates them. `skip_negation` is a fault-injection switch for tests.
std::vector<Matrix> DrawPairwiseNoise(int k, int v, uint64_t round,
                                      uint64_t shared_seed, double sigma_delta,
                                      const std::vector<Shape>& shapes,
                                      bool skip_negation = false);

struct Neighbor {
  int id = 0;
  uint64_t shared_seed = 0;
};

struct ClientOptions {
  std::optional<double> clip_threshold = 1.0;
  double sigma_eta = 0.0;
  double sigma_delta = 0.0;
  NoiseKind noise_kind = NoiseKind::kDn;
  // The naive baseline trains on an L-layer perturbed model.
  bool require_expanded = true;
  bool break_antisymmetry = false;
};

struct LocalRoundResult {
  ClientBundle bundle;
  // Clipped bundle before any noise; kept for telemetry and tests only.
  GradBundle clean;
  std::vector<std::string> warnings;
};

// Batch gradients and corrections on the perturbed model, clipped when a
// threshold is set.
GradBundle ComputeLocalGradients(const ModelParams& w_hat,
                                 const std::vector<Sample>& dataset,
                                 const ClientOptions& options);

// Adds independent and pairwise noise to the gradients of `clean`.
// Appends to `warnings` when pairwise noise is requested without neighbors.
GradBundle AddClientNoise(const GradBundle& clean, int client_id,
                          uint64_t round,
                          const std::vector<Neighbor>& neighbors,
                          const ClientOptions& options, RngStream& rng,
                          std::vector<std::string>* warnings = nullptr);

// Local gradients on the perturbed model, clipping, then independent and
// pairwise noise on the gradients. psi and phi are sent unmodified.
// `rng` supplies the independent noise.
LocalRoundResult LocalRound(const ModelParams& w_hat,
                            const std::vector<Sample>& dataset, int client_id,
                            uint64_t round,
                            const std::vector<Neighbor>& neighbors,
                            const ClientOptions& options, RngStream& rng);

std::vector<Shape> TrainableShapes(const ModelParams& params);

}  // namespace bppfl

#endif  // BPPFL_CLIENT_H_
