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

#ifndef BPPFL_SERVER_H_
#define BPPFL_SERVER_H_

#include <cstdint>
#include <vector>

#include "bppfl/client.h"
#include "bppfl/dist.h"
#include "bppfl/nn.h"
#include "bppfl/rng.h"

namespace bppfl {

// How the signed DN* draws enter the perturbed model.
//   kMagnitude: the model is scaled by |r|, |s|; gates stay ReLU.
//   kSigned: the model is scaled by the signed draws and each hidden neuron
//     gets a gate polarity equal to the sign of its scaling factor.
enum class SignMode { kMagnitude, kSigned };

const char* SignModeName(SignMode mode);

struct MpOptions {
  SignMode sign_mode = SignMode::kMagnitude;
  // Series settings shared by all DN* draws; `m` is overridden per factor.
  DnStarSpec dn_star;
};

struct PerturbationSecret {
  uint64_t round = 0;
  SignMode sign_mode = SignMode::kMagnitude;
  // False for the single-stage L-layer perturbation of the naive baseline.
  bool expanded = true;
  std::vector<int> layer_dims;
  // Raw signed DN* draws r^(1)..r^(L-1) and s^(1)..s^(L-1).
  std::vector<Vector> r_signed;
  std::vector<Vector> s_signed;
  // Factors actually applied to the model (|draws| in magnitude mode).
  std::vector<Vector> r_vecs;
  std::vector<Vector> s_vecs;
  Vector gamma;
  Vector r_a;
  Vector r;  // gamma o r_a
  double upsilon = 0.0;  // r^T r
  // Multiplicative factor for every layer of the perturbed model. Transitional
  // factors are diagonal.
  std::vector<Matrix> layer_factors;
  Matrix additive;  // R^a, added to the last layer.
  // DN* draws whose log-magnitude hit the clamp while drawing this secret.
  uint64_t clamp_events = 0;

  // Factors of the trainable layers, in trainable-layer order.
  std::vector<Matrix> TrainableFactors() const;
};

// Multiplicative factors of the 2L-1 layer model built from r and s.
std::vector<Matrix> ExpandedLayerFactors(const std::vector<int>& dims,
                                         const std::vector<Vector>& r,
                                         const std::vector<Vector>& s);

// Factors built from the signed draws, whatever the sign mode. This is the
// channel the client noise products are taken against.
std::vector<Matrix> SignedTrainableFactors(const PerturbationSecret& secret);

struct Perturbed {
  ModelParams w_hat;
  PerturbationSecret secret;
};

// Expands w_org, draws a fresh secret and perturbs the expanded model.
// Consumes rng in a fixed order: r vectors, s vectors, gamma, r_a.
Perturbed MpServer(const ModelParams& w_org, RngStream& rng, uint64_t round,
                   const MpOptions& options = {});

// Perturbs the L-layer w_org without transitional layers:
// R^(1) = r^(1)_i, R^(l) = r^(l)_i / r^(l-1)_j, R^(L) = 1 / r^(L-1)_j, with
// every r ~ |DN*(1)|. Used by the naive baseline.
Perturbed PerturbOriginal(const ModelParams& w_org, RngStream& rng,
                          uint64_t round, const MpOptions& options = {});

// Applies an existing secret to an L-layer model.
ModelParams ApplyPerturbation(const ModelParams& w_org,
                              const PerturbationSecret& secret);

struct RoundAggregate {
  uint64_t round = 0;
  std::vector<int> client_ids;
  GradBundle mean;
};

// Uniform mean over bundles, summed in ascending client-id order.
RoundAggregate Aggregate(std::vector<ClientBundle> bundles);

// R o (grads - sum_o r_o psi_o + upsilon phi) per trainable layer.
std::vector<Matrix> RecoverBundle(const GradBundle& bundle,
                                  const PerturbationSecret& secret);
// As RecoverBundle, after checking the aggregate belongs to the secret's
// round.
std::vector<Matrix> RecoverAggregate(const RoundAggregate& agg,
                                     const PerturbationSecret& secret);

// W_org^(l) <- W_org^(l) - lr * grad^(l).
ModelParams MuServer(const ModelParams& w_org,
                     const std::vector<Matrix>& grads, double learning_rate);

// Adds i.i.d. N(0, sigma^2) to every entry.
void AddCentralNoise(std::vector<Matrix>& grads, double sigma, RngStream& rng);

struct Explanation {
  ModelParams w_org;
  PerturbationSecret secret;
};

// Given a perturbed expanded model, draws fresh r, gamma, r_a and solves for
// s and an L-layer model that perturb to exactly w_hat. Signs of the fresh
// factors follow the gate polarities of w_hat.
Explanation AlternativeExplanation(const ModelParams& w_hat, RngStream& rng,
                                   uint64_t round,
                                   const MpOptions& options = {});

}  // namespace bppfl

#endif  // BPPFL_SERVER_H_
