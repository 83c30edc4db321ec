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
#include <stdexcept>

#include "bppfl/dist.h"

namespace bppfl {

Matrix DrawIndependentNoise(Shape shape, double sigma_eta, RngStream& rng,
                            NoiseKind kind) {
  if (sigma_eta < 0.0) throw std::domain_error("sigma_eta must be >= 0");
  Matrix m = Matrix::Zero(shape.first, shape.second);
  if (sigma_eta == 0.0) return m;
  const DnSpec spec{sigma_eta, 1};
  for (int j = 0; j < m.cols(); ++j) {
    for (int i = 0; i < m.rows(); ++i) {
      m(i, j) = kind == NoiseKind::kDn ? SampleDn(spec, rng)
                                       : sigma_eta * rng.StandardNormal();
    }
  }
  return m;
}

std::vector<Matrix> DrawIndependentNoise(const std::vector<Shape>& shapes,
                                         double sigma_eta, RngStream& rng,
                                         NoiseKind kind) {
  std::vector<Matrix> out;
  out.reserve(shapes.size());
  for (const Shape& s : shapes) {
    out.push_back(DrawIndependentNoise(s, sigma_eta, rng, kind));
  }
  return out;
}

std::vector<Matrix> DrawPairwiseNoise(int k, int v, uint64_t round,
                                      uint64_t shared_seed, double sigma_delta,
                                      const std::vector<Shape>& shapes,
                                      bool skip_negation) {
  if (k == v) throw std::domain_error("pairwise noise needs two parties");
  if (sigma_delta < 0.0) throw std::domain_error("sigma_delta must be >= 0");
  const int lo = std::min(k, v);
  const int hi = std::max(k, v);
  RngStream rng(shared_seed,
                {PurposeTag(Purpose::kPairwiseNoise), round,
                 static_cast<uint64_t>(static_cast<int64_t>(lo)),
                 static_cast<uint64_t>(static_cast<int64_t>(hi))});
  std::vector<Matrix> out = DrawIndependentNoise(shapes, sigma_delta, rng);
  if (k == hi && !skip_negation) {
    for (Matrix& m : out) m = -m;
  }
  return out;
}

std::vector<Shape> TrainableShapes(const ModelParams& params) {
  std::vector<Shape> shapes;
  for (int i : params.TrainableLayers()) {
    shapes.emplace_back(static_cast<int>(params.weights[i].rows()),
                        static_cast<int>(params.weights[i].cols()));
  }
  return shapes;
}

GradBundle ComputeLocalGradients(const ModelParams& w_hat,
                                 const std::vector<Sample>& dataset,
                                 const ClientOptions& options) {
  if (options.require_expanded && !w_hat.expanded &&
      w_hat.num_original_layers() > 1) {
    throw std::domain_error("local round expects an expanded model");
  }
  if (dataset.empty()) throw std::domain_error("client dataset is empty");
  GradBundle g = BatchGradients(w_hat, dataset);
  if (options.clip_threshold.has_value()) {
    g = ClipBundle(g, *options.clip_threshold);
  }
  return g;
}

GradBundle AddClientNoise(const GradBundle& clean, int client_id,
                          uint64_t round,
                          const std::vector<Neighbor>& neighbors,
                          const ClientOptions& options, RngStream& rng,
                          std::vector<std::string>* warnings) {
  GradBundle g = clean;
  std::vector<Shape> shapes;
  for (const Matrix& m : g.grads) {
    shapes.emplace_back(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  }
  const std::vector<Matrix> eta =
      DrawIndependentNoise(shapes, options.sigma_eta, rng, options.noise_kind);
  for (size_t t = 0; t < g.grads.size(); ++t) g.grads[t] += eta[t];

  if (options.sigma_delta > 0.0) {
    if (neighbors.empty() && warnings != nullptr) {
      warnings->push_back("client " + std::to_string(client_id) +
                          " has no neighbors; no pairwise noise added");
    }
    std::vector<Neighbor> sorted = neighbors;
    std::sort(sorted.begin(), sorted.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
    for (const Neighbor& nb : sorted) {
      const std::vector<Matrix> delta =
          DrawPairwiseNoise(client_id, nb.id, round, nb.shared_seed,
                            options.sigma_delta, shapes,
                            options.break_antisymmetry);
      for (size_t t = 0; t < g.grads.size(); ++t) g.grads[t] += delta[t];
    }
  }
  return g;
}

LocalRoundResult LocalRound(const ModelParams& w_hat,
                            const std::vector<Sample>& dataset, int client_id,
                            uint64_t round,
                            const std::vector<Neighbor>& neighbors,
                            const ClientOptions& options, RngStream& rng) {
  LocalRoundResult res;
  res.clean = ComputeLocalGradients(w_hat, dataset, options);
  res.bundle =
      ClientBundle{client_id, round,
                   AddClientNoise(res.clean, client_id, round, neighbors,
                                  options, rng, &res.warnings)};
  return res;
}

}  // namespace bppfl
