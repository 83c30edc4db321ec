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

#ifndef BPPFL_SERIALIZE_H_
#define BPPFL_SERIALIZE_H_

#include <string>

#include "json.hpp"

#include "bppfl/client.h"
#include "bppfl/nn.h"
#include "bppfl/server.h"
#include "bppfl/topology.h"

namespace bppfl {

// Matrices are {"rows": r, "cols": c, "data": [row-major values]}.
nlohmann::json MatrixToJson(const Matrix& m);
Matrix MatrixFromJson(const nlohmann::json& j);

// {"format": "bppfl-model", "version": 1, "layer_dims": [...],
//  "expanded": bool, "weights": [matrix...], "gate_polarity": [[...]...]}
nlohmann::json ModelToJson(const ModelParams& p);
ModelParams ModelFromJson(const nlohmann::json& j);
void SaveModel(const ModelParams& p, const std::string& path);
ModelParams LoadModel(const std::string& path);

// {"client_id", "round", "grads": [matrix...], "psi": [[matrix...]...],
//  "phi": [matrix...]}. Noises are never part of a bundle.
nlohmann::json BundleToJson(const ClientBundle& b);
ClientBundle BundleFromJson(const nlohmann::json& j);

// Edge list {"mode", "n", "nodes": [...], "edges": [[a, b]...]}.
nlohmann::json GraphToJson(const GraphTopology& g);

// Debug-only dump of a secret, for test fixtures.
nlohmann::json SecretToJson(const PerturbationSecret& s);

}  // namespace bppfl

#endif  // BPPFL_SERIALIZE_H_
