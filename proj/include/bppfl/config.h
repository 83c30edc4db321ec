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

#ifndef BPPFL_CONFIG_H_
#define BPPFL_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bppfl/dataset.h"
#include "bppfl/dist.h"
#include "bppfl/server.h"
#include "bppfl/topology.h"

namespace bppfl {

enum class Scheme { kOurs, kFedAvg, kMpCdp, kMpDpNaive };

const char* SchemeName(Scheme s);
Scheme ParseScheme(const std::string& name);

struct TrainConfig {
  int rounds = 300;
  int num_clients = 100;         // N
  double client_fraction = 0.5;  // rho
  double learning_rate = 0.1;
  std::optional<double> clip_threshold = 1.0;
  GraphMode graph_mode = GraphMode::kComplete;
  int graph_n = 0;
  uint64_t master_seed = 1;

  // K = round(rho N), at least 1.
  int clients_per_round() const;
};

struct PrivacyConfig {
  // Either a budget (epsilon, delta) solved into sigmas, or explicit sigmas.
  // Explicit sigma_eta in JSON drops the default epsilon.
  std::optional<double> epsilon = 1.0;
  double delta = 1e-5;
  double sigma_ratio = 10.0;
  std::optional<double> sigma_eta;
  std::optional<double> sigma_delta;
};

struct RunConfig {
  Scheme scheme = Scheme::kOurs;
  std::vector<int> dims = {20, 16, 8, 2};
  double init_gain = 1.0;
  std::string dataset_source = "synthetic";  // "synthetic" or "csv"
  SyntheticSpec synthetic;
  CsvSpec csv;
  TrainConfig train;
  PrivacyConfig privacy;
  SignMode sign_mode = SignMode::kMagnitude;
  DnStarSpec dn_star;
  std::string out_dir;  // Empty: no files written.
  bool write_transcript = false;
  bool unsafe_dump_secrets = false;
  bool shadow_telemetry = true;
  bool break_antisymmetry = false;

  // Throws std::invalid_argument on inconsistent settings.
  void Validate() const;
};

// Noise scales after resolving the privacy block for the run's scheme and
// regime. fedavg always gets zeros; mp_cdp and mp_dp_naive ignore
// sigma_delta.
struct ResolvedNoise {
  double sigma_eta = 0.0;
  double sigma_delta = 0.0;
};
ResolvedNoise ResolveNoise(const RunConfig& cfg);

RunConfig RunConfigFromJson(const nlohmann::json& j);
nlohmann::json RunConfigToJson(const RunConfig& cfg);
RunConfig LoadRunConfig(const std::string& path);

}  // namespace bppfl

#endif  // BPPFL_CONFIG_H_
