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

#ifndef BPPFL_FEDERATED_H_
#define BPPFL_FEDERATED_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bppfl/config.h"
#include "bppfl/dataset.h"
#include "bppfl/nn.h"
#include "bppfl/rng.h"

namespace bppfl {

struct PhaseTimings {
  double perturb = 0.0;
  double train = 0.0;
  double noise = 0.0;
  double aggregate = 0.0;
  double recover = 0.0;
  double update = 0.0;
};

struct RoundMetrics {
  int round = 0;
  int num_clients = 0;
  double train_loss = 0.0;
  double eval_accuracy = 0.0;
  // Mean square of (recovered aggregate - zero-noise shadow) per entry, and
  // the same divided by sigma_eta^2 / K. Only when sigma_eta > 0.
  std::optional<double> noise_variance;
  std::optional<double> noise_variance_ratio;
  size_t noise_entries = 0;
  PhaseTimings timings;
};

struct RunOptions {
  // Keep every shadow residual entry (recovered minus zero-noise shadow).
  bool collect_residuals = false;
};

struct RunResult {
  Scheme scheme = Scheme::kOurs;
  double sigma_eta = 0.0;
  double sigma_delta = 0.0;
  int clients_per_round = 0;
  std::vector<RoundMetrics> rounds;
  std::vector<std::vector<int>> sampled_clients;
  ModelParams initial_model;
  ModelParams final_model;
  double final_loss = 0.0;
  double final_accuracy = 0.0;
  std::vector<double> residuals;
  uint64_t clamp_events = 0;
  std::vector<std::string> warnings;
};

// Uniform K-subset of client ids 1..N, sorted.
std::vector<int> SampleClients(int num_clients, int k, RngStream& rng);

FederatedData LoadRunData(const RunConfig& cfg);

// Runs the configured scheme for cfg.train.rounds rounds. `data` defaults to
// LoadRunData(cfg). Writes output files when cfg.out_dir is set.
RunResult RunFederated(const RunConfig& cfg,
                       const FederatedData* data = nullptr,
                       const RunOptions& options = {});

nlohmann::json RoundMetricsToJson(const RoundMetrics& m);

// metrics.ndjson, summary.csv, timings.csv, config.json, final_model.json.
void WriteRunOutputs(const RunConfig& cfg, const RunResult& result);

}  // namespace bppfl

#endif  // BPPFL_FEDERATED_H_
