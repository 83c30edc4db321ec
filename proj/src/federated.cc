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

#include "bppfl/federated.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "bppfl/client.h"
#include "bppfl/serialize.h"
#include "bppfl/server.h"
#include "bppfl/topology.h"

namespace bppfl {
namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double Since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> LayerNorms(const std::vector<Matrix>& ms) {
  std::vector<double> out;
  for (const Matrix& m : ms) out.push_back(m.norm());
  return out;
}

RoundAggregate PlainMean(const std::vector<std::vector<Matrix>>& per_client,
                         uint64_t round) {
  RoundAggregate agg;
  agg.round = round;
  agg.mean.grads = per_client.front();
  for (size_t k = 1; k < per_client.size(); ++k) {
    for (size_t t = 0; t < agg.mean.grads.size(); ++t) {
      agg.mean.grads[t] += per_client[k][t];
    }
  }
  const double inv = 1.0 / static_cast<double>(per_client.size());
  for (Matrix& m : agg.mean.grads) m *= inv;
  return agg;
}

void RecordResidual(const std::vector<Matrix>& noisy,
                    const std::vector<Matrix>& shadow, double sigma_eta, int k,
                    RoundMetrics& m, std::vector<double>* sink) {
  double sum_sq = 0.0;
  size_t n = 0;
  for (size_t t = 0; t < noisy.size(); ++t) {
    const Matrix diff = noisy[t] - shadow[t];
    for (int j = 0; j < diff.cols(); ++j) {
      for (int i = 0; i < diff.rows(); ++i) {
        sum_sq += diff(i, j) * diff(i, j);
        if (sink != nullptr) sink->push_back(diff(i, j));
      }
    }
    n += static_cast<size_t>(diff.size());
  }
  m.noise_entries = n;
  if (sigma_eta > 0.0 && n > 0) {
    m.noise_variance = sum_sq / static_cast<double>(n);
    m.noise_variance_ratio = *m.noise_variance / (sigma_eta * sigma_eta / k);
  }
}

}  // namespace

std::vector<int> SampleClients(int num_clients, int k, RngStream& rng) {
  if (k < 1 || k > num_clients) {
    throw std::domain_error("cannot sample " + std::to_string(k) + " of " +
                            std::to_string(num_clients) + " clients");
  }
  std::vector<int> ids(num_clients);
  std::iota(ids.begin(), ids.end(), 1);
  for (int s = 0; s < k; ++s) {
    const size_t pick =
        s + static_cast<size_t>(rng.UniformInt(static_cast<uint64_t>(num_clients - s)));
    std::swap(ids[s], ids[pick]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

FederatedData LoadRunData(const RunConfig& cfg) {
  const uint64_t seed = cfg.train.master_seed;
  if (cfg.dataset_source == "csv") {
    return LoadCsv(cfg.csv, cfg.train.num_clients, seed);
  }
  SyntheticSpec spec = cfg.synthetic;
  spec.num_features = cfg.dims.front();
  spec.num_classes = cfg.dims.back();
  return MakeSynthetic(spec, cfg.train.num_clients, seed);
}

RunResult RunFederated(const RunConfig& cfg, const FederatedData* data,
                       const RunOptions& options) {
  cfg.Validate();
  FederatedData owned;
  if (data == nullptr) {
    owned = LoadRunData(cfg);
    data = &owned;
  }
  if (data->num_features != cfg.dims.front() ||
      data->num_classes != cfg.dims.back()) {
    throw std::invalid_argument("dataset shape does not match model dims");
  }
  if (static_cast<int>(data->clients.size()) != cfg.train.num_clients) {
    throw std::invalid_argument("dataset is split for a different N");
  }

  const uint64_t master = cfg.train.master_seed;
  const ResolvedNoise noise = ResolveNoise(cfg);
  const int k = cfg.train.clients_per_round();
  const std::vector<Sample> all_train = data->AllTraining();

  RunResult res;
  res.scheme = cfg.scheme;
  res.sigma_eta = noise.sigma_eta;
  res.sigma_delta = noise.sigma_delta;
  res.clients_per_round = k;
  RngStream init_rng(master, {PurposeTag(Purpose::kModelInit)});
  res.initial_model = InitModel(cfg.dims, init_rng, cfg.init_gain);
  ModelParams w = res.initial_model;

  MpOptions mp;
  mp.sign_mode = cfg.sign_mode;
  mp.dn_star = cfg.dn_star;

  ClientOptions copt;
  copt.clip_threshold = cfg.train.clip_threshold;
  copt.sigma_eta = noise.sigma_eta;
  copt.sigma_delta = noise.sigma_delta;
  copt.break_antisymmetry = cfg.break_antisymmetry;
  switch (cfg.scheme) {
    case Scheme::kMpCdp:
      copt.sigma_eta = 0.0;
      copt.sigma_delta = 0.0;
      break;
    case Scheme::kMpDpNaive:
      copt.noise_kind = NoiseKind::kGaussian;
      copt.sigma_delta = 0.0;
      copt.require_expanded = false;
      break;
    default:
      break;
  }

  std::ofstream transcript;
  if (!cfg.out_dir.empty() && cfg.write_transcript) {
    std::filesystem::create_directories(cfg.out_dir);
    transcript.open(std::filesystem::path(cfg.out_dir) / "transcript.ndjson");
  }

  for (int t = 1; t <= cfg.train.rounds; ++t) {
    const uint64_t round = static_cast<uint64_t>(t);
    RoundMetrics m;
    m.round = t;
    m.num_clients = k;
    RngStream sampler(master, {PurposeTag(Purpose::kClientSampling), round});
    const std::vector<int> ids = SampleClients(cfg.train.num_clients, k, sampler);
    res.sampled_clients.push_back(ids);
    json tr = {{"round", t}, {"clients", ids}};

    std::vector<Matrix> update;
    if (cfg.scheme == Scheme::kFedAvg) {
      auto t0 = Clock::now();
      std::vector<std::vector<Matrix>> per_client;
      for (int id : ids) {
        per_client.push_back(PlainBatchGradients(w, data->clients[id - 1]));
      }
      m.timings.train = Since(t0);
      t0 = Clock::now();
      update = PlainMean(per_client, round).mean.grads;
      m.timings.aggregate = Since(t0);
      tr["aggregate_norms"] = LayerNorms(update);
    } else {
      auto t0 = Clock::now();
      RngStream secret_rng(master, {PurposeTag(Purpose::kSecret), round});
      const Perturbed p = cfg.scheme == Scheme::kMpDpNaive
                              ? PerturbOriginal(w, secret_rng, round, mp)
                              : MpServer(w, secret_rng, round, mp);
      m.timings.perturb = Since(t0);
      res.clamp_events += p.secret.clamp_events;

      GraphTopology graph;
      std::map<Edge, uint64_t> seeds;
      if (cfg.scheme == Scheme::kOurs && k >= 2) {
        RngStream topo_rng(master, {PurposeTag(Purpose::kTopology), round});
        graph = cfg.train.graph_mode == GraphMode::kComplete
                    ? BuildComplete(ids)
                    : BuildRandomNOut(ids, cfg.train.graph_n, topo_rng);
        seeds = PairwiseSeeds(graph, round, master);
        tr["graph_edges"] = graph.edges.size();
      }

      std::vector<ClientBundle> noisy;
      std::vector<ClientBundle> clean;
      for (int id : ids) {
        t0 = Clock::now();
        GradBundle g = ComputeLocalGradients(p.w_hat, data->clients[id - 1], copt);
        m.timings.train += Since(t0);
        t0 = Clock::now();
        std::vector<Neighbor> nbrs;
        for (int v : graph.Neighbors(id)) {
          nbrs.push_back({v, seeds.at(MakeEdge(id, v))});
        }
        RngStream eta_rng(master, {PurposeTag(Purpose::kIndependentNoise),
                                   round, static_cast<uint64_t>(id)});
        GradBundle sent =
            AddClientNoise(g, id, round, nbrs, copt, eta_rng, &res.warnings);
        m.timings.noise += Since(t0);
        noisy.push_back({id, round, std::move(sent)});
        if (cfg.shadow_telemetry) clean.push_back({id, round, std::move(g)});
      }

      t0 = Clock::now();
      const RoundAggregate agg = Aggregate(noisy);
      m.timings.aggregate = Since(t0);
      t0 = Clock::now();
      update = RecoverAggregate(agg, p.secret);
      std::vector<Matrix> shadow;
      if (cfg.shadow_telemetry) {
        shadow = RecoverAggregate(Aggregate(clean), p.secret);
      }
      if (cfg.scheme == Scheme::kMpCdp) {
        RngStream central(master, {PurposeTag(Purpose::kCentralNoise), round});
        AddCentralNoise(update, noise.sigma_eta / std::sqrt(static_cast<double>(k)),
                        central);
      }
      m.timings.recover = Since(t0);
      if (cfg.shadow_telemetry) {
        RecordResidual(update, shadow, noise.sigma_eta, k, m,
                       options.collect_residuals ? &res.residuals : nullptr);
      }
      tr["perturbed_norms"] = LayerNorms(p.w_hat.weights);
      tr["aggregate_norms"] = LayerNorms(agg.mean.grads);
      tr["recovered_norms"] = LayerNorms(update);
      if (cfg.unsafe_dump_secrets) tr["secret"] = SecretToJson(p.secret);
    }

    auto t0 = Clock::now();
    w = MuServer(w, update, cfg.train.learning_rate);
    m.timings.update = Since(t0);
    m.train_loss = MeanLoss(w, all_train);
    m.eval_accuracy = Accuracy(w, data->eval);
    res.rounds.push_back(m);
    if (transcript.is_open()) transcript << tr.dump() << "\n";
  }

  res.final_model = w;
  res.final_loss = MeanLoss(w, all_train);
  res.final_accuracy = Accuracy(w, data->eval);
  if (!cfg.out_dir.empty()) WriteRunOutputs(cfg, res);
  return res;
}

json RoundMetricsToJson(const RoundMetrics& m) {
  json j = {{"round", m.round},
            {"clients", m.num_clients},
            {"train_loss", m.train_loss},
            {"eval_accuracy", m.eval_accuracy}};
  if (m.noise_variance) {
    j["noise_variance"] = *m.noise_variance;
    j["noise_variance_ratio"] = *m.noise_variance_ratio;
    j["noise_entries"] = m.noise_entries;
  }
  return j;
}

void WriteRunOutputs(const RunConfig& cfg, const RunResult& r) {
  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "metrics.ndjson");
    for (const RoundMetrics& m : r.rounds) {
      out << RoundMetricsToJson(m).dump() << "\n";
    }
  }
  {
    std::ofstream out(dir / "timings.csv");
    out << "round,perturb_s,train_s,noise_s,aggregate_s,recover_s,update_s\n";
    out << std::setprecision(6);
    for (const RoundMetrics& m : r.rounds) {
      const PhaseTimings& p = m.timings;
      out << m.round << "," << p.perturb << "," << p.train << "," << p.noise
          << "," << p.aggregate << "," << p.recover << "," << p.update << "\n";
    }
  }
  {
    double ratio_sum = 0.0;
    int ratio_n = 0;
    for (const RoundMetrics& m : r.rounds) {
      if (m.noise_variance_ratio) {
        ratio_sum += *m.noise_variance_ratio;
        ++ratio_n;
      }
    }
    std::ofstream out(dir / "summary.csv");
    out << std::setprecision(17);
    out << "scheme,master_seed,rounds,clients_per_round,sigma_eta,sigma_delta,"
           "final_train_loss,final_eval_accuracy,mean_noise_variance_ratio\n";
    out << SchemeName(r.scheme) << "," << cfg.train.master_seed << ","
        << r.rounds.size() << "," << r.clients_per_round << "," << r.sigma_eta
        << "," << r.sigma_delta << "," << r.final_loss << ","
        << r.final_accuracy << ",";
    if (ratio_n > 0) out << ratio_sum / ratio_n;
    out << "\n";
  }
  {
    std::ofstream out(dir / "config.json");
    out << RunConfigToJson(cfg).dump(2) << "\n";
  }
  SaveModel(r.final_model, (dir / "final_model.json").string());
}

}  // namespace bppfl
