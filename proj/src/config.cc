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

#include "bppfl/config.h"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "bppfl/privacy.h"

namespace bppfl {
namespace {

using nlohmann::json;

void CheckKeys(const json& j, const std::string& where,
               const std::set<std::string>& allowed) {
  if (!j.is_object()) {
    throw std::invalid_argument(where + " must be a JSON object");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw std::invalid_argument("unknown key '" + it.key() + "' in " +
                                  where);
    }
  }
}

template <typename T>
void Read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void ReadOptional(const json& j, const char* key, std::optional<double>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
  } else {
    out = j.at(key).get<double>();
  }
}

json OptionalToJson(const std::optional<double>& v) {
  return v.has_value() ? json(*v) : json(nullptr);
}

}  // namespace

const char* SchemeName(Scheme s) {
  switch (s) {
    case Scheme::kOurs:
      return "ours";
    case Scheme::kFedAvg:
      return "fedavg";
    case Scheme::kMpCdp:
      return "mp_cdp";
    case Scheme::kMpDpNaive:
      return "mp_dp_naive";
  }
  return "unknown";
}

Scheme ParseScheme(const std::string& name) {
  if (name == "ours") return Scheme::kOurs;
  if (name == "fedavg") return Scheme::kFedAvg;
  if (name == "mp_cdp") return Scheme::kMpCdp;
  if (name == "mp_dp_naive") return Scheme::kMpDpNaive;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

int TrainConfig::clients_per_round() const {
  return std::max(1, static_cast<int>(std::lround(client_fraction *
                                                  num_clients)));
}

void RunConfig::Validate() const {
  if (dims.size() < 2) throw std::invalid_argument("model needs >= 2 dims");
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("model dims must be positive");
  }
  if (train.rounds < 0) throw std::invalid_argument("rounds must be >= 0");
  if (train.num_clients < 1) {
    throw std::invalid_argument("num_clients must be >= 1");
  }
  if (!(train.client_fraction > 0.0 && train.client_fraction <= 1.0)) {
    throw std::invalid_argument("client_fraction must lie in (0, 1]");
  }
  if (!(train.learning_rate >= 0.0)) {
    throw std::invalid_argument("learning_rate must be >= 0");
  }
  if (train.clip_threshold.has_value() && !(*train.clip_threshold > 0.0)) {
    throw std::invalid_argument("clip_threshold must be positive or null");
  }
  const int k = train.clients_per_round();
  if (train.graph_mode == GraphMode::kRandomNOut &&
      (train.graph_n < 1 || train.graph_n > k - 1)) {
    throw std::invalid_argument("graph n must lie in [1, K-1] with K=" +
                                std::to_string(k));
  }
  if (dataset_source != "synthetic" && dataset_source != "csv") {
    throw std::invalid_argument("dataset source must be synthetic or csv");
  }
  if (dataset_source == "csv" && csv.path.empty()) {
    throw std::invalid_argument("csv dataset needs a path");
  }
  const bool budget = privacy.epsilon.has_value();
  const bool explicit_sigma = privacy.sigma_eta.has_value();
  if (budget && explicit_sigma) {
    throw std::invalid_argument(
        "give either epsilon or explicit sigmas, not both");
  }
  if (explicit_sigma && *privacy.sigma_eta < 0.0) {
    throw std::invalid_argument("sigma_eta must be >= 0");
  }
  if (privacy.sigma_delta.has_value() && *privacy.sigma_delta < 0.0) {
    throw std::invalid_argument("sigma_delta must be >= 0");
  }
  if (!budget && !explicit_sigma && privacy.sigma_delta.has_value()) {
    throw std::invalid_argument("sigma_delta given without sigma_eta");
  }
  if (budget && !(*privacy.epsilon > 0.0)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  if (!(privacy.delta > 0.0 && privacy.delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
  try {
    dn_star.Validate();
  } catch (const std::domain_error& e) {
    throw std::invalid_argument(e.what());
  }
  // Surfaces budget errors (e.g. n too small for the n-out bound) at load.
  (void)ResolveNoise(*this);
}

ResolvedNoise ResolveNoise(const RunConfig& cfg) {
  ResolvedNoise out;
  if (cfg.scheme == Scheme::kFedAvg) return out;
  if (cfg.privacy.epsilon.has_value()) {
    PrivacyRegime regime{cfg.train.graph_mode, cfg.train.clients_per_round(),
                         cfg.train.graph_n};
    SigmaPair s;
    try {
      s = SolveSigmas(*cfg.privacy.epsilon, cfg.privacy.delta, regime,
                      cfg.privacy.sigma_ratio);
    } catch (const std::domain_error& e) {
      throw std::invalid_argument(std::string("privacy budget: ") + e.what());
    }
    out.sigma_eta = s.sigma_eta;
    out.sigma_delta = s.sigma_delta;
  } else {
    out.sigma_eta = cfg.privacy.sigma_eta.value_or(0.0);
    out.sigma_delta = cfg.privacy.sigma_delta.value_or(0.0);
  }
  if (cfg.scheme != Scheme::kOurs) out.sigma_delta = 0.0;
  return out;
}

RunConfig RunConfigFromJson(const json& j) {
  CheckKeys(j, "config",
            {"scheme", "model", "dataset", "train", "privacy", "perturbation",
             "output", "telemetry"});
  RunConfig c;
  if (j.contains("scheme")) c.scheme = ParseScheme(j.at("scheme"));
  if (j.contains("model")) {
    const json& m = j.at("model");
    CheckKeys(m, "model", {"dims", "init_gain"});
    Read(m, "dims", c.dims);
    Read(m, "init_gain", c.init_gain);
  }
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    CheckKeys(d, "dataset",
              {"source", "num_samples", "num_eval", "separation", "path",
               "label_column", "eval_fraction", "num_classes"});
    Read(d, "source", c.dataset_source);
    Read(d, "num_samples", c.synthetic.num_samples);
    Read(d, "num_eval", c.synthetic.num_eval);
    Read(d, "separation", c.synthetic.separation);
    Read(d, "path", c.csv.path);
    Read(d, "label_column", c.csv.label_column);
    Read(d, "eval_fraction", c.csv.eval_fraction);
    Read(d, "num_classes", c.csv.num_classes);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    CheckKeys(t, "train",
              {"rounds", "num_clients", "client_fraction", "learning_rate",
               "clip_threshold", "graph", "master_seed"});
    Read(t, "rounds", c.train.rounds);
    Read(t, "num_clients", c.train.num_clients);
    Read(t, "client_fraction", c.train.client_fraction);
    Read(t, "learning_rate", c.train.learning_rate);
    ReadOptional(t, "clip_threshold", c.train.clip_threshold);
    Read(t, "master_seed", c.train.master_seed);
    if (t.contains("graph")) {
      const json& g = t.at("graph");
      CheckKeys(g, "train.graph", {"mode", "n"});
      const std::string mode = g.value("mode", "complete");
      if (mode == "complete") {
        c.train.graph_mode = GraphMode::kComplete;
      } else if (mode == "random_n_out") {
        c.train.graph_mode = GraphMode::kRandomNOut;
      } else {
        throw std::invalid_argument("unknown graph mode '" + mode + "'");
      }
      Read(g, "n", c.train.graph_n);
    }
  }
  if (j.contains("privacy")) {
    const json& p = j.at("privacy");
    CheckKeys(p, "privacy",
              {"epsilon", "delta", "sigma_ratio", "sigma_eta", "sigma_delta"});
    ReadOptional(p, "epsilon", c.privacy.epsilon);
    Read(p, "delta", c.privacy.delta);
    Read(p, "sigma_ratio", c.privacy.sigma_ratio);
    ReadOptional(p, "sigma_eta", c.privacy.sigma_eta);
    ReadOptional(p, "sigma_delta", c.privacy.sigma_delta);
    // Explicit sigmas replace the default budget unless epsilon is also set.
    if (c.privacy.sigma_eta.has_value() && !p.contains("epsilon")) {
      c.privacy.epsilon.reset();
    }
  }
  if (j.contains("perturbation")) {
    const json& p = j.at("perturbation");
    CheckKeys(p, "perturbation",
              {"sign_mode", "truncation_len", "tail_correction", "exact_terms",
               "block_growth", "tail_horizon"});
    const std::string mode = p.value("sign_mode", "magnitude");
    if (mode == "magnitude") {
      c.sign_mode = SignMode::kMagnitude;
    } else if (mode == "signed") {
      c.sign_mode = SignMode::kSigned;
    } else {
      throw std::invalid_argument("unknown sign mode '" + mode + "'");
    }
    Read(p, "truncation_len", c.dn_star.truncation_len);
    Read(p, "tail_correction", c.dn_star.tail_correction);
    Read(p, "exact_terms", c.dn_star.exact_terms);
    Read(p, "block_growth", c.dn_star.block_growth);
    Read(p, "tail_horizon", c.dn_star.tail_horizon);
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    CheckKeys(o, "output", {"dir", "transcript", "unsafe_dump_secrets"});
    Read(o, "dir", c.out_dir);
    Read(o, "transcript", c.write_transcript);
    Read(o, "unsafe_dump_secrets", c.unsafe_dump_secrets);
  }
  if (j.contains("telemetry")) {
    const json& t = j.at("telemetry");
    CheckKeys(t, "telemetry", {"shadow"});
    Read(t, "shadow", c.shadow_telemetry);
  }
  c.synthetic.num_features = c.dims.front();
  c.synthetic.num_classes = c.dims.back();
  c.Validate();
  return c;
}

json RunConfigToJson(const RunConfig& c) {
  json j;
  j["scheme"] = SchemeName(c.scheme);
  j["model"] = {{"dims", c.dims}, {"init_gain", c.init_gain}};
  if (c.dataset_source == "csv") {
    j["dataset"] = {{"source", "csv"},
                    {"path", c.csv.path},
                    {"label_column", c.csv.label_column},
                    {"eval_fraction", c.csv.eval_fraction},
                    {"num_classes", c.csv.num_classes}};
  } else {
    j["dataset"] = {{"source", "synthetic"},
                    {"num_samples", c.synthetic.num_samples},
                    {"num_eval", c.synthetic.num_eval},
                    {"separation", c.synthetic.separation}};
  }
  json graph = {{"mode", GraphModeName(c.train.graph_mode)}};
  if (c.train.graph_mode == GraphMode::kRandomNOut) graph["n"] = c.train.graph_n;
  j["train"] = {{"rounds", c.train.rounds},
                {"num_clients", c.train.num_clients},
                {"client_fraction", c.train.client_fraction},
                {"learning_rate", c.train.learning_rate},
                {"clip_threshold", OptionalToJson(c.train.clip_threshold)},
                {"graph", graph},
                {"master_seed", c.train.master_seed}};
  json p = {{"delta", c.privacy.delta}, {"sigma_ratio", c.privacy.sigma_ratio}};
  if (c.privacy.epsilon) p["epsilon"] = *c.privacy.epsilon;
  if (c.privacy.sigma_eta) p["sigma_eta"] = *c.privacy.sigma_eta;
  if (c.privacy.sigma_delta) p["sigma_delta"] = *c.privacy.sigma_delta;
  j["privacy"] = p;
  j["perturbation"] = {{"sign_mode", SignModeName(c.sign_mode)},
                       {"truncation_len", c.dn_star.truncation_len},
                       {"tail_correction", c.dn_star.tail_correction},
                       {"exact_terms", c.dn_star.exact_terms},
                       {"block_growth", c.dn_star.block_growth},
                       {"tail_horizon", c.dn_star.tail_horizon}};
  j["output"] = {{"dir", c.out_dir},
                 {"transcript", c.write_transcript},
                 {"unsafe_dump_secrets", c.unsafe_dump_secrets}};
  j["telemetry"] = {{"shadow", c.shadow_telemetry}};
  return j;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return RunConfigFromJson(j);
}

}  // namespace bppfl
