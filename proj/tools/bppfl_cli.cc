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

// Command-line front end: simulate, dist-check, budget, stats-suite.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bppfl/checks.h"
#include "bppfl/config.h"
#include "bppfl/dist.h"
#include "bppfl/federated.h"
#include "bppfl/privacy.h"
#include "bppfl/rng.h"
#include "bppfl/stats.h"

namespace {

using nlohmann::json;

struct SimulateArgs {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out_dir;
  std::string scheme;
  bool break_antisymmetry = false;
  bool unsafe_dump_secrets = false;
};

int RunSimulate(const SimulateArgs& a) {
  bppfl::RunConfig cfg;
  if (!a.config.empty()) cfg = bppfl::LoadRunConfig(a.config);
  if (a.seed) cfg.train.master_seed = *a.seed;
  if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
  if (!a.scheme.empty()) cfg.scheme = bppfl::ParseScheme(a.scheme);
  cfg.break_antisymmetry = cfg.break_antisymmetry || a.break_antisymmetry;
  if (a.unsafe_dump_secrets) {
    cfg.unsafe_dump_secrets = true;
    cfg.write_transcript = true;
  }
  cfg.Validate();
  const bppfl::RunResult r = bppfl::RunFederated(cfg);
  json out = {{"scheme", bppfl::SchemeName(r.scheme)},
              {"master_seed", cfg.train.master_seed},
              {"rounds", r.rounds.size()},
              {"clients_per_round", r.clients_per_round},
              {"sigma_eta", r.sigma_eta},
              {"sigma_delta", r.sigma_delta},
              {"final_train_loss", r.final_loss},
              {"final_eval_accuracy", r.final_accuracy},
              {"clamp_events", r.clamp_events},
              {"warnings", r.warnings.size()}};
  if (!cfg.out_dir.empty()) out["out_dir"] = cfg.out_dir;
  std::cout << out.dump(2) << std::endl;
  return 0;
}

struct DistArgs {
  int m = 1;
  int n = 1;
  double sigma = 1.0;
  size_t samples = 100000;
  uint64_t seed = 1;
  int64_t truncation_len = 50000;
  bool no_tail_correction = false;
  bool break_tail_correction = false;
};

int RunDistCheck(const DistArgs& a) {
  bppfl::DnStarSpec spec;
  spec.m = a.m;
  spec.truncation_len = a.truncation_len;
  spec.tail_correction = !a.no_tail_correction;
  spec.drop_compensator = a.break_tail_correction;
  bppfl::DnStarSampler x(spec);
  const bppfl::DnSpec y{a.sigma, a.n};
  bppfl::RngStream rng(a.seed, {bppfl::PurposeTag(bppfl::Purpose::kStatistics)});
  std::vector<double> z(a.samples);
  for (double& v : z) {
    double p = 1.0;
    for (int i = 0; i < a.m; ++i) p *= x(rng);
    for (int j = 0; j < a.n; ++j) p *= bppfl::SampleDn(y, rng);
    v = p;
  }
  const bppfl::NormalityReport rep = bppfl::NormalityTest(z, a.sigma);
  const bool pass = rep.Passes() && x.clamp_events() == 0;
  json out = {{"m", a.m},
              {"n", a.n},
              {"sigma", a.sigma},
              {"samples", rep.samples},
              {"mean", rep.mean},
              {"variance", rep.variance},
              {"ks_stat", rep.ks_stat},
              {"p_value", rep.p_value},
              {"clamp_events", x.clamp_events()},
              {"pass", pass}};
  std::cout << out.dump(2) << std::endl;
  return pass ? 0 : 1;
}

struct BudgetArgs {
  double epsilon = 1.0;
  double delta = 1e-5;
  std::optional<double> sigma_eta;
  std::optional<double> sigma_delta;
  double ratio = 10.0;
  std::string graph = "complete";
  int k = 100;
  int n = 0;
  int rounds = 1;
};

int RunBudget(const BudgetArgs& a) {
  bppfl::PrivacyBudget b;
  b.epsilon = a.epsilon;
  b.delta = a.delta;
  b.rounds = a.rounds;
  b.regime.k = a.k;
  b.regime.n = a.n;
  if (a.graph == "complete") {
    b.regime.mode = bppfl::GraphMode::kComplete;
  } else if (a.graph == "random_n_out") {
    b.regime.mode = bppfl::GraphMode::kRandomNOut;
  } else {
    throw CLI::ValidationError("--graph", "must be complete or random_n_out");
  }
  json extra;
  if (a.sigma_eta.has_value() != a.sigma_delta.has_value()) {
    throw CLI::ValidationError("--sigma-eta/--sigma-delta",
                               "give both or neither");
  }
  if (a.sigma_eta) {
    b.sigma_eta = *a.sigma_eta;
    b.sigma_delta = *a.sigma_delta;
    extra["solved"] = false;
  } else {
    const bppfl::SigmaPair s =
        bppfl::SolveSigmas(a.epsilon, a.delta, b.regime, a.ratio);
    b.sigma_eta = s.sigma_eta;
    b.sigma_delta = s.sigma_delta;
    extra["solved"] = true;
    extra["ratio"] = a.ratio;
  }
  json out = bppfl::BudgetToJson(b);
  out.update(extra);
  if (a.epsilon < 1.0) {
    out["gaussian_mechanism_sigma"] =
        bppfl::GaussianMechanismSigma(a.epsilon, a.delta);
  }
  std::cout << out.dump(2) << std::endl;
  return 0;
}

struct SuiteArgs {
  uint64_t seed = 1;
  size_t samples = 100000;
  bool break_tail_correction = false;
  bool break_antisymmetry = false;
};

int RunSuite(const SuiteArgs& a) {
  bppfl::SuiteOptions opt;
  opt.seed = a.seed;
  opt.samples = a.samples;
  opt.break_tail_correction = a.break_tail_correction;
  opt.break_antisymmetry = a.break_antisymmetry;
  const json out = bppfl::SuiteToJson(bppfl::RunStatsSuite(opt));
  std::cout << out.dump(2) << std::endl;
  return out.at("pass").get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated learning simulator with model perturbation and "
               "distributed differential privacy"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Run a federated simulation");
  simulate->add_option("--config", sim.config, "Run configuration (JSON)");
  simulate->add_option("--seed", sim.seed, "Override the master seed");
  simulate->add_option("--out-dir", sim.out_dir, "Directory for metrics files");
  simulate->add_option("--scheme", sim.scheme,
                       "ours | fedavg | mp_cdp | mp_dp_naive");
  simulate->add_flag("--break-antisymmetry", sim.break_antisymmetry,
                     "Fault fixture: pairwise noises are not negated");
  simulate->add_flag("--unsafe-dump-secrets", sim.unsafe_dump_secrets,
                     "Write server secrets into the transcript (tests only)");

  DistArgs dist;
  CLI::App* dist_check =
      app.add_subcommand("dist-check", "Normality of DN*(m)^m x DN(sigma,n)^n products");
  dist_check->add_option("--m", dist.m)->check(CLI::PositiveNumber);
  dist_check->add_option("--n", dist.n)->check(CLI::PositiveNumber);
  dist_check->add_option("--sigma", dist.sigma)->check(CLI::PositiveNumber);
  dist_check->add_option("--samples", dist.samples);
  dist_check->add_option("--seed", dist.seed);
  dist_check->add_option("--truncation-len", dist.truncation_len);
  dist_check->add_flag("--no-tail-correction", dist.no_tail_correction);
  dist_check->add_flag("--break-tail-correction", dist.break_tail_correction,
                       "Fault fixture: drop the deterministic series terms");

  BudgetArgs bud;
  CLI::App* budget = app.add_subcommand("budget", "Privacy accounting for one round");
  budget->add_option("--epsilon", bud.epsilon)->check(CLI::PositiveNumber);
  budget->add_option("--delta", bud.delta);
  budget->add_option("--sigma-eta", bud.sigma_eta);
  budget->add_option("--sigma-delta", bud.sigma_delta);
  budget->add_option("--ratio", bud.ratio, "sigma_delta / sigma_eta when solving");
  budget->add_option("--graph", bud.graph, "complete | random_n_out");
  budget->add_option("--k", bud.k, "Clients per round");
  budget->add_option("--n", bud.n, "Selections per client (random_n_out)");
  budget->add_option("--rounds", bud.rounds, "Reported, not composed");

  SuiteArgs suite;
  CLI::App* stats = app.add_subcommand("stats-suite", "Run the statistical property suite");
  stats->add_option("--seed", suite.seed);
  stats->add_option("--samples", suite.samples);
  stats->add_flag("--break-tail-correction", suite.break_tail_correction,
                  "Fault fixture: drop the deterministic series terms");
  stats->add_flag("--break-antisymmetry", suite.break_antisymmetry,
                  "Fault fixture: pairwise noises are not negated");

  CLI11_PARSE(app, argc, argv);
  try {
    if (simulate->parsed()) return RunSimulate(sim);
    if (dist_check->parsed()) return RunDistCheck(dist);
    if (budget->parsed()) return RunBudget(bud);
    if (stats->parsed()) return RunSuite(suite);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
  return 0;
}
