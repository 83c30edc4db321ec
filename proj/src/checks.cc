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

#include "bppfl/checks.h"

#include <algorithm>
#include <cmath>

#include "bppfl/client.h"
#include "bppfl/dist.h"
#include "bppfl/nn.h"
#include "bppfl/privacy.h"
#include "bppfl/rng.h"
#include "bppfl/server.h"
#include "bppfl/stats.h"
#include "bppfl/topology.h"

namespace bppfl {
namespace {

using nlohmann::json;

double RelLinf(const std::vector<Matrix>& got, const std::vector<Matrix>& want) {
  double num = 0.0;
  double den = 0.0;
  for (size_t i = 0; i < got.size(); ++i) {
    num = std::max(num, (got[i] - want[i]).cwiseAbs().maxCoeff());
    den = std::max(den, want[i].cwiseAbs().maxCoeff());
  }
  return den > 0.0 ? num / den : num;
}

std::vector<Sample> RandomBatch(const std::vector<int>& dims, int size,
                                RngStream& rng) {
  std::vector<Sample> batch(size);
  for (Sample& s : batch) {
    s.x.resize(dims.front());
    for (int i = 0; i < s.x.size(); ++i) s.x(i) = rng.Uniform();
    s.y_bar.resize(dims.back());
    for (int i = 0; i < s.y_bar.size(); ++i) s.y_bar(i) = rng.StandardNormal();
  }
  return batch;
}

DnStarSpec SuiteSpec(const SuiteOptions& opt) {
  DnStarSpec spec;
  spec.drop_compensator = opt.break_tail_correction;
  return spec;
}

json ReportJson(const NormalityReport& r) {
  return {{"samples", r.samples}, {"sigma", r.sigma},
          {"mean", r.mean},       {"variance", r.variance},
          {"ks_stat", r.ks_stat}, {"p_value", r.p_value},
          {"pass", r.Passes()}};
}

}  // namespace

CheckResult CheckProductNormality(const SuiteOptions& opt) {
  CheckResult res{"dn_product_normality", true, json::array()};
  const int combos[4][2] = {{1, 1}, {2, 1}, {1, 2}, {2, 2}};
  for (const auto& c : combos) {
    const int m = c[0];
    const int n = c[1];
    DnStarSpec spec = SuiteSpec(opt);
    spec.m = m;
    DnStarSampler x(spec);
    const DnSpec y{1.0, n};
    RngStream rng(opt.seed, {PurposeTag(Purpose::kStatistics), 1,
                             static_cast<uint64_t>(m), static_cast<uint64_t>(n)});
    std::vector<double> z(opt.samples);
    for (double& v : z) {
      double p = 1.0;
      for (int i = 0; i < m; ++i) p *= x(rng);
      for (int j = 0; j < n; ++j) p *= SampleDn(y, rng);
      v = p;
    }
    const NormalityReport rep = NormalityTest(z, 1.0);
    json d = ReportJson(rep);
    d["m"] = m;
    d["n"] = n;
    d["clamp_events"] = x.clamp_events();
    res.pass = res.pass && rep.Passes() && x.clamp_events() == 0;
    res.detail.push_back(d);
  }
  return res;
}

CheckResult CheckLayerCaseNormality(const SuiteOptions& opt) {
  CheckResult res{"layer_case_normality", true, json::array()};
  // Entries of one layer that share no factor: a column of the first layer,
  // the diagonal of a middle layer, a row of the last layer.
  const std::vector<int> dims = {8, 64, 64, 4};
  const double sigma_eta = 1.0;
  const double sigma_delta = 2.0;
  std::vector<double> eta_case[3];
  std::vector<double> delta_case[3];
  MpOptions mp;
  mp.sign_mode = SignMode::kSigned;
  mp.dn_star = SuiteSpec(opt);
  ModelParams zero;
  zero.layer_dims = dims;
  for (size_t l = 1; l < dims.size(); ++l) {
    zero.weights.push_back(Matrix::Zero(dims[l], dims[l - 1]));
  }
  RngStream rng(opt.seed, {PurposeTag(Purpose::kStatistics), 2});
  const DnSpec eta{sigma_eta, 1};
  const DnSpec delta{sigma_delta, 1};
  uint64_t clamps = 0;
  for (uint64_t round = 1; eta_case[0].size() < opt.samples; ++round) {
    const Perturbed p = MpServer(zero, rng, round, mp);
    clamps += p.secret.clamp_events;
    const std::vector<Matrix> f = SignedTrainableFactors(p.secret);
    const Vector cases[3] = {f[0].col(0), f[1].diagonal(), f[2].row(0)};
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < cases[c].size(); ++i) {
        if (eta_case[c].size() >= opt.samples) break;
        eta_case[c].push_back(cases[c](i) * SampleDn(eta, rng));
        delta_case[c].push_back(cases[c](i) * SampleDn(delta, rng));
      }
    }
  }
  const char* names[3] = {"first", "middle", "last"};
  for (int c = 0; c < 3; ++c) {
    const NormalityReport re = NormalityTest(eta_case[c], sigma_eta);
    const NormalityReport rd = NormalityTest(delta_case[c], sigma_delta);
    json d = {{"layer", names[c]},
              {"independent", ReportJson(re)},
              {"pairwise", ReportJson(rd)}};
    res.pass = res.pass && re.Passes() && rd.Passes();
    res.detail.push_back(d);
  }
  res.pass = res.pass && clamps == 0;
  return res;
}

CheckResult CheckPairwiseCancellation(const SuiteOptions& opt) {
  CheckResult res{"pairwise_cancellation", true, json::object()};
  const int k = 100;
  RngStream topo(opt.seed, {PurposeTag(Purpose::kTopology), 3});
  const GraphTopology g = BuildRandomNOut(k, 5, topo);
  const std::vector<Shape> shapes = {{16, 8}, {12, 16}, {4, 12}};
  const uint64_t round = 7;
  const auto seeds = PairwiseSeeds(g, round, opt.seed);

  bool antisymmetric = true;
  for (const auto& [e, seed] : seeds) {
    const auto a = DrawPairwiseNoise(e.first, e.second, round, seed, 1.0,
                                     shapes, opt.break_antisymmetry);
    const auto b = DrawPairwiseNoise(e.second, e.first, round, seed, 1.0,
                                     shapes, opt.break_antisymmetry);
    for (size_t t = 0; t < shapes.size(); ++t) {
      if (((a[t] + b[t]).array() != 0.0).any()) antisymmetric = false;
    }
  }
  std::vector<Matrix> total;
  for (const Shape& s : shapes) total.push_back(Matrix::Zero(s.first, s.second));
  for (int id : g.nodes) {
    for (int v : g.Neighbors(id)) {
      const auto d = DrawPairwiseNoise(id, v, round, seeds.at(MakeEdge(id, v)),
                                       1.0, shapes, opt.break_antisymmetry);
      for (size_t t = 0; t < shapes.size(); ++t) total[t] += d[t];
    }
  }
  double residual = 0.0;
  for (Matrix& m : total) {
    m /= static_cast<double>(k);
    residual = std::max(residual, m.cwiseAbs().maxCoeff());
  }
  res.pass = antisymmetric && residual <= 1e-9;
  res.detail = {{"clients", k},
                {"edges", g.edges.size()},
                {"bitwise_antisymmetric", antisymmetric},
                {"aggregate_residual_linf", residual}};
  return res;
}

CheckResult CheckGradientRecovery(const SuiteOptions& opt) {
  CheckResult res{"gradient_recovery", true, json::object()};
  const std::vector<int> dims = {8, 16, 12, 4};
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    RngStream rng(opt.seed, {PurposeTag(Purpose::kStatistics), 4,
                             static_cast<uint64_t>(trial)});
    const ModelParams w = InitModel(dims, rng);
    const std::vector<Sample> batch = RandomBatch(dims, 32, rng);
    MpOptions mp;
    mp.sign_mode = trial % 2 == 0 ? SignMode::kMagnitude : SignMode::kSigned;
    const Perturbed p = MpServer(w, rng, trial, mp);
    const auto rec = RecoverBundle(BatchGradients(p.w_hat, batch), p.secret);
    worst = std::max(worst, RelLinf(rec, PlainBatchGradients(w, batch)));
  }
  res.pass = worst <= 1e-6;
  res.detail = {{"trials", 100}, {"worst_rel_linf", worst}};
  return res;
}

CheckResult CheckOutputIdentity(const SuiteOptions& opt) {
  CheckResult res{"output_identity", true, json::object()};
  const std::vector<int> dims = {8, 16, 12, 4};
  const int L = static_cast<int>(dims.size()) - 1;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    RngStream rng(opt.seed, {PurposeTag(Purpose::kStatistics), 5,
                             static_cast<uint64_t>(trial)});
    const ModelParams w = InitModel(dims, rng);
    MpOptions mp;
    mp.sign_mode = trial % 2 == 0 ? SignMode::kMagnitude : SignMode::kSigned;
    const Perturbed p = MpServer(w, rng, trial, mp);
    const Vector x = RandomBatch(dims, 1, rng)[0].x;
    const Activations plain = Forward(ExpandModel(w), x);
    const Activations pert = Forward(p.w_hat, x);
    for (int l = 1; l < L; ++l) {
      const int odd = 2 * (l - 1);
      const int even = odd + 1;
      worst = std::max(worst, (pert.post[odd] - p.secret.r_vecs[l - 1].cwiseProduct(
                                                     plain.post[odd]))
                                  .cwiseAbs()
                                  .maxCoeff());
      worst = std::max(worst, (pert.post[even] -
                               plain.post[even].cwiseQuotient(p.secret.s_vecs[l - 1]))
                                  .cwiseAbs()
                                  .maxCoeff());
    }
    const int last = 2 * L - 2;
    const double alpha = pert.post[last - 1].sum();
    worst = std::max(worst, (pert.post[last] -
                             (plain.post[last] + alpha * p.secret.r))
                                .cwiseAbs()
                                .maxCoeff());
  }
  res.pass = worst <= 1e-10;
  res.detail = {{"trials", 50}, {"worst_linf", worst}};
  return res;
}

CheckResult CheckUnrecoverability(const SuiteOptions& opt) {
  CheckResult res{"unrecoverability_witness", true, json::object()};
  const std::vector<int> dims = {8, 16, 12, 4};
  double worst = 0.0;
  double min_model_gap = INFINITY;
  for (int trial = 0; trial < 50; ++trial) {
    RngStream rng(opt.seed, {PurposeTag(Purpose::kStatistics), 6,
                             static_cast<uint64_t>(trial)});
    const ModelParams w = InitModel(dims, rng);
    MpOptions mp;
    mp.sign_mode = trial % 2 == 0 ? SignMode::kMagnitude : SignMode::kSigned;
    const Perturbed p = MpServer(w, rng, trial, mp);
    const Explanation alt = AlternativeExplanation(p.w_hat, rng, trial, mp);
    const ModelParams again = ApplyPerturbation(alt.w_org, alt.secret);
    double gap = 0.0;
    for (size_t i = 0; i < again.weights.size(); ++i) {
      worst = std::max(
          worst, (again.weights[i] - p.w_hat.weights[i]).cwiseAbs().maxCoeff());
    }
    for (size_t l = 0; l < w.weights.size(); ++l) {
      gap = std::max(gap,
                     (alt.w_org.weights[l] - w.weights[l]).cwiseAbs().maxCoeff());
    }
    min_model_gap = std::min(min_model_gap, gap);
  }
  res.pass = worst <= 1e-10 && min_model_gap > 1e-6;
  res.detail = {{"trials", 50},
                {"worst_reperturb_linf", worst},
                {"min_model_gap", min_model_gap}};
  return res;
}

CheckResult CheckPrivacyRoundTrip(const SuiteOptions& /*opt*/) {
  CheckResult res{"privacy_round_trip", true, json::object()};
  double worst_slack = 0.0;
  int cases = 0;
  bool all_satisfied = true;
  std::vector<PrivacyRegime> regimes;
  for (int k : {10, 100, 1000}) regimes.push_back({GraphMode::kComplete, k, 0});
  for (int k : {100, 1000}) {
    for (int n : {7, 10, 25}) regimes.push_back({GraphMode::kRandomNOut, k, n});
  }
  for (double eps : {0.1, 0.5, 1.0, 2.0, 8.0}) {
    for (double delta : {1e-3, 1e-5, 1e-8}) {
      for (const PrivacyRegime& r : regimes) {
        for (double ratio : {1.0, 10.0}) {
          const SigmaPair s = SolveSigmas(eps, delta, r, ratio);
          const DpCheck c =
              CheckDp(eps, delta, Theta(r, s.sigma_eta, s.sigma_delta));
          all_satisfied = all_satisfied && c.satisfied;
          worst_slack = std::max(
              worst_slack, std::min(c.slack_linear, c.slack_quadratic));
          ++cases;
        }
      }
    }
  }
  const auto violations = ValidateNOutPreconditions(100, 5, 1e-5);
  const bool flagged = std::any_of(
      violations.begin(), violations.end(), [](const std::string& v) {
        return v.rfind("n >= 4 ln(2K/(3 delta))", 0) == 0;
      });
  res.pass = all_satisfied && worst_slack <= 1e-9 && flagged;
  res.detail = {{"cases", cases},
                {"all_satisfied", all_satisfied},
                {"worst_binding_slack", worst_slack},
                {"reference_setting_flagged", flagged}};
  return res;
}

std::vector<CheckResult> RunStatsSuite(const SuiteOptions& opt) {
  return {CheckProductNormality(opt),     CheckLayerCaseNormality(opt),
          CheckPairwiseCancellation(opt), CheckGradientRecovery(opt),
          CheckOutputIdentity(opt),       CheckUnrecoverability(opt),
          CheckPrivacyRoundTrip(opt)};
}

json SuiteToJson(const std::vector<CheckResult>& results) {
  json checks = json::array();
  bool all = true;
  for (const CheckResult& r : results) {
    checks.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    all = all && r.pass;
  }
  return {{"pass", all}, {"checks", checks}};
}

}  // namespace bppfl
