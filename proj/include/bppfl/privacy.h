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

#ifndef BPPFL_PRIVACY_H_
#define BPPFL_PRIVACY_H_

#include <string>
#include <vector>

#include "json.hpp"

#include "bppfl/topology.h"

namespace bppfl {

struct PrivacyRegime {
  GraphMode mode = GraphMode::kComplete;
  int k = 2;  // Clients per round.
  int n = 0;  // Selections per node; random n-out only.
};

// theta = 1/(sigma_eta K) + 1/(sigma_delta K).
double ThetaComplete(double sigma_eta, double sigma_delta, int k);

// theta = 1/(K sigma_eta^2)
//       + (1/(floor((n-1)/3) - 1) + (12 + 6 ln K)/K) / sigma_delta^2.
// Requires floor((n-1)/3) >= 2.
double ThetaRandomNOut(double sigma_eta, double sigma_delta, int k, int n);

// Coefficient of 1/sigma_delta^2 in ThetaRandomNOut.
double NOutPairwiseCoefficient(int k, int n);

double Theta(const PrivacyRegime& regime, double sigma_eta,
             double sigma_delta);

struct DpCheck {
  bool satisfied = false;
  // eps - (theta/2 + sqrt(theta)).
  double slack_linear = 0.0;
  // (eps - theta/2)^2 - 2 ln(2 / (delta sqrt(2 pi))) theta.
  double slack_quadratic = 0.0;
};

DpCheck CheckDp(double epsilon, double delta, double theta);

// Human-readable list of violated preconditions for the random n-out bound.
std::vector<std::string> ValidateNOutPreconditions(int k, int n, double delta);

// Largest theta accepted by CheckDp for (epsilon, delta).
double MaxTheta(double epsilon, double delta);

struct SigmaPair {
  double sigma_eta = 0.0;
  double sigma_delta = 0.0;
};

// Spends the whole budget: theta(regime, sigmas) equals MaxTheta up to
// rounding, with sigma_delta = ratio * sigma_eta.
SigmaPair SolveSigmas(double epsilon, double delta,
                      const PrivacyRegime& regime, double ratio = 10.0);

// Smallest sigma with delta >= 5/4 exp(-(sigma eps)^2 / 2); needs eps < 1.
double GaussianMechanismSigma(double epsilon, double delta);

struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
  double sigma_eta = 0.0;
  double sigma_delta = 0.0;
  PrivacyRegime regime;
  int rounds = 1;

  double theta() const { return Theta(regime, sigma_eta, sigma_delta); }
  DpCheck check() const { return CheckDp(epsilon, delta, theta()); }
  bool satisfied() const { return check().satisfied; }
};

// Record with theta, both slacks and (for random n-out) the violated
// preconditions. The per-round guarantee is not composed over rounds.
nlohmann::json BudgetToJson(const PrivacyBudget& budget);

}  // namespace bppfl

#endif  // BPPFL_PRIVACY_H_
