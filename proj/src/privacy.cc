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

#include "bppfl/privacy.h"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace bppfl {
namespace {

std::string Num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void CheckPositive(double v, const char* what) {
  if (!(v > 0.0)) {
    throw std::domain_error(std::string(what) + " must be positive");
  }
}

}  // namespace

double ThetaComplete(double sigma_eta, double sigma_delta, int k) {
  CheckPositive(sigma_eta, "sigma_eta");
  CheckPositive(sigma_delta, "sigma_delta");
  if (k < 1) throw std::domain_error("K must be >= 1");
  return 1.0 / (sigma_eta * k) + 1.0 / (sigma_delta * k);
}

double NOutPairwiseCoefficient(int k, int n) {
  if (k < 1) throw std::domain_error("K must be >= 1");
  const int groups = (n - 1) / 3;
  if (n < 1 || groups < 2) {
    throw std::domain_error(
        "random n-out bound needs floor((n-1)/3) >= 2 (n >= 7), got n=" +
        std::to_string(n));
  }
  return 1.0 / (groups - 1) + (12.0 + 6.0 * std::log(k)) / k;
}

double ThetaRandomNOut(double sigma_eta, double sigma_delta, int k, int n) {
  CheckPositive(sigma_eta, "sigma_eta");
  CheckPositive(sigma_delta, "sigma_delta");
  const double c = NOutPairwiseCoefficient(k, n);
  return 1.0 / (k * sigma_eta * sigma_eta) + c / (sigma_delta * sigma_delta);
}

double Theta(const PrivacyRegime& regime, double sigma_eta,
             double sigma_delta) {
  return regime.mode == GraphMode::kComplete
             ? ThetaComplete(sigma_eta, sigma_delta, regime.k)
             : ThetaRandomNOut(sigma_eta, sigma_delta, regime.k, regime.n);
}

DpCheck CheckDp(double epsilon, double delta, double theta) {
  if (!(epsilon > 0.0)) throw std::domain_error("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::domain_error("delta must lie in (0, 1)");
  }
  if (theta < 0.0) throw std::domain_error("theta must be >= 0");
  DpCheck c;
  c.slack_linear = epsilon - (0.5 * theta + std::sqrt(theta));
  const double gap = epsilon - 0.5 * theta;
  const double log_term =
      std::log(2.0 / (delta * std::sqrt(2.0 * std::numbers::pi)));
  c.slack_quadratic = gap * gap - 2.0 * log_term * theta;
  c.satisfied = c.slack_linear >= 0.0 && c.slack_quadratic >= 0.0;
  return c;
}

std::vector<std::string> ValidateNOutPreconditions(int k, int n,
                                                   double delta) {
  std::vector<std::string> out;
  if (!(delta > 0.0 && delta < 1.0)) {
    out.push_back("delta in (0, 1)");
    return out;
  }
  const double kd = static_cast<double>(k);
  if (k < 81) out.push_back("K >= 81 (K=" + std::to_string(k) + ")");
  const double b1 = 4.0 * std::log(2.0 * kd / (3.0 * delta));
  if (n < b1) out.push_back("n >= 4 ln(2K/(3 delta)) = " + Num(b1));
  const double b2 = 6.0 * std::log(kd / 3.0);
  if (n < b2) out.push_back("n >= 6 ln(K/3) = " + Num(b2));
  const double b3 = 1.5 + 2.25 * std::log(2.0 * std::numbers::e / delta);
  if (n < b3) out.push_back("n >= 3/2 + (9/4) ln(2e/delta) = " + Num(b3));
  if ((n - 1) / 3 < 2) out.push_back("floor((n-1)/3) >= 2");
  return out;
}

double MaxTheta(double epsilon, double delta) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::domain_error("infeasible budget: epsilon must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::domain_error("infeasible budget: delta must lie in (0, 1)");
  }
  // The accepted set is [0, theta*]; theta = 2 eps always fails the linear
  // condition.
  double lo = 0.0;
  double hi = 2.0 * epsilon;
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (CheckDp(epsilon, delta, mid).satisfied) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (!(lo > 0.0)) throw std::domain_error("infeasible budget");
  return lo;
}

SigmaPair SolveSigmas(double epsilon, double delta,
                      const PrivacyRegime& regime, double ratio) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw std::domain_error("sigma ratio must be positive");
  }
  const double theta_star = MaxTheta(epsilon, delta);
  const double k = regime.k;
  double sigma_eta = 0.0;
  if (regime.mode == GraphMode::kComplete) {
    if (regime.k < 1) throw std::domain_error("K must be >= 1");
    sigma_eta = (1.0 + 1.0 / ratio) / (theta_star * k);
  } else {
    const double c = NOutPairwiseCoefficient(regime.k, regime.n);
    sigma_eta = std::sqrt((1.0 / k + c / (ratio * ratio)) / theta_star);
  }
  SigmaPair out{sigma_eta, ratio * sigma_eta};
  // Rounding can leave theta a hair above theta*; step sigma up until the
  // check passes.
  for (int it = 0; it < 256; ++it) {
    if (CheckDp(epsilon, delta, Theta(regime, out.sigma_eta, out.sigma_delta))
            .satisfied) {
      return out;
    }
    out.sigma_eta = std::nextafter(out.sigma_eta, INFINITY);
    out.sigma_delta = ratio * out.sigma_eta;
  }
  throw std::domain_error("could not allocate sigmas for the budget");
}

double GaussianMechanismSigma(double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::domain_error(
        "Gaussian mechanism bound is only valid for 0 < epsilon < 1");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::domain_error("delta must lie in (0, 1)");
  }
  return std::sqrt(2.0 * std::log(5.0 / (4.0 * delta))) / epsilon;
}

nlohmann::json BudgetToJson(const PrivacyBudget& b) {
  nlohmann::json j;
  j["epsilon"] = b.epsilon;
  j["delta"] = b.delta;
  j["sigma_eta"] = b.sigma_eta;
  j["sigma_delta"] = b.sigma_delta;
  j["regime"] = {{"mode", GraphModeName(b.regime.mode)}, {"k", b.regime.k}};
  if (b.regime.mode == GraphMode::kRandomNOut) j["regime"]["n"] = b.regime.n;
  j["rounds"] = b.rounds;
  j["composition"] = "per-round only";
  try {
    const double theta = b.theta();
    const DpCheck c = CheckDp(b.epsilon, b.delta, theta);
    j["theta"] = theta;
    j["satisfied"] = c.satisfied;
    j["slack_linear"] = c.slack_linear;
    j["slack_quadratic"] = c.slack_quadratic;
  } catch (const std::domain_error& e) {
    j["theta"] = nullptr;
    j["satisfied"] = false;
    j["error"] = e.what();
  }
  j["violated_preconditions"] = nlohmann::json::array();
  if (b.regime.mode == GraphMode::kRandomNOut) {
    for (const std::string& v :
         ValidateNOutPreconditions(b.regime.k, b.regime.n, b.delta)) {
      j["violated_preconditions"].push_back(v);
    }
  }
  return j;
}

}  // namespace bppfl
