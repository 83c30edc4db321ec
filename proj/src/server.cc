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

#include "bppfl/server.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bppfl {
namespace {

Vector DrawDnStarVector(int n, DnStarSampler& sampler, RngStream& rng) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = sampler(rng);
  return v;
}

Vector DrawNormalVector(int n, RngStream& rng) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.StandardNormal();
  return v;
}

Vector Signs(const Vector& v) {
  return v.unaryExpr([](double x) { return x < 0.0 ? -1.0 : 1.0; });
}

void FinishAdditive(PerturbationSecret& s) {
  s.r = s.gamma.cwiseProduct(s.r_a);
  s.upsilon = s.r.squaredNorm();
  const int n_in = s.layer_dims[s.layer_dims.size() - 2];
  // R^a_ij = gamma_i r^a_i, constant along each row.
  s.additive = s.r.replicate(1, n_in);
}

std::vector<Matrix> NaiveLayerFactors(const std::vector<int>& dims,
                                      const std::vector<Vector>& r) {
  const int L = static_cast<int>(dims.size()) - 1;
  std::vector<Matrix> out;
  for (int l = 1; l <= L; ++l) {
    Matrix f(dims[l], dims[l - 1]);
    for (int j = 0; j < f.cols(); ++j) {
      for (int i = 0; i < f.rows(); ++i) {
        double v = 1.0;
        if (l < L) v *= r[l - 1](i);
        if (l > 1) v /= r[l - 2](j);
        f(i, j) = v;
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

void CheckDims(const ModelParams& w_org, const PerturbationSecret& s) {
  if (w_org.layer_dims != s.layer_dims) {
    throw std::domain_error("secret does not match model dimensions");
  }
}

}  // namespace

const char* SignModeName(SignMode mode) {
  return mode == SignMode::kMagnitude ? "magnitude" : "signed";
}

std::vector<Matrix> PerturbationSecret::TrainableFactors() const {
  if (!expanded) return layer_factors;
  std::vector<Matrix> out;
  for (size_t i = 0; i < layer_factors.size(); i += 2) {
    out.push_back(layer_factors[i]);
  }
  return out;
}

std::vector<Matrix> ExpandedLayerFactors(const std::vector<int>& dims,
                                         const std::vector<Vector>& r,
                                         const std::vector<Vector>& s) {
  const int L = static_cast<int>(dims.size()) - 1;
  if (L < 1) throw std::domain_error("model needs at least one layer");
  if (static_cast<int>(r.size()) != L - 1 ||
      static_cast<int>(s.size()) != L - 1) {
    throw std::domain_error("expected L-1 r and s vectors");
  }
  std::vector<Matrix> out;
  if (L == 1) {
    out.push_back(Matrix::Ones(dims[1], dims[0]));
    return out;
  }
  for (int l = 1; l <= L; ++l) {
    Matrix f(dims[l], dims[l - 1]);
    for (int j = 0; j < f.cols(); ++j) {
      for (int i = 0; i < f.rows(); ++i) {
        if (l == 1) {
          f(i, j) = r[0](i);
        } else if (l == L) {
          f(i, j) = s[L - 2](j);
        } else {
          f(i, j) = r[l - 1](i) * s[l - 2](j);
        }
      }
    }
    out.push_back(std::move(f));
    if (l < L) {
      const Vector d = (s[l - 1].cwiseProduct(r[l - 1])).cwiseInverse();
      out.push_back(d.asDiagonal().toDenseMatrix());
    }
  }
  return out;
}

std::vector<Matrix> SignedTrainableFactors(const PerturbationSecret& secret) {
  if (!secret.expanded) {
    return NaiveLayerFactors(secret.layer_dims, secret.r_signed);
  }
  const std::vector<Matrix> all =
      ExpandedLayerFactors(secret.layer_dims, secret.r_signed, secret.s_signed);
  std::vector<Matrix> out;
  for (size_t i = 0; i < all.size(); i += 2) out.push_back(all[i]);
  return out;
}

ModelParams ApplyPerturbation(const ModelParams& w_org,
                              const PerturbationSecret& secret) {
  if (w_org.expanded) throw std::domain_error("expected an L-layer model");
  w_org.Validate();
  CheckDims(w_org, secret);
  ModelParams out = secret.expanded ? ExpandModel(w_org) : w_org;
  if (out.weights.size() != secret.layer_factors.size()) {
    throw std::domain_error("secret depth does not match model");
  }
  for (size_t i = 0; i < out.weights.size(); ++i) {
    out.weights[i] = secret.layer_factors[i].cwiseProduct(out.weights[i]);
  }
  out.weights.back() += secret.additive;

  const int L = w_org.num_original_layers();
  if (secret.expanded && secret.sign_mode == SignMode::kSigned && L > 1) {
    out.gate_polarity.clear();
    for (int l = 1; l <= L; ++l) {
      if (l < L) {
        out.gate_polarity.push_back(Signs(secret.r_vecs[l - 1]));
        out.gate_polarity.push_back(Signs(secret.s_vecs[l - 1]));
      } else {
        out.gate_polarity.push_back(Vector::Ones(w_org.layer_dims[L]));
      }
    }
  }
  return out;
}

Perturbed MpServer(const ModelParams& w_org, RngStream& rng, uint64_t round,
                   const MpOptions& options) {
  if (w_org.expanded) throw std::domain_error("expected an L-layer model");
  w_org.Validate();
  const std::vector<int>& dims = w_org.layer_dims;
  const int L = w_org.num_original_layers();

  DnStarSpec spec1 = options.dn_star;
  spec1.m = 1;
  DnStarSpec spec2 = options.dn_star;
  spec2.m = 2;
  DnStarSampler dn1(spec1);
  DnStarSampler dn2(spec2);

  PerturbationSecret s;
  s.round = round;
  s.sign_mode = options.sign_mode;
  s.expanded = true;
  s.layer_dims = dims;
  for (int l = 1; l <= L - 1; ++l) {
    s.r_signed.push_back(
        DrawDnStarVector(dims[l], l == 1 ? dn1 : dn2, rng));
  }
  for (int l = 1; l <= L - 1; ++l) {
    s.s_signed.push_back(
        DrawDnStarVector(dims[l], l == L - 1 ? dn1 : dn2, rng));
  }
  s.gamma = DrawNormalVector(dims[L], rng);
  s.r_a = DrawNormalVector(dims[L], rng);
  s.r_vecs = s.r_signed;
  s.s_vecs = s.s_signed;
  if (options.sign_mode == SignMode::kMagnitude) {
    for (Vector& v : s.r_vecs) v = v.cwiseAbs();
    for (Vector& v : s.s_vecs) v = v.cwiseAbs();
  }
  s.layer_factors = ExpandedLayerFactors(dims, s.r_vecs, s.s_vecs);
  FinishAdditive(s);
  s.clamp_events = dn1.clamp_events() + dn2.clamp_events();

  Perturbed out;
  out.w_hat = ApplyPerturbation(w_org, s);
  out.secret = std::move(s);
  return out;
}

Perturbed PerturbOriginal(const ModelParams& w_org, RngStream& rng,
                          uint64_t round, const MpOptions& options) {
  if (w_org.expanded) throw std::domain_error("expected an L-layer model");
  w_org.Validate();
  const std::vector<int>& dims = w_org.layer_dims;
  const int L = w_org.num_original_layers();
  DnStarSpec spec = options.dn_star;
  spec.m = 1;
  DnStarSampler dn(spec);

  PerturbationSecret s;
  s.round = round;
  s.sign_mode = SignMode::kMagnitude;
  s.expanded = false;
  s.layer_dims = dims;
  for (int l = 1; l <= L - 1; ++l) {
    s.r_signed.push_back(DrawDnStarVector(dims[l], dn, rng));
  }
  s.gamma = DrawNormalVector(dims[L], rng);
  s.r_a = DrawNormalVector(dims[L], rng);
  for (const Vector& v : s.r_signed) s.r_vecs.push_back(v.cwiseAbs());
  s.layer_factors = NaiveLayerFactors(dims, s.r_vecs);
  FinishAdditive(s);
  s.clamp_events = dn.clamp_events();

  Perturbed out;
  out.w_hat = ApplyPerturbation(w_org, s);
  out.secret = std::move(s);
  return out;
}

RoundAggregate Aggregate(std::vector<ClientBundle> bundles) {
  if (bundles.empty()) throw std::domain_error("no bundles to aggregate");
  std::sort(bundles.begin(), bundles.end(),
            [](const ClientBundle& a, const ClientBundle& b) {
              return a.client_id < b.client_id;
            });
  RoundAggregate agg;
  agg.round = bundles.front().round;
  const GradBundle& first = bundles.front().bundle;
  for (const ClientBundle& cb : bundles) {
    if (cb.round != agg.round) {
      throw std::domain_error("bundles from different rounds");
    }
    const GradBundle& b = cb.bundle;
    if (b.grads.size() != first.grads.size() ||
        b.psi.size() != first.psi.size() ||
        b.phi.size() != first.phi.size()) {
      throw std::domain_error("bundle layer count mismatch");
    }
    for (size_t t = 0; t < b.grads.size(); ++t) {
      if (b.grads[t].rows() != first.grads[t].rows() ||
          b.grads[t].cols() != first.grads[t].cols()) {
        throw std::domain_error("bundle shape mismatch at layer " +
                                std::to_string(t));
      }
      if (t < b.psi.size() && b.psi[t].size() != first.psi[t].size()) {
        throw std::domain_error("bundle psi size mismatch");
      }
    }
    agg.client_ids.push_back(cb.client_id);
  }
  agg.mean = first;
  for (size_t k = 1; k < bundles.size(); ++k) {
    const GradBundle& b = bundles[k].bundle;
    for (size_t t = 0; t < agg.mean.grads.size(); ++t) {
      agg.mean.grads[t] += b.grads[t];
      if (t < agg.mean.psi.size()) {
        for (size_t o = 0; o < agg.mean.psi[t].size(); ++o) {
          agg.mean.psi[t][o] += b.psi[t][o];
        }
      }
      if (t < agg.mean.phi.size()) agg.mean.phi[t] += b.phi[t];
    }
  }
  const double inv = 1.0 / static_cast<double>(bundles.size());
  for (size_t t = 0; t < agg.mean.grads.size(); ++t) {
    agg.mean.grads[t] *= inv;
    if (t < agg.mean.psi.size()) {
      for (Matrix& m : agg.mean.psi[t]) m *= inv;
    }
    if (t < agg.mean.phi.size()) agg.mean.phi[t] *= inv;
  }
  return agg;
}

std::vector<Matrix> RecoverBundle(const GradBundle& bundle,
                                  const PerturbationSecret& secret) {
  const std::vector<Matrix> factors = secret.TrainableFactors();
  if (bundle.grads.size() != factors.size() ||
      bundle.psi.size() != factors.size() ||
      bundle.phi.size() != factors.size()) {
    throw std::domain_error("bundle does not match secret depth");
  }
  std::vector<Matrix> out;
  for (size_t t = 0; t < factors.size(); ++t) {
    if (bundle.psi[t].size() != static_cast<size_t>(secret.r.size())) {
      throw std::domain_error("psi does not match output width");
    }
    Matrix inner = bundle.grads[t] + secret.upsilon * bundle.phi[t];
    for (int o = 0; o < secret.r.size(); ++o) {
      inner -= secret.r(o) * bundle.psi[t][o];
    }
    if (inner.rows() != factors[t].rows() ||
        inner.cols() != factors[t].cols()) {
      throw std::domain_error("bundle shape does not match secret");
    }
    out.push_back(factors[t].cwiseProduct(inner));
  }
  return out;
}

std::vector<Matrix> RecoverAggregate(const RoundAggregate& agg,
                                     const PerturbationSecret& secret) {
  if (agg.round != secret.round) {
    throw std::domain_error("stale secret: aggregate is from round " +
                            std::to_string(agg.round) + ", secret from round " +
                            std::to_string(secret.round));
  }
  return RecoverBundle(agg.mean, secret);
}

ModelParams MuServer(const ModelParams& w_org,
                     const std::vector<Matrix>& grads, double learning_rate) {
  if (grads.size() != w_org.weights.size()) {
    throw std::domain_error("gradient depth does not match model");
  }
  ModelParams out = w_org;
  for (size_t l = 0; l < grads.size(); ++l) {
    if (grads[l].rows() != out.weights[l].rows() ||
        grads[l].cols() != out.weights[l].cols()) {
      throw std::domain_error("gradient shape mismatch at layer " +
                              std::to_string(l));
    }
    out.weights[l] -= learning_rate * grads[l];
  }
  return out;
}

void AddCentralNoise(std::vector<Matrix>& grads, double sigma,
                     RngStream& rng) {
  if (sigma < 0.0) throw std::domain_error("central noise sigma must be >= 0");
  if (sigma == 0.0) return;
  for (Matrix& m : grads) {
    for (int j = 0; j < m.cols(); ++j) {
      for (int i = 0; i < m.rows(); ++i) m(i, j) += sigma * rng.StandardNormal();
    }
  }
}

Explanation AlternativeExplanation(const ModelParams& w_hat, RngStream& rng,
                                   uint64_t round, const MpOptions& options) {
  if (!w_hat.expanded) throw std::domain_error("expected an expanded model");
  w_hat.Validate();
  const std::vector<int>& dims = w_hat.layer_dims;
  const int L = w_hat.num_original_layers();
  const bool signed_gates = !w_hat.gate_polarity.empty();

  DnStarSpec spec1 = options.dn_star;
  spec1.m = 1;
  DnStarSpec spec2 = options.dn_star;
  spec2.m = 2;
  DnStarSampler dn1(spec1);
  DnStarSampler dn2(spec2);

  PerturbationSecret s;
  s.round = round;
  s.sign_mode = signed_gates ? SignMode::kSigned : SignMode::kMagnitude;
  s.expanded = true;
  s.layer_dims = dims;
  for (int l = 1; l <= L - 1; ++l) {
    Vector r = DrawDnStarVector(dims[l], l == 1 ? dn1 : dn2, rng).cwiseAbs();
    if (signed_gates) r = r.cwiseProduct(w_hat.gate_polarity[2 * (l - 1)]);
    // The transitional layer pins the product s_i r_i; s follows from r.
    const Vector diag = w_hat.weights[2 * l - 1].diagonal();
    Vector sv = (diag.cwiseProduct(r)).cwiseInverse();
    s.r_vecs.push_back(r);
    s.s_vecs.push_back(sv);
  }
  s.r_signed = s.r_vecs;
  s.s_signed = s.s_vecs;
  s.gamma = DrawNormalVector(dims[L], rng);
  s.r_a = DrawNormalVector(dims[L], rng);
  s.layer_factors = ExpandedLayerFactors(dims, s.r_vecs, s.s_vecs);
  FinishAdditive(s);

  Explanation out;
  out.w_org.layer_dims = dims;
  for (int l = 1; l <= L; ++l) {
    const int i = 2 * (l - 1);
    Matrix w = w_hat.weights[i];
    if (l == L) w -= s.additive;
    out.w_org.weights.push_back(w.cwiseQuotient(s.layer_factors[i]));
  }
  out.secret = std::move(s);
  return out;
}

}  // namespace bppfl
