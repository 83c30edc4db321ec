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

#include "bppfl/nn.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bppfl {
namespace {

double Polarity(const ModelParams& p, int layer, int unit) {
  if (p.gate_polarity.empty()) return 1.0;
  return p.gate_polarity[layer](unit);
}

// Derivative of the gate at pre-activation z. The kink counts as inactive.
Vector GateDerivative(const ModelParams& p, int layer, const Vector& z) {
  Vector d(z.size());
  for (int u = 0; u < z.size(); ++u) {
    d(u) = Polarity(p, layer, u) * z(u) > 0.0 ? 1.0 : 0.0;
  }
  return d;
}

const Vector& LayerInput(const Activations& acts, int i) {
  return i == 0 ? acts.input : acts.post[i - 1];
}

void CheckActivations(const ModelParams& params, const Activations& acts) {
  const size_t n = params.weights.size();
  if (acts.pre.size() != n || acts.post.size() != n) {
    throw std::domain_error("activations do not match model depth");
  }
  if (acts.input.size() != params.weights[0].cols()) {
    throw std::domain_error("activations do not match model input width");
  }
  for (size_t i = 0; i < n; ++i) {
    if (acts.pre[i].size() != params.weights[i].rows() ||
        acts.post[i].size() != params.weights[i].rows()) {
      throw std::domain_error("stale activations at layer " +
                              std::to_string(i));
    }
  }
}

// Backpropagates `seed`, the derivative with respect to the output of layer
// `top`, and writes d/dW for every trainable layer at or below `top` into
// out[t]. Entries above `top` are set to zero.
void BackpropFrom(const ModelParams& params, const Activations& acts, int top,
                  const Vector& seed, const std::vector<int>& trainable,
                  std::vector<Matrix>& out) {
  const int last = static_cast<int>(params.weights.size()) - 1;
  out.resize(trainable.size());
  Vector delta = seed;
  if (top != last) {
    delta = delta.cwiseProduct(GateDerivative(params, top, acts.pre[top]));
  }
  size_t t = trainable.size();
  for (int i = last; i >= 0; --i) {
    const bool is_trainable = t > 0 && trainable[t - 1] == i;
    if (i > top) {
      if (is_trainable) {
        --t;
        out[t].setZero(params.weights[i].rows(), params.weights[i].cols());
      }
      continue;
    }
    if (is_trainable) {
      --t;
      out[t].noalias() = delta * LayerInput(acts, i).transpose();
    }
    if (i == 0) break;
    Vector below = params.weights[i].transpose() * delta;
    delta = below.cwiseProduct(GateDerivative(params, i - 1, acts.pre[i - 1]));
  }
}

}  // namespace

std::vector<int> ModelParams::TrainableLayers() const {
  std::vector<int> idx;
  const int n = static_cast<int>(weights.size());
  for (int i = 0; i < n; ++i) {
    if (!expanded || i % 2 == 0) idx.push_back(i);
  }
  return idx;
}

std::pair<int, int> ModelParams::LayerShape(int i) const {
  if (!expanded) return {layer_dims[i + 1], layer_dims[i]};
  if (i % 2 == 0) return {layer_dims[i / 2 + 1], layer_dims[i / 2]};
  const int n = layer_dims[(i + 1) / 2];
  return {n, n};
}

void ModelParams::Validate() const {
  const int L = num_original_layers();
  if (L < 1) throw std::domain_error("model needs at least one layer");
  for (int d : layer_dims) {
    if (d < 1) throw std::domain_error("layer widths must be positive");
  }
  const size_t expected = expanded ? static_cast<size_t>(2 * L - 1)
                                   : static_cast<size_t>(L);
  if (weights.size() != expected) {
    throw std::domain_error("expected " + std::to_string(expected) +
                            " weight matrices, got " +
                            std::to_string(weights.size()));
  }
  for (size_t i = 0; i < weights.size(); ++i) {
    const auto [rows, cols] = LayerShape(static_cast<int>(i));
    if (weights[i].rows() != rows || weights[i].cols() != cols) {
      throw std::domain_error("layer " + std::to_string(i) + " has shape " +
                              std::to_string(weights[i].rows()) + "x" +
                              std::to_string(weights[i].cols()) +
                              ", expected " + std::to_string(rows) + "x" +
                              std::to_string(cols));
    }
  }
  if (!gate_polarity.empty()) {
    if (gate_polarity.size() != weights.size()) {
      throw std::domain_error("gate polarity depth mismatch");
    }
    for (size_t i = 0; i < weights.size(); ++i) {
      if (gate_polarity[i].size() != weights[i].rows()) {
        throw std::domain_error("gate polarity width mismatch");
      }
    }
  }
}

ModelParams ExpandModel(const ModelParams& w_org) {
  if (w_org.expanded) throw std::domain_error("model is already expanded");
  w_org.Validate();
  ModelParams out;
  out.layer_dims = w_org.layer_dims;
  out.expanded = true;
  const int L = w_org.num_original_layers();
  for (int l = 0; l < L; ++l) {
    out.weights.push_back(w_org.weights[l]);
    if (l + 1 < L) {
      const int n = w_org.layer_dims[l + 1];
      out.weights.push_back(Matrix::Identity(n, n));
    }
  }
  return out;
}

ModelParams ContractModel(const ModelParams& expanded) {
  if (!expanded.expanded) throw std::domain_error("model is not expanded");
  expanded.Validate();
  ModelParams out;
  out.layer_dims = expanded.layer_dims;
  for (int i : expanded.TrainableLayers()) {
    out.weights.push_back(expanded.weights[i]);
  }
  return out;
}

Activations Forward(const ModelParams& params, const Vector& x) {
  if (params.weights.empty()) throw std::domain_error("empty model");
  if (x.size() != params.weights[0].cols()) {
    throw std::domain_error("input has width " + std::to_string(x.size()) +
                            ", model expects " +
                            std::to_string(params.weights[0].cols()));
  }
  const int n = static_cast<int>(params.weights.size());
  Activations a;
  a.input = x;
  a.pre.resize(n);
  a.post.resize(n);
  for (int i = 0; i < n; ++i) {
    a.pre[i].noalias() = params.weights[i] * LayerInput(a, i);
    if (i == n - 1) {
      a.post[i] = a.pre[i];
      continue;
    }
    a.post[i].resize(a.pre[i].size());
    for (int u = 0; u < a.pre[i].size(); ++u) {
      const double z = a.pre[i](u);
      a.post[i](u) = Polarity(params, i, u) > 0.0 ? std::max(0.0, z)
                                                  : std::min(0.0, z);
    }
  }
  return a;
}

std::vector<Matrix> BackwardPlain(const ModelParams& params,
                                  const Activations& acts,
                                  const Sample& sample) {
  CheckActivations(params, acts);
  const int last = static_cast<int>(params.weights.size()) - 1;
  if (sample.y_bar.size() != acts.post[last].size()) {
    throw std::domain_error("label width does not match model output");
  }
  std::vector<Matrix> grads;
  BackpropFrom(params, acts, last, acts.post[last] - sample.y_bar,
               params.TrainableLayers(), grads);
  return grads;
}

PerturbedBackward BackwardPerturbed(const ModelParams& params,
                                    const Activations& acts,
                                    const Sample& sample) {
  CheckActivations(params, acts);
  const int last = static_cast<int>(params.weights.size()) - 1;
  const Vector& out = acts.post[last];
  if (sample.y_bar.size() != out.size()) {
    throw std::domain_error("label width does not match model output");
  }
  const std::vector<int> trainable = params.TrainableLayers();
  const size_t nt = trainable.size();
  const int n_out = static_cast<int>(out.size());
  const Vector g = out - sample.y_bar;

  PerturbedBackward res;
  res.alpha = LayerInput(acts, last).sum();
  BackpropFrom(params, acts, last, g, trainable, res.grads);

  // d alpha / dW: alpha is the sum of the last layer's input, so seed ones
  // at the layer below. With a single layer alpha depends on x only.
  std::vector<Matrix> dalpha;
  if (last > 0) {
    BackpropFrom(params, acts, last - 1,
                 Vector::Ones(params.weights[last - 1].rows()), trainable,
                 dalpha);
  } else {
    dalpha.assign(nt, Matrix::Zero(params.weights[0].rows(),
                                   params.weights[0].cols()));
  }

  res.sigma.assign(nt, std::vector<Matrix>(n_out));
  res.beta.resize(nt);
  std::vector<Matrix> jac;
  for (int o = 0; o < n_out; ++o) {
    BackpropFrom(params, acts, last, Vector::Unit(n_out, o), trainable, jac);
    for (size_t t = 0; t < nt; ++t) {
      res.sigma[t][o] = res.alpha * jac[t] + g(o) * dalpha[t];
    }
  }
  for (size_t t = 0; t < nt; ++t) res.beta[t] = res.alpha * dalpha[t];
  return res;
}

GradBundle BatchGradients(const ModelParams& params,
                          const std::vector<Sample>& batch) {
  if (batch.empty()) throw std::domain_error("empty batch");
  params.Validate();
  GradBundle acc;
  for (size_t k = 0; k < batch.size(); ++k) {
    const PerturbedBackward pb =
        BackwardPerturbed(params, Forward(params, batch[k].x), batch[k]);
    if (k == 0) {
      acc.grads = pb.grads;
      acc.psi = pb.sigma;
      acc.phi = pb.beta;
      continue;
    }
    for (size_t t = 0; t < acc.grads.size(); ++t) {
      acc.grads[t] += pb.grads[t];
      for (size_t o = 0; o < acc.psi[t].size(); ++o) {
        acc.psi[t][o] += pb.sigma[t][o];
      }
      acc.phi[t] += pb.beta[t];
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (size_t t = 0; t < acc.grads.size(); ++t) {
    acc.grads[t] *= inv;
    for (auto& m : acc.psi[t]) m *= inv;
    acc.phi[t] *= inv;
  }
  return acc;
}

std::vector<Matrix> PlainBatchGradients(const ModelParams& params,
                                        const std::vector<Sample>& batch) {
  if (batch.empty()) throw std::domain_error("empty batch");
  params.Validate();
  std::vector<Matrix> acc;
  for (size_t k = 0; k < batch.size(); ++k) {
    std::vector<Matrix> g =
        BackwardPlain(params, Forward(params, batch[k].x), batch[k]);
    if (k == 0) {
      acc = std::move(g);
      continue;
    }
    for (size_t t = 0; t < acc.size(); ++t) acc[t] += g[t];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& m : acc) m *= inv;
  return acc;
}

GradBundle ClipBundle(const GradBundle& bundle, double b,
                      std::vector<double>* factors) {
  if (!(b > 0.0)) throw std::domain_error("clip threshold must be positive");
  GradBundle out = bundle;
  if (factors != nullptr) factors->assign(out.grads.size(), 1.0);
  for (size_t t = 0; t < out.grads.size(); ++t) {
    const double f = 1.0 / std::max(1.0, out.grads[t].norm() / b);
    if (f == 1.0) continue;
    out.grads[t] *= f;
    if (t < out.psi.size()) {
      for (auto& m : out.psi[t]) m *= f;
    }
    if (t < out.phi.size()) out.phi[t] *= f;
    if (factors != nullptr) (*factors)[t] = f;
  }
  return out;
}

double SampleLoss(const ModelParams& params, const Sample& sample) {
  const Activations a = Forward(params, sample.x);
  return 0.5 * (a.post.back() - sample.y_bar).squaredNorm();
}

double MeanLoss(const ModelParams& params, const std::vector<Sample>& data) {
  if (data.empty()) return 0.0;
  double s = 0.0;
  for (const Sample& d : data) s += SampleLoss(params, d);
  return s / static_cast<double>(data.size());
}

double Accuracy(const ModelParams& params, const std::vector<Sample>& data) {
  if (data.empty()) return 0.0;
  size_t hits = 0;
  for (const Sample& d : data) {
    const Activations a = Forward(params, d.x);
    Eigen::Index pred = 0;
    Eigen::Index truth = 0;
    a.post.back().maxCoeff(&pred);
    d.y_bar.maxCoeff(&truth);
    if (pred == truth) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace bppfl
