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

#ifndef BPPFL_NN_H_
#define BPPFL_NN_H_

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace bppfl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// MLP without biases. Hidden layers use ReLU, the last layer is linear.
// An expanded model interleaves an n_l x n_l transitional layer after every
// original hidden layer, giving 2L - 1 layers; the odd layers (0-based even
// indices) carry the original weights.
struct ModelParams {
  std::vector<int> layer_dims;  // n_0..n_L of the original model.
  std::vector<Matrix> weights;
  bool expanded = false;
  // Per-layer, per-neuron gate polarity. Empty means all +1. A polarity of
  // -1 gates with min(0, z) instead of max(0, z); this lets a signed row
  // scaling commute with the activation.
  std::vector<Vector> gate_polarity;

  int num_original_layers() const {
    return static_cast<int>(layer_dims.size()) - 1;
  }
  // Indices into `weights` of the layers that carry trainable weights.
  std::vector<int> TrainableLayers() const;
  // Shape of weights[i] implied by layer_dims and `expanded`.
  std::pair<int, int> LayerShape(int i) const;
  // Throws std::domain_error on inconsistent shapes.
  void Validate() const;
};

struct Sample {
  Vector x;
  Vector y_bar;
};

ModelParams ExpandModel(const ModelParams& w_org);
ModelParams ContractModel(const ModelParams& expanded);

// Random N(0, scale^2 / fan_in) initialization of an L-layer model.
template <typename Rng>
ModelParams InitModel(const std::vector<int>& dims, Rng& rng,
                      double gain = 1.0) {
  ModelParams p;
  p.layer_dims = dims;
  for (size_t l = 1; l < dims.size(); ++l) {
    Matrix w(dims[l], dims[l - 1]);
    const double sd = gain / std::sqrt(static_cast<double>(dims[l - 1]));
    for (int j = 0; j < w.cols(); ++j)
      for (int i = 0; i < w.rows(); ++i) w(i, j) = sd * rng.StandardNormal();
    p.weights.push_back(std::move(w));
  }
  p.Validate();
  return p;
}

struct Activations {
  Vector input;
  std::vector<Vector> pre;   // z for each layer.
  std::vector<Vector> post;  // y for each layer; post.back() is the output.
};

Activations Forward(const ModelParams& params, const Vector& x);

// Per-sample quantities on a perturbed expanded model.
struct PerturbedBackward {
  double alpha = 0.0;
  // Indexed by trainable layer.
  std::vector<Matrix> grads;
  // sigma[t][o]: correction matrix for output unit o at trainable layer t.
  std::vector<std::vector<Matrix>> sigma;
  std::vector<Matrix> beta;
};

PerturbedBackward BackwardPerturbed(const ModelParams& params,
                                    const Activations& acts,
                                    const Sample& sample);

// Plain gradients of 0.5 * ||y - y_bar||^2 on every trainable layer.
std::vector<Matrix> BackwardPlain(const ModelParams& params,
                                  const Activations& acts,
                                  const Sample& sample);

// Batch means of the per-sample gradients and corrections.
struct GradBundle {
  std::vector<Matrix> grads;
  std::vector<std::vector<Matrix>> psi;
  std::vector<Matrix> phi;

  bool has_corrections() const { return !psi.empty(); }
};

GradBundle BatchGradients(const ModelParams& params,
                          const std::vector<Sample>& batch);
std::vector<Matrix> PlainBatchGradients(const ModelParams& params,
                                        const std::vector<Sample>& batch);

// Scales layer t of grads, psi and phi by 1 / max(1, ||grads[t]||_F / b).
// Writes the applied factors to `factors` when non-null.
GradBundle ClipBundle(const GradBundle& bundle, double b,
                      std::vector<double>* factors = nullptr);

double SampleLoss(const ModelParams& params, const Sample& sample);
double MeanLoss(const ModelParams& params, const std::vector<Sample>& data);
// Fraction of samples whose argmax output matches the argmax label.
double Accuracy(const ModelParams& params, const std::vector<Sample>& data);

}  // namespace bppfl

#endif  // BPPFL_NN_H_
