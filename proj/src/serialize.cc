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

#include "bppfl/serialize.h"

#include <fstream>
#include <stdexcept>

namespace bppfl {

using nlohmann::json;

namespace {

json VectorToJson(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector VectorFromJson(const json& j) {
  const auto vals = j.get<std::vector<double>>();
  Vector v(static_cast<int>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) v(static_cast<int>(i)) = vals[i];
  return v;
}

json MatricesToJson(const std::vector<Matrix>& ms) {
  json a = json::array();
  for (const Matrix& m : ms) a.push_back(MatrixToJson(m));
  return a;
}

std::vector<Matrix> MatricesFromJson(const json& j) {
  std::vector<Matrix> out;
  for (const json& m : j) out.push_back(MatrixFromJson(m));
  return out;
}

}  // namespace

json MatrixToJson(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<size_t>(m.size()));
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix MatrixFromJson(const json& j) {
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 ||
      data.size() != static_cast<size_t>(rows) * static_cast<size_t>(cols)) {
    throw std::runtime_error("matrix data does not match its shape");
  }
  Matrix m(rows, cols);
  size_t k = 0;
  for (int i = 0; i < rows; ++i) {
    for (int c = 0; c < cols; ++c) m(i, c) = data[k++];
  }
  return m;
}

json ModelToJson(const ModelParams& p) {
  json j;
  j["format"] = "bppfl-model";
  j["version"] = 1;
  j["layer_dims"] = p.layer_dims;
  j["expanded"] = p.expanded;
  j["weights"] = MatricesToJson(p.weights);
  if (!p.gate_polarity.empty()) {
    json g = json::array();
    for (const Vector& v : p.gate_polarity) g.push_back(VectorToJson(v));
    j["gate_polarity"] = g;
  }
  return j;
}

ModelParams ModelFromJson(const json& j) {
  if (j.value("format", "") != "bppfl-model") {
    throw std::runtime_error("not a bppfl model document");
  }
  if (j.value("version", 0) != 1) {
    throw std::runtime_error("unsupported model format version");
  }
  ModelParams p;
  p.layer_dims = j.at("layer_dims").get<std::vector<int>>();
  p.expanded = j.at("expanded").get<bool>();
  p.weights = MatricesFromJson(j.at("weights"));
  if (j.contains("gate_polarity")) {
    for (const json& v : j.at("gate_polarity")) {
      p.gate_polarity.push_back(VectorFromJson(v));
    }
  }
  p.Validate();
  return p;
}

void SaveModel(const ModelParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << ModelToJson(p).dump() << "\n";
}

ModelParams LoadModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return ModelFromJson(j);
}

json BundleToJson(const ClientBundle& b) {
  json j;
  j["client_id"] = b.client_id;
  j["round"] = b.round;
  j["grads"] = MatricesToJson(b.bundle.grads);
  json psi = json::array();
  for (const auto& layer : b.bundle.psi) psi.push_back(MatricesToJson(layer));
  j["psi"] = psi;
  j["phi"] = MatricesToJson(b.bundle.phi);
  return j;
}

ClientBundle BundleFromJson(const json& j) {
  ClientBundle b;
  b.client_id = j.at("client_id").get<int>();
  b.round = j.at("round").get<uint64_t>();
  b.bundle.grads = MatricesFromJson(j.at("grads"));
  for (const json& layer : j.at("psi")) {
    b.bundle.psi.push_back(MatricesFromJson(layer));
  }
  b.bundle.phi = MatricesFromJson(j.at("phi"));
  return b;
}

json GraphToJson(const GraphTopology& g) {
  json edges = json::array();
  for (const Edge& e : g.edges) edges.push_back({e.first, e.second});
  json j = {{"mode", GraphModeName(g.mode)}, {"nodes", g.nodes},
            {"edges", edges}};
  if (g.mode == GraphMode::kRandomNOut) j["n"] = g.n;
  return j;
}

json SecretToJson(const PerturbationSecret& s) {
  json r = json::array();
  for (const Vector& v : s.r_signed) r.push_back(VectorToJson(v));
  json sv = json::array();
  for (const Vector& v : s.s_signed) sv.push_back(VectorToJson(v));
  return {{"round", s.round},
          {"sign_mode", SignModeName(s.sign_mode)},
          {"expanded", s.expanded},
          {"r", r},
          {"s", sv},
          {"gamma", VectorToJson(s.gamma)},
          {"r_a", VectorToJson(s.r_a)},
          {"upsilon", s.upsilon}};
}

}  // namespace bppfl
