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

#ifndef BPPFL_DATASET_H_
#define BPPFL_DATASET_H_

#include <cstdint>
#include <string>
#include <vector>

#include "bppfl/nn.h"

namespace bppfl {

struct SyntheticSpec {
  int num_samples = 2000;  // Training samples, split across clients.
  int num_eval = 1000;     // Held-out samples from the same blobs.
  int num_features = 20;
  int num_classes = 2;
  // Blob centers are N(0, separation^2) per feature; points add N(0, 1).
  double separation = 1.0;
};

struct CsvSpec {
  std::string path;
  int label_column = -1;  // Negative counts from the end.
  double eval_fraction = 0.2;
  int num_classes = 0;  // 0: infer as max label + 1.
};

struct RawTable {
  std::vector<std::string> header;  // Empty when the file has none.
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
};

// Parses a numeric CSV. A first row with any non-numeric field is taken as a
// header. Throws std::runtime_error naming the line and column on bad input.
RawTable ReadCsv(const std::string& path, int label_column = -1);

struct FederatedData {
  int num_features = 0;
  int num_classes = 0;
  // clients[i] holds the data of client id i + 1.
  std::vector<std::vector<Sample>> clients;
  std::vector<Sample> eval;

  std::vector<Sample> AllTraining() const;
};

// Min-max scales features to [0, 1] using the training rows, one-hot encodes
// labels, shuffles and deals training rows round-robin to num_clients.
FederatedData Partition(const RawTable& train, const RawTable& eval,
                        int num_clients, int num_classes, uint64_t seed);

FederatedData MakeSynthetic(const SyntheticSpec& spec, int num_clients,
                            uint64_t seed);
FederatedData LoadCsv(const CsvSpec& spec, int num_clients, uint64_t seed);

}  // namespace bppfl

#endif  // BPPFL_DATASET_H_
