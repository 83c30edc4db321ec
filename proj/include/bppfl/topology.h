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

#ifndef BPPFL_TOPOLOGY_H_
#define BPPFL_TOPOLOGY_H_

#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "bppfl/rng.h"

namespace bppfl {

enum class GraphMode { kComplete, kRandomNOut };

using Edge = std::pair<int, int>;  // Always stored as (min, max).

Edge MakeEdge(int a, int b);

struct GraphTopology {
  std::vector<int> nodes;  // Sorted client ids.
  GraphMode mode = GraphMode::kComplete;
  int n = 0;  // Selections per node in random n-out mode.
  std::set<Edge> edges;

  int num_clients() const { return static_cast<int>(nodes.size()); }
  bool HasEdge(int a, int b) const;
  std::vector<int> Neighbors(int id) const;
  int Degree(int id) const;
  bool IsConnected() const;
};

// Complete graph on ids 1..k.
GraphTopology BuildComplete(int k);
GraphTopology BuildComplete(std::vector<int> ids);

// Each node picks n distinct other nodes uniformly at random; an edge exists
// if either endpoint picked the other. Nodes are processed in ascending id
// order so the result depends only on the stream.
GraphTopology BuildRandomNOut(int k, int n, RngStream& rng);
GraphTopology BuildRandomNOut(std::vector<int> ids, int n, RngStream& rng);

// Seed shared by the two endpoints of {a, b} in a round. Symmetric in a, b.
uint64_t PairSeed(uint64_t master_seed, uint64_t round, int a, int b);

std::map<Edge, uint64_t> PairwiseSeeds(const GraphTopology& graph,
                                       uint64_t round, uint64_t master_seed);

const char* GraphModeName(GraphMode mode);

}  // namespace bppfl

#endif  // BPPFL_TOPOLOGY_H_
