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

#include "bppfl/topology.h"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bppfl {
namespace {

std::vector<int> NormalizeIds(std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw std::domain_error("duplicate client id in graph");
  }
  return ids;
}

std::vector<int> Iota(int k) {
  std::vector<int> ids(std::max(k, 0));
  for (int i = 0; i < k; ++i) ids[i] = i + 1;
  return ids;
}

}  // namespace

Edge MakeEdge(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

bool GraphTopology::HasEdge(int a, int b) const {
  return edges.count(MakeEdge(a, b)) > 0;
}

std::vector<int> GraphTopology::Neighbors(int id) const {
  std::vector<int> out;
  for (const Edge& e : edges) {
    if (e.first == id) out.push_back(e.second);
    if (e.second == id) out.push_back(e.first);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int GraphTopology::Degree(int id) const {
  int d = 0;
  for (const Edge& e : edges) d += (e.first == id) + (e.second == id);
  return d;
}

bool GraphTopology::IsConnected() const {
  if (nodes.empty()) return true;
  std::map<int, std::vector<int>> adj;
  for (const Edge& e : edges) {
    adj[e.first].push_back(e.second);
    adj[e.second].push_back(e.first);
  }
  std::set<int> seen{nodes.front()};
  std::vector<int> stack{nodes.front()};
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (seen.insert(v).second) stack.push_back(v);
    }
  }
  return seen.size() == nodes.size();
}

GraphTopology BuildComplete(int k) {
  if (k < 2) throw std::domain_error("complete graph needs k >= 2");
  return BuildComplete(Iota(k));
}

GraphTopology BuildComplete(std::vector<int> ids) {
  GraphTopology g;
  g.nodes = NormalizeIds(std::move(ids));
  if (g.nodes.size() < 2) {
    throw std::domain_error("complete graph needs at least 2 clients");
  }
  g.mode = GraphMode::kComplete;
  g.n = g.num_clients() - 1;
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    for (size_t j = i + 1; j < g.nodes.size(); ++j) {
      g.edges.insert({g.nodes[i], g.nodes[j]});
    }
  }
  return g;
}

GraphTopology BuildRandomNOut(int k, int n, RngStream& rng) {
  if (k < 2) throw std::domain_error("random n-out graph needs k >= 2");
  return BuildRandomNOut(Iota(k), n, rng);
}

GraphTopology BuildRandomNOut(std::vector<int> ids, int n, RngStream& rng) {
  GraphTopology g;
  g.nodes = NormalizeIds(std::move(ids));
  const int k = g.num_clients();
  if (n < 1 || n > k - 1) {
    throw std::domain_error("random n-out requires 1 <= n <= k-1, got n=" +
                            std::to_string(n) + " with k=" +
                            std::to_string(k));
  }
  g.mode = GraphMode::kRandomNOut;
  g.n = n;
  std::vector<int> pool;
  for (int idx = 0; idx < k; ++idx) {
    pool.clear();
    for (int j = 0; j < k; ++j) {
      if (j != idx) pool.push_back(g.nodes[j]);
    }
    // Partial Fisher-Yates: the first n slots end up a uniform n-subset.
    for (int s = 0; s < n; ++s) {
      const size_t pick =
          s + static_cast<size_t>(rng.UniformInt(pool.size() - s));
      std::swap(pool[s], pool[pick]);
      g.edges.insert(MakeEdge(g.nodes[idx], pool[s]));
    }
  }
  return g;
}

uint64_t PairSeed(uint64_t master_seed, uint64_t round, int a, int b) {
  const Edge e = MakeEdge(a, b);
  return DeriveSeed(master_seed,
                    {PurposeTag(Purpose::kPairwiseNoise), round,
                     static_cast<uint64_t>(static_cast<int64_t>(e.first)),
                     static_cast<uint64_t>(static_cast<int64_t>(e.second))});
}

std::map<Edge, uint64_t> PairwiseSeeds(const GraphTopology& graph,
                                       uint64_t round, uint64_t master_seed) {
  std::map<Edge, uint64_t> out;
  for (const Edge& e : graph.edges) {
    out[e] = PairSeed(master_seed, round, e.first, e.second);
  }
  return out;
}

const char* GraphModeName(GraphMode mode) {
  return mode == GraphMode::kComplete ? "complete" : "random_n_out";
}

}  // namespace bppfl
