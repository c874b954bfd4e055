// Copyright 2026 The cutflow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "support/flow_oracle.hpp"

#include <algorithm>
#include <vector>

namespace cutflow::testing {

// Minimum over every S/T partition of the crossing capacity.
std::int64_t brute_force_cut(const FlowNetwork& net) {
  const std::size_t n = net.nodes.size();
  const std::size_t inner = n - 2;
  const std::int64_t inf = net.infinity();
  std::int64_t best = -1;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << inner); ++mask) {
    auto source_side = [&](std::size_t v) {
      if (v == FlowNetwork::kSource) return true;
      if (v == FlowNetwork::kSink) return false;
      return ((mask >> (v - 2)) & 1) != 0;
    };
    std::int64_t cut = 0;
    for (const auto& a : net.arcs) {
      if (source_side(a.from) && !source_side(a.to)) cut += a.capacity.value_or(inf);
    }
    if (best < 0 || cut < best) best = cut;
  }
  return best;
}

std::int64_t crossing(const FlowNetwork& net, const FlowResult& r) {
  std::int64_t cut = 0;
  for (const auto& a : net.arcs) {
    if (r.source_side[a.from] && !r.source_side[a.to]) cut += a.capacity.value_or(net.infinity());
  }
  return cut;
}

// Random DAG over a hidden topological order with S first and T last.
FlowNetwork random_dag(std::mt19937_64& rng) {
  FlowNetwork net;
  std::size_t inner = std::uniform_int_distribution<std::size_t>(0, 8)(rng);
  for (std::size_t k = 0; k < inner; ++k) net.add_node(static_cast<NodeId>(k + 100));
  std::vector<std::size_t> order{FlowNetwork::kSource};
  for (std::size_t k = 0; k < inner; ++k) order.push_back(k + 2);
  std::shuffle(order.begin() + 1, order.end(), rng);
  order.push_back(FlowNetwork::kSink);
  std::bernoulli_distribution edge(0.4), infinite(0.05);
  std::uniform_int_distribution<std::int64_t> cap(0, 20);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (!edge(rng)) continue;
      std::optional<std::int64_t> c = cap(rng);
      if (infinite(rng) && order[i] != FlowNetwork::kSource) c = std::nullopt;
      net.add_arc(order[i], order[j], c);
    }
  }
  return net;
}

}  // namespace cutflow::testing
