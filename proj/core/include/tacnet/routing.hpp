/*
 * Copyright 2026 tacnet-sim Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "tacnet/model.hpp"

namespace tacnet {

// Predicate deciding whether a link may be used. An empty function admits all.
using LinkFilter = std::function<bool(const NetworkLink&)>;

// Minimum-hop path whose link id sequence is lexicographically smallest among
// all minimum-hop paths. Deterministic; used wherever a path choice must be
// reproducible and uniquely defined. nullopt when dst is unreachable.
std::optional<std::vector<LinkId>> min_hop_lexicographic(const NetworkGraph& graph,
                                                         const NodeId& src, const NodeId& dst,
                                                         const LinkFilter& filter = {});

// Deterministic min-hop router with a cache for unfiltered queries. BFS visits
// adjacency in ascending link id order, so results are stable run to run.
class Router {
 public:
  explicit Router(const NetworkGraph* graph) : graph_(graph) {}

  std::optional<std::vector<LinkId>> route(const NodeId& src, const NodeId& dst,
                                           const LinkFilter& filter = {}) const;

  static std::vector<LinkId> reversed(std::vector<LinkId> path);

 private:
  const NetworkGraph* graph_;
  mutable std::map<std::pair<NodeId, NodeId>, std::optional<std::vector<LinkId>>> cache_;
};

}  // namespace tacnet
