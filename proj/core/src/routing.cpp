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

#include "tacnet/routing.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace tacnet {

namespace {

constexpr int kUnreached = std::numeric_limits<int>::max();

// BFS hop counts from `start` over links passing the filter.
std::map<NodeId, int> bfs_distances(const NetworkGraph& g, const NodeId& start,
                                    const LinkFilter& filter) {
  std::map<NodeId, int> dist;
  if (!g.node(start)) return dist;
  dist[start] = 0;
  std::deque<NodeId> queue{start};
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    int du = dist[u];
    for (const LinkId& lid : g.links_at(u)) {
      const NetworkLink* l = g.link(lid);
      if (!l || (filter && !filter(*l))) continue;
      NodeId v = g.other_end(*l, u);
      if (v.empty() || dist.count(v)) continue;
      dist[v] = du + 1;
      queue.push_back(v);
    }
  }
  return dist;
}

}  // namespace

std::optional<std::vector<LinkId>> min_hop_lexicographic(const NetworkGraph& graph,
                                                         const NodeId& src, const NodeId& dst,
                                                         const LinkFilter& filter) {
  if (!graph.node(src) || !graph.node(dst)) return std::nullopt;
  if (src == dst) return std::vector<LinkId>{};

  // Hop counts to dst prune the walk to shortest-path edges only; then a
  // greedy smallest-link-id step at each node yields the lexicographically
  // smallest sequence (the first position where two shortest paths differ is
  // decided in favour of the smaller id).
  std::map<NodeId, int> to_dst = bfs_distances(graph, dst, filter);
  auto it = to_dst.find(src);
  if (it == to_dst.end()) return std::nullopt;
  int remaining = it->second;

  std::vector<LinkId> path;
  path.reserve(static_cast<std::size_t>(remaining));
  NodeId u = src;
  while (remaining > 0) {
    const LinkId* best = nullptr;
    NodeId next;
    for (const LinkId& lid : graph.links_at(u)) {  // ascending id order
      const NetworkLink* l = graph.link(lid);
      if (!l || (filter && !filter(*l))) continue;
      NodeId v = graph.other_end(*l, u);
      auto dv = to_dst.find(v);
      if (dv == to_dst.end() || dv->second != remaining - 1) continue;
      best = &lid;
      next = v;
      break;
    }
    if (!best) return std::nullopt;  // cannot happen on a consistent distance map
    path.push_back(*best);
    u = next;
    --remaining;
  }
  return path;
}

std::optional<std::vector<LinkId>> Router::route(const NodeId& src, const NodeId& dst,
                                                 const LinkFilter& filter) const {
  if (!filter) {
    auto key = std::make_pair(src, dst);
    auto hit = cache_.find(key);
    if (hit != cache_.end()) return hit->second;
    auto result = min_hop_lexicographic(*graph_, src, dst);
    cache_.emplace(std::move(key), result);
    return result;
  }
  return min_hop_lexicographic(*graph_, src, dst, filter);
}

std::vector<LinkId> Router::reversed(std::vector<LinkId> path) {
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace tacnet
