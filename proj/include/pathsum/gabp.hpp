#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pathsum/graph.hpp"
#include "pathsum/model.hpp"

namespace pathsum {

// On a tree the only simple cycles at a vertex are its self-loop and the
// backtracks to its neighbors, so the cycle-sum recursion collapses to the
// Gaussian belief propagation fixed point:
//
//   Jhat[a]     = J[a,a] + sum_{b in N(a)} dJ[b->a]
//   dJ[d->b]    = -J[b,d] * J[d,b] / Jhat[d\b]
//   Jhat[d\b]   = J[d,d] + sum_{c in N(d), c != b} dJ[c->d]
//
// with Sigma[a,a] = 1 / Jhat[a]. On a tree two sweeps (leaves to root, then
// root to leaves) compute every message exactly; no iteration to convergence
// is involved. Scalar models only; block trees go through the path-sum
// engine with a coarse partition instead.

// Directed messages dJ[from->to] and per-vertex marginal precisions Jhat.
struct MessageTable {
  std::map<std::pair<int, int>, double> messages;
  std::vector<double> marginals;  // Jhat per vertex

  double message(int from, int to) const {
    auto it = messages.find({from, to});
    if (it == messages.end()) {
      throw DomainError("no message for edge " + std::to_string(from + 1) + "->" +
                        std::to_string(to + 1));
    }
    return it->second;
  }

  double marginalPrecision(int v) const { return marginals[static_cast<std::size_t>(v)]; }
  double marginalVariance(int v) const { return 1.0 / marginalPrecision(v); }
};

// True iff every connected component is acyclic, ignoring self-loops.
inline bool isTree(const ModelGraph& graph) {
  const int n = graph.vertexCount();
  std::vector<int> parent(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) parent[static_cast<std::size_t>(v)] = v;
  auto find = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      parent[static_cast<std::size_t>(v)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  };
  for (int v = 0; v < n; ++v) {
    for (int w : graph.neighbors(v)) {
      if (w <= v) continue;  // undirected edge, visit once
      const int rv = find(v);
      const int rw = find(w);
      if (rv == rw) return false;
      parent[static_cast<std::size_t>(rv)] = rw;
    }
  }
  return true;
}

// Exact marginal precisions of a scalar tree model by a deterministic
// two-pass schedule. Components are rooted at their lowest-index vertex
// unless `forcedRoot` overrides the root of its own component (re-rooting
// must not change any marginal; tests rely on this knob).
inline MessageTable gabpMarginals(const InformationModel& model,
                                  std::optional<int> forcedRoot = std::nullopt) {
  const ModelGraph graph = buildGraph(model, BlockPartition::singletons(model.size()));
  if (!isTree(graph)) {
    throw TopologyError("message passing requires an acyclic model graph");
  }
  const Matrix& j = model.matrix();
  const int n = graph.vertexCount();

  MessageTable table;
  table.marginals.assign(static_cast<std::size_t>(n), 0.0);

  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<int> order;  // BFS order over all components
  order.reserve(static_cast<std::size_t>(n));

  auto bfsFrom = [&](int root) {
    parent[static_cast<std::size_t>(root)] = -1;
    seen[static_cast<std::size_t>(root)] = 1;
    std::size_t head = order.size();
    order.push_back(root);
    while (head < order.size()) {
      const int v = order[head++];
      for (int w : graph.neighbors(v)) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          parent[static_cast<std::size_t>(w)] = v;
          order.push_back(w);
        }
      }
    }
  };

  if (forcedRoot) {
    if (*forcedRoot < 0 || *forcedRoot >= n) {
      throw DomainError("root " + std::to_string(*forcedRoot + 1) + " out of range");
    }
    bfsFrom(*forcedRoot);
  }
  for (int v = 0; v < n; ++v) {
    if (!seen[static_cast<std::size_t>(v)]) bfsFrom(v);
  }

  auto inboundSum = [&](int v, int excluded) {
    double sum = 0.0;
    for (int w : graph.neighbors(v)) {
      if (w != excluded) sum += table.message(w, v);
    }
    return sum;
  };

  auto sendMessage = [&](int from, int to) {
    const double precision = j(from, from) + inboundSum(from, to);
    if (!(precision > 0.0)) {
      throw SingularityError("nonpositive intermediate precision " + std::to_string(precision) +
                             " at vertex " + std::to_string(from + 1),
                             from, {to});
    }
    table.messages[{from, to}] = -j(to, from) * j(from, to) / precision;
  };

  // Upward sweep: every vertex sends to its parent once all children have
  // reported, i.e. in reverse BFS order.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = *it;
    if (parent[static_cast<std::size_t>(v)] >= 0) {
      sendMessage(v, parent[static_cast<std::size_t>(v)]);
    }
  }
  // Downward sweep: parents answer their children in BFS order.
  for (int v : order) {
    for (int w : graph.neighbors(v)) {
      if (parent[static_cast<std::size_t>(w)] == v) sendMessage(v, w);
    }
  }

  for (int v = 0; v < n; ++v) {
    const double precision = j(v, v) + inboundSum(v, -1);
    if (!(precision > 0.0)) {
      throw SingularityError("nonpositive marginal precision " + std::to_string(precision) +
                             " at vertex " + std::to_string(v + 1));
    }
    table.marginals[static_cast<std::size_t>(v)] = precision;
  }
  return table;
}

}  // namespace pathsum
