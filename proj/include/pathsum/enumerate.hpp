#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pathsum/graph.hpp"
#include "pathsum/subset.hpp"

namespace pathsum {

// A walk with all vertices distinct. `vertices` holds (v_1..v_{l+1});
// length() is the number of edges, so the degenerate source==target path has
// length 0.
struct SimplePath {
  std::vector<int> vertices;
  int length() const noexcept { return static_cast<int>(vertices.size()) - 1; }
};

// A closed walk (m_1..m_l, m_1) whose intermediate vertices are distinct and
// differ from the root; `vertices` holds (m_1..m_l) with the return edge
// implicit. length() == 1 is the self-loop.
struct SimpleCycle {
  std::vector<int> vertices;
  int length() const noexcept { return static_cast<int>(vertices.size()); }
};

namespace detail {

// Depth-first traversal over simple extensions of a path rooted at `start`,
// shared by both streams. Neighbors are scanned in ascending vertex order,
// which fixes the emission order. The frontier is driven one edge at a time
// by advance(); the caller decides what to emit.
class SimpleWalkCursor {
 public:
  SimpleWalkCursor(const ModelGraph& graph, VertexSubset deleted, int start)
      : graph_(&graph), deleted_(std::move(deleted)), onPath_(graph.vertexCount()) {
    stack_.push_back({start, 0});
    onPath_.insert(start);
  }

  bool exhausted() const noexcept { return stack_.empty(); }
  const std::vector<int>& pathVertices() const {
    scratch_.clear();
    scratch_.reserve(stack_.size());
    for (const auto& f : stack_) scratch_.push_back(f.vertex);
    return scratch_;
  }
  int depth() const noexcept { return static_cast<int>(stack_.size()); }
  int top() const noexcept { return stack_.back().vertex; }

  // Moves to the next event: either a neighbor `w` of the current endpoint
  // (returned; the caller may then push(w) to extend), or a retreat when the
  // endpoint is out of neighbors (returns nullopt once per pop).
  std::optional<int> nextNeighbor() {
    while (!stack_.empty()) {
      Frame& f = stack_.back();
      const auto& nbrs = graph_->neighbors(f.vertex);
      while (f.nextNbr < nbrs.size()) {
        const int w = nbrs[f.nextNbr++];
        if (deleted_.contains(w)) continue;
        return w;
      }
      onPath_.erase(f.vertex);
      stack_.pop_back();
    }
    return std::nullopt;
  }

  bool onPath(int v) const noexcept { return onPath_.contains(v); }

  void push(int v) {
    stack_.push_back({v, 0});
    onPath_.insert(v);
  }

 private:
  struct Frame {
    int vertex;
    std::size_t nextNbr;
  };

  const ModelGraph* graph_;
  VertexSubset deleted_;
  VertexSubset onPath_;
  std::vector<Frame> stack_;
  mutable std::vector<int> scratch_;
};

}  // namespace detail

// Streams every simple path from `source` to `target` in the subgraph with
// `deleted` removed, in depth-first lexicographic order (ascending neighbor
// order). Exhaustive and duplicate-free; single consumer. The graph must
// outlive the stream.
class SimplePathStream {
 public:
  SimplePathStream(const ModelGraph& graph, VertexSubset deleted, int source, int target)
      : target_(target) {
    if (source < 0 || source >= graph.vertexCount() || deleted.contains(source)) {
      throw DomainError("path source " + std::to_string(source + 1) +
                        " is deleted or out of range");
    }
    if (target < 0 || target >= graph.vertexCount() || deleted.contains(target)) {
      throw DomainError("path target " + std::to_string(target + 1) +
                        " is deleted or out of range");
    }
    if (source == target) {
      // The single length-0 path.
      pendingTrivial_ = true;
      trivial_ = {std::vector<int>{source}};
      return;
    }
    cursor_.emplace(graph, std::move(deleted), source);
  }

  std::optional<SimplePath> next() {
    if (pendingTrivial_) {
      pendingTrivial_ = false;
      return trivial_;
    }
    if (!cursor_) return std::nullopt;
    while (auto w = cursor_->nextNeighbor()) {
      if (cursor_->onPath(*w)) continue;
      if (*w == target_) {
        // A simple path cannot be extended past its endpoint, so emit
        // without pushing.
        SimplePath p{cursor_->pathVertices()};
        p.vertices.push_back(*w);
        return p;
      }
      cursor_->push(*w);
    }
    return std::nullopt;
  }

 private:
  int target_ = -1;
  bool pendingTrivial_ = false;
  SimplePath trivial_;
  std::optional<detail::SimpleWalkCursor> cursor_;
};

// Streams every simple cycle rooted at `root` in the subgraph with `deleted`
// removed: the self-loop first (when the diagonal block is nonzero), then
// longer cycles in depth-first order. The two orientations of a polygon are
// distinct cycles, and a backtrack root->w->root is one cycle.
class SimpleCycleStream {
 public:
  SimpleCycleStream(const ModelGraph& graph, VertexSubset deleted, int root) : root_(root) {
    if (root < 0 || root >= graph.vertexCount() || deleted.contains(root)) {
      throw DomainError("cycle root " + std::to_string(root + 1) +
                        " is deleted or out of range");
    }
    pendingSelfLoop_ = graph.hasSelfLoop(root);
    cursor_.emplace(graph, std::move(deleted), root);
  }

  std::optional<SimpleCycle> next() {
    if (pendingSelfLoop_) {
      pendingSelfLoop_ = false;
      return SimpleCycle{{root_}};
    }
    while (auto w = cursor_->nextNeighbor()) {
      if (*w == root_) {
        // Closing edge back to the root; adjacency has no self entries, so
        // depth >= 2 always holds here.
        return SimpleCycle{cursor_->pathVertices()};
      }
      if (!cursor_->onPath(*w)) cursor_->push(*w);
    }
    return std::nullopt;
  }

 private:
  int root_ = -1;
  bool pendingSelfLoop_ = false;
  std::optional<detail::SimpleWalkCursor> cursor_;
};

// Spec-level constructors; the streams above are the operation results.
inline SimplePathStream enumerateSimplePaths(const ModelGraph& graph, const VertexSubset& deleted,
                                             int source, int target) {
  return SimplePathStream(graph, deleted, source, target);
}

inline SimpleCycleStream enumerateSimpleCycles(const ModelGraph& graph,
                                               const VertexSubset& deleted, int root) {
  return SimpleCycleStream(graph, deleted, root);
}

}  // namespace pathsum
