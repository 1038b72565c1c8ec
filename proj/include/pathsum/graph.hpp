#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "pathsum/model.hpp"
#include "pathsum/subset.hpp"

namespace pathsum {

// The weighted graph of a (possibly block-partitioned) information matrix.
// Vertex b stands for block I_b; (j,i) is an edge iff the minor J_{I_i I_j}
// has a nonzero entry, and that minor is the edge weight. The diagonal block
// J_{I_b I_b} is the self-loop weight. For the singleton partition every
// weight is 1x1 and this is the usual graphical model of J.
class ModelGraph {
 public:
  int vertexCount() const noexcept { return static_cast<int>(adjacency_.size()); }
  int scalarSize() const noexcept { return scalarSize_; }

  // Scalar indices I_v of the block backing vertex v, sorted ascending.
  const std::vector<int>& blockIndices(int v) const {
    return blocks_[static_cast<std::size_t>(v)];
  }
  int blockSize(int v) const { return static_cast<int>(blockIndices(v).size()); }

  // Neighbors of v in ascending vertex order (no self entry).
  const std::vector<int>& neighbors(int v) const {
    checkVertex(v);
    return adjacency_[static_cast<std::size_t>(v)];
  }

  bool hasEdge(int i, int j) const {
    checkVertex(i);
    checkVertex(j);
    if (i == j) return hasSelfLoop(i);
    return weightSlot(i, j) >= 0;
  }

  // True iff the diagonal block of v has a nonzero entry.
  bool hasSelfLoop(int v) const {
    checkVertex(v);
    return selfLoop_[static_cast<std::size_t>(v)] != 0;
  }

  // The minor J_{I_i I_j}. Defined for adjacent pairs and for i == j;
  // non-adjacent off-diagonal pairs are all-zero blocks and are not stored.
  const Matrix& edgeWeight(int i, int j) const {
    checkVertex(i);
    checkVertex(j);
    const int slot = weightSlot(i, j);
    if (slot < 0) {
      throw DomainError("no edge between vertices " + std::to_string(i + 1) + " and " +
                        std::to_string(j + 1));
    }
    return weights_[static_cast<std::size_t>(slot)];
  }

  friend ModelGraph buildGraph(const InformationModel& model, const BlockPartition& partition,
                               double dropTolerance);

 private:
  int weightSlot(int i, int j) const noexcept {
    return weightIndex_[static_cast<std::size_t>(i) * static_cast<std::size_t>(vertexCount()) +
                        static_cast<std::size_t>(j)];
  }

  void checkVertex(int v) const {
    if (v < 0 || v >= vertexCount()) {
      throw DomainError("vertex " + std::to_string(v + 1) + " out of range 1.." +
                        std::to_string(vertexCount()));
    }
  }

  int scalarSize_ = 0;
  std::vector<std::vector<int>> blocks_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<char> selfLoop_;
  std::vector<Matrix> weights_;
  std::vector<int> weightIndex_;  // dense (i,j) -> slot in weights_, -1 if absent
};

// Builds the block graph of `model` under `partition`. A block counts as an
// edge iff some entry exceeds `dropTolerance` in absolute value; the default
// 0 keeps exact sparsity (any nonzero entry makes an edge).
inline ModelGraph buildGraph(const InformationModel& model, const BlockPartition& partition,
                             double dropTolerance = 0.0) {
  partition.validateFor(model.size());

  const Matrix& j = model.matrix();
  const int blockCount = partition.blockCount();

  ModelGraph g;
  g.scalarSize_ = model.size();
  g.blocks_ = partition.blocks();
  g.adjacency_.assign(static_cast<std::size_t>(blockCount), {});
  g.selfLoop_.assign(static_cast<std::size_t>(blockCount), 0);
  g.weightIndex_.assign(static_cast<std::size_t>(blockCount) * blockCount, -1);

  auto extract = [&](int a, int b) {
    const auto& rows = partition.block(a);
    const auto& cols = partition.block(b);
    Matrix out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j(rows[r], cols[c]);
      }
    }
    return out;
  };
  auto store = [&](int a, int b, Matrix w) {
    g.weightIndex_[static_cast<std::size_t>(a) * blockCount + b] =
        static_cast<int>(g.weights_.size());
    g.weights_.push_back(std::move(w));
  };

  for (int a = 0; a < blockCount; ++a) {
    Matrix diag = extract(a, a);
    g.selfLoop_[static_cast<std::size_t>(a)] =
        (diag.cwiseAbs().maxCoeff() > dropTolerance) ? 1 : 0;
    store(a, a, std::move(diag));
    for (int b = a + 1; b < blockCount; ++b) {
      Matrix w = extract(a, b);
      if (w.cwiseAbs().maxCoeff() > dropTolerance) {
        g.adjacency_[static_cast<std::size_t>(a)].push_back(b);
        g.adjacency_[static_cast<std::size_t>(b)].push_back(a);
        store(b, a, w.transpose());
        store(a, b, std::move(w));
      }
    }
  }
  // Neighbor lists are built in ascending order by construction; enumeration
  // determinism depends on that.
  return g;
}

// Maximal set of vertices reachable from `seed` in the subgraph with
// `deleted` removed.
inline VertexSubset connectedComponent(const ModelGraph& graph, const VertexSubset& deleted,
                                       int seed) {
  if (seed < 0 || seed >= graph.vertexCount() || deleted.contains(seed)) {
    throw DomainError("component seed " + std::to_string(seed + 1) +
                      " is deleted or out of range");
  }
  VertexSubset comp(graph.vertexCount());
  comp.insert(seed);
  std::vector<int> stack{seed};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : graph.neighbors(v)) {
      if (!deleted.contains(w) && !comp.contains(w)) {
        comp.insert(w);
        stack.push_back(w);
      }
    }
  }
  return comp;
}

}  // namespace pathsum
