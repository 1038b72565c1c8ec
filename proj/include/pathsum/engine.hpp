#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pathsum/enumerate.hpp"
#include "pathsum/graph.hpp"
#include "pathsum/model.hpp"
#include "pathsum/numeric.hpp"
#include "pathsum/subset.hpp"

namespace pathsum {

// Every covariance block of an information matrix is a finite sum over the
// prime walks (simple paths and simple cycles) of its graph. Writing
// res(D, v) for the (v,v) block of the inverse of J restricted to the graph
// minus the deleted set D:
//
//   res(D, a)^{-1} = sum over simple cycles (m_1..m_l) rooted at a of
//       (-1)^{l+1} * J[m_1,m_l]
//                  * prod_{j=l..2} { res(D+{m_1..m_{j-1}}, m_j) * J[m_j,m_{j-1}] }
//
//   Sigma[w,a] = sum over simple paths (v_1..v_{l+1}) from a to w of
//       (-1)^l * res({v_1..v_l}, v_{l+1}) * J[v_{l+1},v_l]
//               * ... * res({v_1}, v_2) * J[v_2,v_1]
//       , all multiplied on the right by res({}, a).
//
// Products are right-to-left and never commuted (block weights need not
// commute). The recursion terminates because every recursive call strictly
// grows the deletion set; the base case is an isolated vertex, whose
// resolvent is the inverse of its self-loop block.

// Counters describing one evaluation. leafCount counts base-case inversions
// actually performed (memo hits do not re-count); maxDepth is the deepest
// nesting of the resolvent recursion.
struct EngineStats {
  long long pathCount = 0;
  long long leafCount = 0;
  int maxDepth = 0;

  void mergeFrom(const EngineStats& other) {
    pathCount += other.pathCount;
    leafCount += other.leafCount;
    if (other.maxDepth > maxDepth) maxDepth = other.maxDepth;
  }
};

// Cache of diagonal resolvents keyed by (canonical deletion set, vertex).
// Keys are canonicalized by the engine: the deletion set is replaced by the
// complement of the vertex's surviving component, which collapses every
// deletion set that leaves the same component. Values are immutable once
// inserted and deterministic per key, so concurrent readers may keep
// pointers while other threads insert; unordered_map node storage keeps
// them valid.
class MemoTable {
 public:
  struct Key {
    VertexSubset deleted;
    int vertex = -1;
    friend bool operator==(const Key& a, const Key& b) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return k.deleted.hash() * 1000003u + static_cast<std::size_t>(k.vertex);
    }
  };

  const Matrix* find(const Key& key) const {
    std::shared_lock lock(mutex_);
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

  // Inserts if absent and returns the stored value. A racing duplicate
  // insert keeps the first value; both computations produce identical bits.
  const Matrix& insert(const Key& key, Matrix value) {
    std::unique_lock lock(mutex_);
    auto [it, inserted] = values_.emplace(key, std::move(value));
    return it->second;
  }

  // Alias lookups keyed by the raw (un-canonicalized) deletion set let the
  // hot path skip the component search entirely; they point at canonical
  // entries.
  const Matrix* findAlias(const Key& raw) const {
    std::shared_lock lock(mutex_);
    auto it = aliases_.find(raw);
    return it == aliases_.end() ? nullptr : it->second;
  }

  void insertAlias(const Key& raw, const Matrix* canonical) {
    std::unique_lock lock(mutex_);
    aliases_.emplace(raw, canonical);
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return values_.size();
  }

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<Key, Matrix, KeyHash> values_;
  std::unordered_map<Key, const Matrix*, KeyHash> aliases_;
};

// A diagonal block of the inverse of a vertex-deleted information submatrix.
struct DiagonalResolvent {
  VertexSubset deleted;  // canonical deletion set actually keyed
  int vertex = -1;
  Matrix value;
};

// A computed covariance block plus provenance counters.
struct PathSumResult {
  int source = -1;
  int target = -1;
  Matrix value;
  long long pathCount = 0;
  int maxDepth = 0;
  long long leafCount = 0;
};

namespace detail {

inline const Matrix& diagonalValue(const ModelGraph& graph, const VertexSubset& deleted,
                                   int alpha, MemoTable& memo, EngineStats& stats, int depth);

// Extends an accumulated walk product (.., prev) by one step to `v`:
// multiplies res(deleted, v) * J[v,prev] onto the left. Every evaluation
// route builds its products through this helper, so terms group identically
// everywhere and per-target sums agree bit-for-bit across routes.
inline Matrix extendPrefix(const ModelGraph& graph, const VertexSubset& deleted, int v, int prev,
                           const Matrix& tail, MemoTable& memo, EngineStats& stats, int depth) {
  const Matrix& res = diagonalValue(graph, deleted, v, memo, stats, depth);
  return res * (graph.edgeWeight(v, prev) * tail);
}

// The cycle-sum inverted by res(deleted, alpha): self-loop first, then
// backtracks and longer cycles in depth-first order, Kahan-accumulated.
// Cycles are walked by one traversal of the simple-path prefixes out of
// alpha; a prefix shared by many cycles is multiplied once. Terms arrive in
// exactly the order SimpleCycleStream emits them and with the grouping of
// extendPrefix, so the result is bit-identical to consuming the stream
// cycle by cycle.
inline Matrix cycleSum(const ModelGraph& graph, const VertexSubset& deleted, int alpha,
                       MemoTable& memo, EngineStats& stats, int depth) {
  const int dim = graph.blockSize(alpha);
  CompensatedSum acc(dim, dim);
  if (graph.hasSelfLoop(alpha)) acc.add(graph.edgeWeight(alpha, alpha));

  struct Frame {
    int vertex;
    std::size_t nextNbr;
  };
  std::vector<Frame> stack{{alpha, 0}};
  std::vector<Matrix> prefix{Matrix::Identity(dim, dim)};
  VertexSubset onPath = deleted;  // deleted plus the vertices of the current prefix
  onPath.insert(alpha);
  Matrix term;

  while (!stack.empty()) {
    Frame& f = stack.back();
    const auto& nbrs = graph.neighbors(f.vertex);
    if (f.nextNbr == nbrs.size()) {
      onPath.erase(f.vertex);
      stack.pop_back();
      prefix.pop_back();
      continue;
    }
    const int w = nbrs[f.nextNbr++];
    if (w == alpha) {
      // Closing edge: the cycle (alpha, .., f.vertex, alpha) of length
      // stack.size(), with sign (-1)^{length+1}.
      term = graph.edgeWeight(alpha, f.vertex) * prefix.back();
      if (stack.size() % 2 == 0) term = -term;
      acc.add(term);
      continue;
    }
    if (onPath.contains(w)) continue;  // onPath holds deleted plus the prefix
    Matrix next = extendPrefix(graph, onPath, w, f.vertex, prefix.back(), memo, stats, depth);
    stack.push_back({w, 0});
    prefix.push_back(std::move(next));
    onPath.insert(w);
  }
  return acc.value();
}

inline const Matrix& diagonalValue(const ModelGraph& graph, const VertexSubset& deleted,
                                   int alpha, MemoTable& memo, EngineStats& stats, int depth) {
  if (alpha < 0 || alpha >= graph.vertexCount() || deleted.contains(alpha)) {
    throw DomainError("diagonal resolvent requested for deleted or out-of-range vertex " +
                      std::to_string(alpha + 1));
  }
  if (depth > stats.maxDepth) stats.maxDepth = depth;

  const MemoTable::Key rawKey{deleted, alpha};
  if (const Matrix* hit = memo.findAlias(rawKey)) return *hit;

  // Resolvents depend only on the surviving component of alpha, so the
  // canonical cache key deletes everything outside it; on trees this
  // collapses the exponentially many deletion sets to one key per directed
  // edge. The alias entry lets later identical raw queries skip the
  // component search.
  const VertexSubset component = connectedComponent(graph, deleted, alpha);
  MemoTable::Key key{component.complement(), alpha};
  if (const Matrix* hit = memo.find(key)) {
    memo.insertAlias(rawKey, hit);
    return *hit;
  }

  Matrix value;
  if (component.count() == 1) {
    ++stats.leafCount;
    value = invertChecked(graph.edgeWeight(alpha, alpha), alpha, key.deleted.members(),
                          "self-loop block");
  } else {
    value = invertChecked(cycleSum(graph, key.deleted, alpha, memo, stats, depth + 1), alpha,
                          key.deleted.members(), "cycle-sum block");
  }
  const Matrix& stored = memo.insert(key, std::move(value));
  memo.insertAlias(rawKey, &stored);
  return stored;
}

}  // namespace detail

// res(deleted, alpha): the (alpha,alpha) block of the inverse of the
// information submatrix on the surviving subgraph.
inline DiagonalResolvent diagonalEntry(const ModelGraph& graph, const VertexSubset& deleted,
                                       int alpha, MemoTable& memo, EngineStats* stats = nullptr) {
  EngineStats local;
  EngineStats& s = stats ? *stats : local;
  const Matrix& value = detail::diagonalValue(graph, deleted, alpha, memo, s, 1);
  return DiagonalResolvent{connectedComponent(graph, deleted, alpha).complement(), alpha, value};
}

// Sigma[omega, alpha], the covariance block with rows I_omega and columns
// I_alpha, as the signed sum over simple paths alpha -> omega. alpha == omega
// is the degenerate length-0 path and yields the bare diagonal resolvent.
inline PathSumResult offDiagonalEntry(const ModelGraph& graph, int alpha, int omega,
                                      MemoTable& memo, EngineStats* stats = nullptr) {
  EngineStats local;
  EngineStats& s = stats ? *stats : local;
  const VertexSubset empty(graph.vertexCount());

  PathSumResult out;
  out.source = alpha;
  out.target = omega;
  long long pathsHere = 0;

  if (alpha == omega) {
    out.value = detail::diagonalValue(graph, empty, alpha, memo, s, 1);
    pathsHere = 1;
  } else {
    CompensatedSum acc(graph.blockSize(omega), graph.blockSize(alpha));
    SimplePathStream paths(graph, empty, alpha, omega);
    while (auto path = paths.next()) {
      const auto& nu = path->vertices;
      Matrix term = Matrix::Identity(graph.blockSize(alpha), graph.blockSize(alpha));
      VertexSubset del(graph.vertexCount());
      for (std::size_t j = 1; j < nu.size(); ++j) {
        del.insert(nu[j - 1]);
        term = detail::extendPrefix(graph, del, nu[j], nu[j - 1], term, memo, s, 1);
      }
      if (path->length() % 2 != 0) term = -term;  // sign (-1)^l
      acc.add(term);
      ++pathsHere;
    }
    out.value = acc.value() * detail::diagonalValue(graph, empty, alpha, memo, s, 1);
  }
  s.pathCount += pathsHere;
  out.pathCount = pathsHere;
  out.maxDepth = s.maxDepth;
  out.leafCount = s.leafCount;
  return out;
}

namespace detail {

// All covariance blocks Sigma[w, alpha] of one column in a single
// depth-first traversal of the simple paths out of alpha. Prefixes shared by
// many paths are multiplied once: each extension costs one memoized
// resolvent and one edge multiply. Per target, terms arrive in the same
// order and with the same grouping as offDiagonalEntry, so the two routes
// agree bit-for-bit.
struct ColumnResult {
  std::vector<std::optional<CompensatedSum>> pathSums;  // per target, excludes res({},alpha)
  std::vector<long long> pathCounts;
};

inline ColumnResult covarianceColumn(const ModelGraph& graph, int alpha, MemoTable& memo,
                                     EngineStats& stats) {
  const int vcount = graph.vertexCount();
  const int adim = graph.blockSize(alpha);

  ColumnResult col;
  col.pathSums.resize(static_cast<std::size_t>(vcount));
  col.pathCounts.assign(static_cast<std::size_t>(vcount), 0);

  struct Frame {
    int vertex;
    std::size_t nextNbr;
  };
  std::vector<Frame> stack{{alpha, 0}};
  std::vector<Matrix> prefix{Matrix::Identity(adim, adim)};
  VertexSubset onPath(vcount);
  onPath.insert(alpha);

  while (!stack.empty()) {
    Frame& f = stack.back();
    const auto& nbrs = graph.neighbors(f.vertex);
    if (f.nextNbr == nbrs.size()) {
      onPath.erase(f.vertex);
      stack.pop_back();
      prefix.pop_back();
      continue;
    }
    const int w = nbrs[f.nextNbr++];
    if (onPath.contains(w)) continue;

    // Arrival at w along the path (stack..., w); onPath currently holds
    // exactly the stack vertices, which is the deletion set of the new
    // resolvent.
    Matrix next = extendPrefix(graph, onPath, w, f.vertex, prefix.back(), memo, stats, 1);
    const int edges = static_cast<int>(stack.size());
    Matrix term = next;
    if (edges % 2 != 0) term = -term;  // sign (-1)^l
    auto& acc = col.pathSums[static_cast<std::size_t>(w)];
    if (!acc) acc.emplace(graph.blockSize(w), adim);
    acc->add(term);
    ++col.pathCounts[static_cast<std::size_t>(w)];

    stack.push_back({w, 0});
    prefix.push_back(std::move(next));
    onPath.insert(w);
  }
  return col;
}

inline void scatterBlock(Matrix& sigma, const ModelGraph& graph, int rowVertex, int colVertex,
                         const Matrix& block) {
  const auto& rows = graph.blockIndices(rowVertex);
  const auto& cols = graph.blockIndices(colVertex);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      sigma(rows[r], cols[c]) = block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
}

}  // namespace detail

// The dense covariance matrix Sigma = J^{-1}, assembled block column by
// block column. Columns are independent given the shared memo table, so they
// may be evaluated by several threads; results are identical for any thread
// count.
inline Matrix fullCovariance(const ModelGraph& graph, int threads = 1,
                             EngineStats* stats = nullptr, MemoTable* sharedMemo = nullptr) {
  const int vcount = graph.vertexCount();
  Matrix sigma = Matrix::Zero(graph.scalarSize(), graph.scalarSize());

  MemoTable localMemo;
  MemoTable& memo = sharedMemo ? *sharedMemo : localMemo;
  const VertexSubset empty(vcount);

  std::mutex mergeMutex;
  EngineStats merged;

  auto evalColumn = [&](int alpha, EngineStats& s) {
    const Matrix& diagAlpha = detail::diagonalValue(graph, empty, alpha, memo, s, 1);
    detail::ColumnResult col = detail::covarianceColumn(graph, alpha, memo, s);
    detail::scatterBlock(sigma, graph, alpha, alpha, diagAlpha);
    for (int w = 0; w < vcount; ++w) {
      s.pathCount += col.pathCounts[static_cast<std::size_t>(w)];
      if (w == alpha || !col.pathSums[static_cast<std::size_t>(w)]) continue;
      const Matrix block = col.pathSums[static_cast<std::size_t>(w)]->value() * diagAlpha;
      detail::scatterBlock(sigma, graph, w, alpha, block);
    }
  };

  if (threads <= 1 || vcount <= 1) {
    EngineStats s;
    for (int alpha = 0; alpha < vcount; ++alpha) evalColumn(alpha, s);
    merged = s;
  } else {
    const int workerCount = std::min(threads, vcount);
    std::atomic<int> nextColumn{0};
    std::exception_ptr firstError;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(workerCount));
    for (int t = 0; t < workerCount; ++t) {
      workers.emplace_back([&] {
        EngineStats s;
        try {
          for (int alpha = nextColumn.fetch_add(1); alpha < vcount;
               alpha = nextColumn.fetch_add(1)) {
            evalColumn(alpha, s);
          }
        } catch (...) {
          std::lock_guard lock(mergeMutex);
          if (!firstError) firstError = std::current_exception();
        }
        std::lock_guard lock(mergeMutex);
        merged.mergeFrom(s);
      });
    }
    for (auto& worker : workers) worker.join();
    if (firstError) std::rethrow_exception(firstError);
  }

  if (stats) stats->mergeFrom(merged);
  return sigma;
}

inline Matrix fullCovariance(const InformationModel& model, const BlockPartition& partition,
                             int threads = 1, EngineStats* stats = nullptr,
                             double dropTolerance = 0.0) {
  const ModelGraph graph = buildGraph(model, partition, dropTolerance);
  return fullCovariance(graph, threads, stats);
}

// mu = Sigma * h. Requires the potential vector.
inline Vector meanVector(const InformationModel& model, const BlockPartition& partition,
                         int threads = 1, EngineStats* stats = nullptr) {
  if (!model.hasPotential()) {
    throw ConfigError("mean requested but the model has no potential vector");
  }
  return fullCovariance(model, partition, threads, stats) * model.potential();
}

// Conditioning on observations y = C x + noise, noise ~ N(0, M): the
// posterior parameters are J + C^T M^{-1} C and h + C^T M^{-1} y. The
// quadratic term is symmetrized before storing so the model invariant stays
// exact.
inline InformationModel absorbObservations(const InformationModel& model, const Matrix& c,
                                           const Matrix& m, const Vector& y) {
  const int n = model.size();
  if (c.cols() != n) {
    throw ConfigError("observation matrix has " + std::to_string(c.cols()) +
                      " columns, expected " + std::to_string(n));
  }
  if (m.rows() != m.cols() || m.rows() != c.rows()) {
    throw ConfigError("noise covariance must be square of order " + std::to_string(c.rows()));
  }
  if (y.size() != c.rows()) {
    throw ConfigError("observation vector length " + std::to_string(y.size()) +
                      " does not match " + std::to_string(c.rows()) + " rows of C");
  }

  Eigen::PartialPivLU<Matrix> lu(m);
  if (!(lu.rcond() > kSingularRcond)) {
    throw SingularityError("observation noise covariance is singular");
  }
  const Matrix quad = c.transpose() * lu.solve(c);
  Matrix updated = model.matrix() + 0.5 * (quad + quad.transpose());

  Vector potential = model.hasPotential() ? model.potential() : Vector::Zero(n);
  potential += c.transpose() * lu.solve(y);
  return InformationModel(std::move(updated), std::move(potential));
}

}  // namespace pathsum
