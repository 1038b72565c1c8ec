#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pathsum/errors.hpp"

namespace pathsum {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Canonical-form parameters of a Gaussian Markov random field: the symmetric
// information (precision) matrix J and, optionally, the potential vector
// h = J*mu. Symmetry is required exactly as stored; file loaders canonicalize
// before constructing.
class InformationModel {
 public:
  explicit InformationModel(Matrix j, std::optional<Vector> h = std::nullopt)
      : j_(std::move(j)), h_(std::move(h)) {
    if (j_.rows() != j_.cols()) {
      throw ConfigError("information matrix must be square, got " +
                        std::to_string(j_.rows()) + "x" + std::to_string(j_.cols()));
    }
    if (j_ != j_.transpose()) {
      throw ConfigError("information matrix must be symmetric as stored");
    }
    if (h_ && h_->size() != j_.rows()) {
      throw ConfigError("potential vector length " + std::to_string(h_->size()) +
                        " does not match matrix order " + std::to_string(j_.rows()));
    }
  }

  int size() const noexcept { return static_cast<int>(j_.rows()); }
  const Matrix& matrix() const noexcept { return j_; }

  bool hasPotential() const noexcept { return h_.has_value(); }
  const Vector& potential() const {
    if (!h_) throw ConfigError("model has no potential vector");
    return *h_;
  }

 private:
  Matrix j_;
  std::optional<Vector> h_;
};

// An ordered list of disjoint index sets I_1..I_B over the scalar variables.
// Blocks may be non-contiguous; each block is kept sorted. The trivial
// partition (all singletons) reproduces the scalar graph.
class BlockPartition {
 public:
  explicit BlockPartition(std::vector<std::vector<int>> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw PartitionError("partition must have at least one block");
    for (auto& b : blocks_) {
      if (b.empty()) throw PartitionError("partition blocks must be non-empty");
      std::sort(b.begin(), b.end());
    }
  }

  static BlockPartition singletons(int n) {
    std::vector<std::vector<int>> blocks(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) blocks[static_cast<std::size_t>(i)] = {i};
    return BlockPartition(std::move(blocks));
  }

  int blockCount() const noexcept { return static_cast<int>(blocks_.size()); }
  const std::vector<int>& block(int b) const { return blocks_[static_cast<std::size_t>(b)]; }
  const std::vector<std::vector<int>>& blocks() const noexcept { return blocks_; }

  bool isTrivial() const noexcept {
    return std::all_of(blocks_.begin(), blocks_.end(),
                       [](const std::vector<int>& b) { return b.size() == 1; });
  }

  // Blocks must be pairwise disjoint and jointly cover {0..n-1}.
  void validateFor(int n) const {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    int covered = 0;
    for (const auto& b : blocks_) {
      for (int i : b) {
        if (i < 0 || i >= n) {
          throw PartitionError("partition index " + std::to_string(i + 1) +
                               " out of range 1.." + std::to_string(n));
        }
        if (seen[static_cast<std::size_t>(i)]) {
          throw PartitionError("partition blocks overlap at index " + std::to_string(i + 1));
        }
        seen[static_cast<std::size_t>(i)] = 1;
        ++covered;
      }
    }
    if (covered != n) {
      throw PartitionError("partition covers " + std::to_string(covered) + " of " +
                           std::to_string(n) + " indices");
    }
  }

 private:
  std::vector<std::vector<int>> blocks_;
};

}  // namespace pathsum
