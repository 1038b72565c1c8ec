#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "pathsum/enumerate.hpp"
#include "pathsum/graph.hpp"
#include "pathsum/model.hpp"
#include "pathsum/numeric.hpp"

namespace pathsum {

// Reference oracle: dense inverse by pivoted LU.
inline Matrix directInverse(const InformationModel& model) {
  Eigen::PartialPivLU<Matrix> lu(model.matrix());
  if (!(lu.rcond() > kSingularRcond)) {
    throw SingularityError("information matrix is singular (rcond=" +
                           std::to_string(lu.rcond()) + ")");
  }
  return lu.inverse();
}

// Scalar-only route through determinants: each covariance entry is a sum
// over simple paths of the path weight times det(J with the path's vertices
// removed) / det(J). The alpha == omega case degenerates to the adjugate
// diagonal formula det(J^alpha)/det(J). Commutativity of scalar weights is
// what allows pulling the determinant ratio out, so there is no block
// version of this route.
inline double determinantFormulaEntry(const InformationModel& model, int alpha, int omega) {
  const int n = model.size();
  if (alpha < 0 || alpha >= n || omega < 0 || omega >= n) {
    throw DomainError("entry index out of range 1.." + std::to_string(n));
  }
  const Matrix& j = model.matrix();

  const detail::LogDet full = detail::detLogSign(j);
  if (full.sign == 0) {
    throw SingularityError("information matrix is exactly singular");
  }

  // Minor determinants keyed by the deleted-vertex bit mask; paths that
  // delete the same vertex set share one factorization. n is capped by the
  // mask width; the determinant route is an n<=8-scale verification tool
  // anyway.
  if (n > 62) {
    throw ConfigError("determinant route supports models up to order 62");
  }
  std::unordered_map<std::uint64_t, detail::LogDet> minors;
  auto minorDet = [&](std::uint64_t mask) -> const detail::LogDet& {
    auto it = minors.find(mask);
    if (it != minors.end()) return it->second;
    std::vector<int> keep;
    keep.reserve(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
      if (!((mask >> v) & 1u)) keep.push_back(v);
    }
    Matrix sub(keep.size(), keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
      for (std::size_t c = 0; c < keep.size(); ++c) {
        sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j(keep[r], keep[c]);
      }
    }
    return minors.emplace(mask, detail::detLogSign(sub)).first->second;
  };

  const ModelGraph graph = buildGraph(model, BlockPartition::singletons(n));
  CompensatedSum acc(1, 1);
  SimplePathStream paths(graph, VertexSubset(n), alpha, omega);
  while (auto path = paths.next()) {
    const auto& nu = path->vertices;
    double weight = 1.0;
    std::uint64_t mask = 0;
    for (std::size_t k = 0; k < nu.size(); ++k) {
      mask |= std::uint64_t{1} << nu[k];
      if (k > 0) weight *= j(nu[k], nu[k - 1]);
    }
    const detail::LogDet& minor = minorDet(mask);
    double term = weight * (minor.sign * full.sign) * std::exp(minor.logAbsDet - full.logAbsDet);
    if (path->length() % 2 != 0) term = -term;
    acc.add(Matrix::Constant(1, 1, term));
  }
  return acc.value()(0, 0);
}

// Walk-summability and definiteness diagnostics. Walk-summability is
// rho(|R|) < 1 (strict; exactly 1 classifies as not walk-summable) with
// R = I - J; it implies J > 0 but not conversely, and nothing here requires
// it to hold.
struct DiagnosticReport {
  double spectralRadiusAbsR = 0.0;
  bool isWalkSummable = false;
  bool isPositiveDefinite = false;
  double minEigenvalueEstimate = 0.0;
  bool powerIterationConverged = true;
};

namespace detail {

// Largest eigenvalue of a symmetric matrix by power iteration with
// Rayleigh-quotient estimates, from the given start vector. For a
// nonnegative matrix the all-ones start overlaps the Perron vector, so the
// iteration converges to the spectral radius.
inline double powerIterationLargest(const Matrix& m, Vector x, double relTol, int maxIterations,
                                    bool* converged) {
  const Eigen::Index n = m.rows();
  if (n == 0) {
    if (converged) *converged = true;
    return 0.0;
  }
  x /= x.norm();
  double lambda = 0.0;
  for (int it = 0; it < maxIterations; ++it) {
    Vector y = m * x;
    const double norm = y.norm();
    if (norm == 0.0) {
      if (converged) *converged = true;
      return 0.0;
    }
    y /= norm;
    const double next = y.dot(m * y);
    if (it > 0 && std::abs(next - lambda) <= relTol * std::max(1.0, std::abs(next))) {
      if (converged) *converged = true;
      return next;
    }
    lambda = next;
    x = std::move(y);
  }
  if (converged) *converged = false;
  return lambda;
}

}  // namespace detail

inline DiagnosticReport diagnose(const InformationModel& model) {
  constexpr double kRelTol = 1e-12;
  constexpr int kMaxIterations = 10000;

  const Matrix& j = model.matrix();
  const Matrix absR = (Matrix::Identity(j.rows(), j.cols()) - j).cwiseAbs();

  DiagnosticReport report;
  bool okRadius = true;
  report.spectralRadiusAbsR = detail::powerIterationLargest(
      absR, Vector::Ones(j.rows()), kRelTol, kMaxIterations, &okRadius);
  report.isWalkSummable = okRadius && report.spectralRadiusAbsR < 1.0;

  Eigen::LLT<Matrix> llt(j);
  report.isPositiveDefinite = (llt.info() == Eigen::Success);

  // Smallest eigenvalue via the shifted iteration on c*I - J with c an upper
  // bound on the spectrum (Gershgorin), so the target's largest eigenvalue
  // is c - lambda_min. The graded start vector avoids the exact
  // orthogonality to the top eigenvector that symmetric inputs can produce
  // for the all-ones vector.
  double bound = 0.0;
  for (Eigen::Index r = 0; r < j.rows(); ++r) {
    bound = std::max(bound, j.row(r).cwiseAbs().sum());
  }
  bool okShift = true;
  const Matrix shifted = bound * Matrix::Identity(j.rows(), j.cols()) - j;
  Vector graded(j.rows());
  for (Eigen::Index i = 0; i < j.rows(); ++i) {
    graded(i) = 1.0 + 0.1 * static_cast<double>(i + 1) / static_cast<double>(j.rows());
  }
  const double shiftedTop =
      detail::powerIterationLargest(shifted, graded, kRelTol, kMaxIterations, &okShift);
  report.minEigenvalueEstimate = bound - shiftedTop;
  report.powerIterationConverged = okRadius && okShift;
  return report;
}

}  // namespace pathsum
