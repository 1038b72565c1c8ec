#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pathsum/errors.hpp"
#include "pathsum/model.hpp"

namespace pathsum {

// Reciprocal-condition threshold below which a block inversion is reported
// as singular instead of returning garbage.
inline constexpr double kSingularRcond = 1e-14;

// Kahan-compensated elementwise accumulator. For 1x1 blocks this is exactly
// scalar compensated summation; for larger blocks each entry carries its own
// compensation term. Work buffers are members so add() never allocates.
class CompensatedSum {
 public:
  CompensatedSum(Eigen::Index rows, Eigen::Index cols)
      : sum_(Matrix::Zero(rows, cols)),
        comp_(Matrix::Zero(rows, cols)),
        y_(rows, cols),
        t_(rows, cols) {}

  void add(const Matrix& term) {
    y_ = term - comp_;
    t_ = sum_ + y_;
    comp_ = (t_ - sum_) - y_;
    sum_ = t_;
  }

  const Matrix& value() const noexcept { return sum_; }

 private:
  Matrix sum_;
  Matrix comp_;
  Matrix y_;
  Matrix t_;
};

namespace detail {

// Dense inverse by LU with partial pivoting. Throws SingularityError when the
// reciprocal condition estimate falls under kSingularRcond (the comparison is
// written to also trap NaN).
inline Matrix invertChecked(const Matrix& m, int vertex, const std::vector<int>& deleted,
                            const char* what) {
  Eigen::PartialPivLU<Matrix> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond > kSingularRcond)) {
    std::string msg = std::string(what) + " at vertex " + std::to_string(vertex + 1) +
                      " is singular (rcond=" + std::to_string(rcond) + ")";
    if (!deleted.empty()) {
      msg += " with deleted vertices {";
      for (std::size_t i = 0; i < deleted.size(); ++i) {
        if (i) msg += ",";
        msg += std::to_string(deleted[i] + 1);
      }
      msg += "}";
    }
    throw SingularityError(msg, vertex, deleted);
  }
  Matrix inv = lu.inverse();
  if (!inv.allFinite()) {
    throw SingularityError(std::string(what) + " inversion produced non-finite values", vertex,
                           deleted);
  }
  return inv;
}

// log|det M| with sign, via pivoted LU. Size-0 matrices have determinant 1.
// Returns {0, -inf} for an exactly singular matrix.
struct LogDet {
  int sign;          // -1, 0, +1
  double logAbsDet;  // natural log of |det|
};

inline LogDet detLogSign(const Matrix& m) {
  if (m.rows() == 0) return {1, 0.0};
  Eigen::PartialPivLU<Matrix> lu(m);
  int sign = lu.permutationP().determinant() > 0 ? 1 : -1;
  double logAbs = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double d = lu.matrixLU()(i, i);
    if (d == 0.0) return {0, -std::numeric_limits<double>::infinity()};
    if (d < 0.0) sign = -sign;
    logAbs += std::log(std::abs(d));
  }
  return {sign, logAbs};
}

}  // namespace detail
}  // namespace pathsum
