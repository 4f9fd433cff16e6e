#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maktd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecRef = Eigen::Ref<const Vec>;
using MatRef = Eigen::Ref<const Mat>;

/// Thrown when a caller hands in data of the wrong shape or outside the valid domain.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when internal filter state is no longer usable (non-invertible
/// innovation covariance, non-finite weights). Indicates corruption rather
/// than bad input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidInput(what);
}

/// Copies the lower triangle onto the upper one.
inline void mirror_lower(Mat& m) { m.triangularView<Eigen::StrictlyUpper>() = m.transpose(); }

inline void symmetrize(Mat& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace maktd
