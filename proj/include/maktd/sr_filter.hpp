#pragma once

#include "maktd/kalman_mmae.hpp"

#include <optional>
#include <vector>

namespace maktd {

/// Storage of the covariance of the vectorized successor matrix.
enum class SrCovariance {
  /// P_m = A (x) I_L with A of size L x L. Exact whenever the prior, process
  /// noise and a single measurement noise are all multiples of the identity.
  kFactored,
  /// Dense L^2 x L^2 matrix. Required for general noise models and for
  /// adapting R_M over several candidates.
  kDense,
};

struct SrOptions {
  double p0_scale = 10.0;
  double q_scale = 1e-7;
  double r_scale = 1.0;
  SrCovariance covariance = SrCovariance::kFactored;
  /// Non-empty: adapt R_M = r_j I over these candidates (dense storage only).
  std::vector<double> r_candidates;
  Likelihood likelihood = Likelihood::kGaussian;
  WeightMemory memory = WeightMemory::kRecursive;
  double log_weight_floor = 30.0;
};

struct SrStep {
  Vec innovation;  ///< target - M g
  Vec weights;     ///< R_M candidate weights (a single 1 without adaptation)
};

/// Kalman filter over m = vec(M), the column-stacked L x L successor
/// matrix, with random-walk dynamics and the measurement
/// target = (g^T (x) I) m + n = M g + n. The measurement matrix is never
/// built; products with it are contractions over the nonzero entries of g.
class SrFilter {
 public:
  SrFilter(std::size_t feature_dim, const SrOptions& options);

  /// Dense filter with arbitrary state, covariance and noise matrices.
  static SrFilter dense(Vec m, Mat covariance, Mat process_noise, Mat measurement_noise);

  std::size_t feature_dim() const { return dim_; }
  SrCovariance storage() const { return storage_; }
  const Vec& m() const { return m_; }
  Eigen::Map<const Mat> matrix() const {
    return {m_.data(), static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_)};
  }
  /// The L x L factor A of P_m = A (x) I (factored storage only).
  const Mat& factor() const;
  /// Dense covariance (dense storage only).
  const Mat& dense_covariance() const;
  /// Materializes the full L^2 x L^2 covariance in either storage.
  Mat covariance() const;
  const Vec& weights() const { return weights_; }
  const Vec& log_weights() const { return log_weights_; }
  const SrOptions& options() const { return options_; }

  /// m <- m, P_m <- P_m + Q_M.
  void predict();

  SrStep update(const VecRef& g, const VecRef& target);

  void restore(Vec m, std::optional<Mat> covariance, std::optional<Vec> log_weights = std::nullopt);

 private:
  SrFilter() = default;
  SrStep update_factored(const VecRef& g, const VecRef& target);
  SrStep update_dense(const VecRef& g, const VecRef& target);

  std::size_t dim_ = 0;
  SrCovariance storage_ = SrCovariance::kFactored;
  SrOptions options_;
  Vec m_;
  Mat factor_;           // factored: A
  Mat dense_cov_;        // dense: P_m
  Mat dense_process_;    // dense: Q_M
  std::vector<Mat> measurement_noise_;  // dense: R_M candidates
  Vec log_weights_;
  Vec weights_;
};

}  // namespace maktd
