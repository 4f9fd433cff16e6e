#pragma once

#include "maktd/common.hpp"

#include <vector>

namespace maktd {

/// How a candidate's innovation is scored.
enum class Likelihood {
  kGaussian,         ///< full normal density, including (2 pi S)^-1/2
  kExponentialOnly,  ///< exp(-nu^2 / 2S) only
};

/// How candidate weights evolve between steps.
enum class WeightMemory {
  kRecursive,  ///< Bayesian: w_k ∝ w_{k-1} * likelihood_k
  kPerStep,    ///< w_k ∝ likelihood_k
};

struct MmaeOptions {
  std::vector<double> r_candidates{0.01, 0.1, 0.5, 1.0, 5.0, 10.0, 50.0, 100.0};
  Likelihood likelihood = Likelihood::kGaussian;
  WeightMemory memory = WeightMemory::kRecursive;
  /// Log-weights are kept within this many nats of the best candidate so a
  /// rejected candidate can recover if the noise level drifts.
  double log_weight_floor = 30.0;
};

struct MmaeStep {
  double innovation = 0.0;  ///< measurement minus predicted measurement
  Vec weights;
};

/// Bank of matched Kalman filters over one shared weight estimate, each
/// assuming a different scalar measurement-noise variance. Every update
/// starts all candidates from the same predicted state and collapses their
/// posteriors into one Gaussian.
class MmaeFilter {
 public:
  MmaeFilter(Vec theta, Mat covariance, Mat transition, Mat process_noise, MmaeOptions options);

  /// theta = 0, P = p0 I, F = I, Q = q I.
  static MmaeFilter isotropic(std::size_t dim, double p0_scale, double q_scale,
                              MmaeOptions options = {});

  std::size_t dim() const { return static_cast<std::size_t>(theta_.size()); }
  std::size_t n_candidates() const { return options_.r_candidates.size(); }
  const Vec& theta() const { return theta_; }
  const Mat& covariance() const { return cov_; }
  const Mat& transition() const { return transition_; }
  const Mat& process_noise() const { return process_noise_; }
  const Vec& weights() const { return weights_; }
  const Vec& log_weights() const { return log_weights_; }
  const MmaeOptions& options() const { return options_; }

  /// theta <- F theta, P <- F P F^T + Q.
  void predict();

  /// Scalar measurement z = h^T theta + v, v ~ N(0, R_j) for each candidate.
  MmaeStep update(const VecRef& h, double measurement);

  /// Restores state from a checkpoint.
  void restore(Vec theta, Mat covariance, Vec log_weights);

 private:
  void normalize_weights();

  Vec theta_;
  Mat cov_;
  Mat transition_;
  Mat process_noise_;
  bool identity_transition_ = false;
  MmaeOptions options_;
  Vec log_weights_;
  Vec weights_;
};

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const MatRef& m);

}  // namespace maktd
