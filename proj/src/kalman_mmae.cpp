#include "maktd/kalman_mmae.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace maktd {

MmaeFilter::MmaeFilter(Vec theta, Mat covariance, Mat transition, Mat process_noise,
                       MmaeOptions options)
    : theta_(std::move(theta)),
      cov_(std::move(covariance)),
      transition_(std::move(transition)),
      process_noise_(std::move(process_noise)),
      options_(std::move(options)) {
  const auto n = theta_.size();
  require(n > 0, "filter dimension must be positive");
  require(cov_.rows() == n && cov_.cols() == n, "covariance shape mismatch");
  require(transition_.rows() == n && transition_.cols() == n, "transition shape mismatch");
  require(process_noise_.rows() == n && process_noise_.cols() == n, "process noise shape mismatch");
  require(!options_.r_candidates.empty(), "need at least one measurement-noise candidate");
  for (double r : options_.r_candidates) {
    require(r > 0.0 && std::isfinite(r), "measurement-noise candidates must be positive");
  }
  require(options_.log_weight_floor > 0.0, "log-weight floor must be positive");
  identity_transition_ = transition_.isIdentity(0.0);
  symmetrize(cov_);
  log_weights_ = Vec::Zero(static_cast<Eigen::Index>(options_.r_candidates.size()));
  normalize_weights();
}

MmaeFilter MmaeFilter::isotropic(std::size_t dim, double p0_scale, double q_scale,
                                 MmaeOptions options) {
  const auto n = static_cast<Eigen::Index>(dim);
  return MmaeFilter(Vec::Zero(n), p0_scale * Mat::Identity(n, n), Mat::Identity(n, n),
                    q_scale * Mat::Identity(n, n), std::move(options));
}

void MmaeFilter::predict() {
  if (identity_transition_) {
    cov_ += process_noise_;
  } else {
    theta_ = transition_ * theta_;
    cov_ = transition_ * cov_ * transition_.transpose() + process_noise_;
  }
  symmetrize(cov_);
}

MmaeStep MmaeFilter::update(const VecRef& h, double measurement) {
  require(h.size() == theta_.size(), "measurement map length does not match weight dimension");
  require(std::isfinite(measurement), "measurement must be finite");

  const Vec u = cov_ * h;  // P h
  const double hph = h.dot(u);
  const double innovation = measurement - h.dot(theta_);
  const std::size_t m = n_candidates();

  std::vector<Vec> gains(m);
  std::vector<Vec> posteriors(m);
  std::vector<double> s(m);
  Vec loglik(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    s[j] = hph + options_.r_candidates[j];
    if (!(s[j] > 0.0) || !std::isfinite(s[j])) {
      throw NumericalError("innovation variance is not positive; covariance is corrupted");
    }
    gains[j] = u / s[j];
    posteriors[j] = theta_ + gains[j] * innovation;
    double ll = -0.5 * innovation * innovation / s[j];
    if (options_.likelihood == Likelihood::kGaussian) {
      ll -= 0.5 * std::log(2.0 * std::numbers::pi * s[j]);
    }
    loglik[static_cast<Eigen::Index>(j)] = ll;
  }

  if (options_.memory == WeightMemory::kRecursive) {
    log_weights_ += loglik;
  } else {
    log_weights_ = loglik;
  }
  normalize_weights();

  Vec fused = Vec::Zero(theta_.size());
  for (std::size_t j = 0; j < m; ++j) fused += weights_[static_cast<Eigen::Index>(j)] * posteriors[j];

  // Sum_j w_j [ Joseph(P, K_j, R_j) + (theta_j - theta)(theta_j - theta)^T ], where for a
  // scalar measurement Joseph(P, K, R) = P - K u^T - u K^T + (h^T P h + R) K K^T.
  Mat next = cov_;
  auto lower = next.selfadjointView<Eigen::Lower>();
  for (std::size_t j = 0; j < m; ++j) {
    const double w = weights_[static_cast<Eigen::Index>(j)];
    if (w == 0.0) continue;
    lower.rankUpdate(gains[j], u, -w);
    lower.rankUpdate(gains[j], w * s[j]);
    const Vec spread = posteriors[j] - fused;
    lower.rankUpdate(spread, w);
  }
  mirror_lower(next);

  theta_ = std::move(fused);
  cov_ = std::move(next);
  return {innovation, weights_};
}

void MmaeFilter::normalize_weights() {
  const double top = log_weights_.maxCoeff();
  if (!std::isfinite(top)) throw NumericalError("candidate log-weights are not finite");
  log_weights_.array() -= top;
  log_weights_ = log_weights_.cwiseMax(-options_.log_weight_floor);
  weights_ = log_weights_.array().exp();
  weights_ /= weights_.sum();
}

void MmaeFilter::restore(Vec theta, Mat covariance, Vec log_weights) {
  require(theta.size() == theta_.size(), "restored weight vector has wrong length");
  require(covariance.rows() == cov_.rows() && covariance.cols() == cov_.cols(),
          "restored covariance has wrong shape");
  require(log_weights.size() == log_weights_.size(), "restored candidate weights have wrong length");
  theta_ = std::move(theta);
  cov_ = std::move(covariance);
  symmetrize(cov_);
  log_weights_ = std::move(log_weights);
  normalize_weights();
}

double min_eigenvalue(const MatRef& m) {
  return Eigen::SelfAdjointEigenSolver<Mat>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace maktd
