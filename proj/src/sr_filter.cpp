#include "maktd/sr_filter.hpp"

#include <cmath>
#include <numbers>

namespace maktd {

namespace {

std::vector<Eigen::Index> support_of(const VecRef& g) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    if (g[j] != 0.0) idx.push_back(j);
  }
  return idx;
}

Vec normalized_weights(Vec& log_weights, double floor) {
  const double top = log_weights.maxCoeff();
  if (!std::isfinite(top)) throw NumericalError("SR candidate log-weights are not finite");
  log_weights.array() -= top;
  log_weights = log_weights.cwiseMax(-floor);
  Vec w = log_weights.array().exp();
  return w / w.sum();
}

}  // namespace

SrFilter::SrFilter(std::size_t feature_dim, const SrOptions& options)
    : dim_(feature_dim), storage_(options.covariance), options_(options) {
  require(dim_ > 0, "SR feature dimension must be positive");
  require(options_.p0_scale > 0.0, "SR prior scale must be positive");
  require(options_.q_scale >= 0.0, "SR process noise must be non-negative");
  require(options_.r_scale > 0.0, "SR measurement noise must be positive");
  for (double r : options_.r_candidates) require(r > 0.0, "SR noise candidates must be positive");
  const auto n = static_cast<Eigen::Index>(dim_);
  m_ = Vec::Zero(n * n);
  for (Eigen::Index i = 0; i < n; ++i) m_[i * n + i] = 1.0;
  if (storage_ == SrCovariance::kFactored) {
    require(options_.r_candidates.size() <= 1,
            "adapting R_M over several candidates needs dense SR covariance storage");
    if (options_.r_candidates.size() == 1) options_.r_scale = options_.r_candidates.front();
    factor_ = options_.p0_scale * Mat::Identity(n, n);
    log_weights_ = Vec::Zero(1);
  } else {
    dense_cov_ = options_.p0_scale * Mat::Identity(n * n, n * n);
    dense_process_ = options_.q_scale * Mat::Identity(n * n, n * n);
    if (options_.r_candidates.empty()) {
      measurement_noise_.push_back(options_.r_scale * Mat::Identity(n, n));
    } else {
      for (double r : options_.r_candidates) measurement_noise_.push_back(r * Mat::Identity(n, n));
    }
    log_weights_ = Vec::Zero(static_cast<Eigen::Index>(measurement_noise_.size()));
  }
  weights_ = normalized_weights(log_weights_, options_.log_weight_floor);
}

SrFilter SrFilter::dense(Vec m, Mat covariance, Mat process_noise, Mat measurement_noise) {
  const auto n2 = m.size();
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n2))));
  require(n > 0 && n * n == n2, "vectorized SR length must be a perfect square");
  require(covariance.rows() == n2 && covariance.cols() == n2, "SR covariance shape mismatch");
  require(process_noise.rows() == n2 && process_noise.cols() == n2, "SR process noise shape mismatch");
  require(measurement_noise.rows() == n && measurement_noise.cols() == n,
          "SR measurement noise shape mismatch");
  SrFilter f;
  f.dim_ = static_cast<std::size_t>(n);
  f.storage_ = SrCovariance::kDense;
  f.options_.covariance = SrCovariance::kDense;
  f.m_ = std::move(m);
  f.dense_cov_ = std::move(covariance);
  symmetrize(f.dense_cov_);
  f.dense_process_ = std::move(process_noise);
  f.measurement_noise_.push_back(std::move(measurement_noise));
  f.log_weights_ = Vec::Zero(1);
  f.weights_ = Vec::Ones(1);
  return f;
}

const Mat& SrFilter::factor() const {
  if (storage_ != SrCovariance::kFactored) throw InvalidInput("SR covariance is not factored");
  return factor_;
}

const Mat& SrFilter::dense_covariance() const {
  if (storage_ != SrCovariance::kDense) throw InvalidInput("SR covariance is not dense");
  return dense_cov_;
}

Mat SrFilter::covariance() const {
  if (storage_ == SrCovariance::kDense) return dense_cov_;
  const auto n = static_cast<Eigen::Index>(dim_);
  Mat full = Mat::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      full.block(i * n, j * n, n, n).diagonal().setConstant(factor_(i, j));
    }
  }
  return full;
}

void SrFilter::predict() {
  if (storage_ == SrCovariance::kFactored) {
    factor_.diagonal().array() += options_.q_scale;
  } else {
    dense_cov_ += dense_process_;
    symmetrize(dense_cov_);
  }
}

SrStep SrFilter::update(const VecRef& g, const VecRef& target) {
  require(static_cast<std::size_t>(g.size()) == dim_, "SR measurement vector has wrong length");
  require(static_cast<std::size_t>(target.size()) == dim_, "SR target has wrong length");
  return storage_ == SrCovariance::kFactored ? update_factored(g, target) : update_dense(g, target);
}

SrStep SrFilter::update_factored(const VecRef& g, const VecRef& target) {
  const auto n = static_cast<Eigen::Index>(dim_);
  Eigen::Map<Mat> sr(m_.data(), n, n);
  Vec a = Vec::Zero(n);
  Vec predicted = Vec::Zero(n);
  for (Eigen::Index j : support_of(g)) {
    a += g[j] * factor_.col(j);
    predicted += g[j] * sr.col(j);
  }
  const double s = g.dot(a) + options_.r_scale;
  if (!(s > 0.0) || !std::isfinite(s)) throw NumericalError("SR innovation variance is not positive");
  const Vec gain = a / s;
  Vec innovation = target - predicted;
  sr.noalias() += innovation * gain.transpose();

  // Joseph form of the L x L factor: (I - k g^T) A (I - k g^T)^T + r k k^T.
  auto lower = factor_.selfadjointView<Eigen::Lower>();
  lower.rankUpdate(gain, a, -1.0);
  lower.rankUpdate(gain, s);
  mirror_lower(factor_);
  return {std::move(innovation), weights_};
}

SrStep SrFilter::update_dense(const VecRef& g, const VecRef& target) {
  const auto n = static_cast<Eigen::Index>(dim_);
  const auto support = support_of(g);
  // cross = P H^T (L^2 x L), hph = H P H^T (L x L), with H = g^T (x) I.
  Mat cross = Mat::Zero(n * n, n);
  for (Eigen::Index j : support) cross += g[j] * dense_cov_.middleCols(j * n, n);
  Mat hph = Mat::Zero(n, n);
  for (Eigen::Index j : support) hph += g[j] * cross.middleRows(j * n, n);
  symmetrize(hph);
  Vec predicted = Vec::Zero(n);
  for (Eigen::Index j : support) predicted += g[j] * m_.segment(j * n, n);
  Vec innovation = target - predicted;

  const std::size_t count = measurement_noise_.size();
  std::vector<Mat> gains(count);
  std::vector<Mat> innovation_cov(count);
  std::vector<Vec> posteriors(count);
  Vec loglik(static_cast<Eigen::Index>(count));
  for (std::size_t c = 0; c < count; ++c) {
    innovation_cov[c] = hph + measurement_noise_[c];
    symmetrize(innovation_cov[c]);
    Eigen::LLT<Mat> llt(innovation_cov[c]);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("SR innovation covariance is not positive definite");
    }
    gains[c] = llt.solve(cross.transpose()).transpose();
    posteriors[c] = m_ + gains[c] * innovation;
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    double ll = -0.5 * innovation.dot(llt.solve(innovation));
    if (options_.likelihood == Likelihood::kGaussian) {
      ll -= 0.5 * (log_det + static_cast<double>(n) * std::log(2.0 * std::numbers::pi));
    }
    loglik[static_cast<Eigen::Index>(c)] = ll;
  }

  if (count > 1) {
    if (options_.memory == WeightMemory::kRecursive) {
      log_weights_ += loglik;
    } else {
      log_weights_ = loglik;
    }
    weights_ = normalized_weights(log_weights_, options_.log_weight_floor);
  }

  Vec fused = Vec::Zero(m_.size());
  for (std::size_t c = 0; c < count; ++c) fused += weights_[static_cast<Eigen::Index>(c)] * posteriors[c];

  // Joseph: (I - K H) P (I - K H)^T + K R K^T = P - K U^T - U K^T + K S K^T, U = P H^T.
  Mat next = dense_cov_;
  for (std::size_t c = 0; c < count; ++c) {
    const double w = weights_[static_cast<Eigen::Index>(c)];
    if (w == 0.0) continue;
    const Mat ku = gains[c] * cross.transpose();
    next.noalias() -= w * (ku + ku.transpose());
    next.noalias() += w * (gains[c] * innovation_cov[c] * gains[c].transpose());
    if (count > 1) {
      const Vec spread = posteriors[c] - fused;
      next.noalias() += w * spread * spread.transpose();
    }
  }
  symmetrize(next);
  m_ = std::move(fused);
  dense_cov_ = std::move(next);
  return {std::move(innovation), weights_};
}

void SrFilter::restore(Vec m, std::optional<Mat> covariance, std::optional<Vec> log_weights) {
  require(m.size() == m_.size(), "restored SR vector has wrong length");
  m_ = std::move(m);
  if (log_weights) {
    require(log_weights->size() == log_weights_.size(), "restored SR weights have wrong length");
    log_weights_ = std::move(*log_weights);
    weights_ = normalized_weights(log_weights_, options_.log_weight_floor);
  }
  if (!covariance) return;
  Mat& target = storage_ == SrCovariance::kFactored ? factor_ : dense_cov_;
  require(covariance->rows() == target.rows() && covariance->cols() == target.cols(),
          "restored SR covariance has wrong shape");
  target = std::move(*covariance);
  symmetrize(target);
}

}  // namespace maktd
