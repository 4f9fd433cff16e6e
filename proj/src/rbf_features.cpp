#include "maktd/rbf_features.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

namespace maktd {

double FeatureVector::dot(const VecRef& weights) const {
  require(weights.size() == values.size(), "weight vector length does not match feature length");
  return active().dot(weights.segment(static_cast<Eigen::Index>(active_block * block_size),
                                      static_cast<Eigen::Index>(block_size)));
}

FeatureVector embed_state_action(const VecRef& state_features, std::size_t action,
                                 std::size_t n_actions) {
  require(action < n_actions, "action index " + std::to_string(action) + " out of range [0, " +
                                  std::to_string(n_actions) + ")");
  const auto block = static_cast<std::size_t>(state_features.size());
  FeatureVector phi;
  phi.block_size = block;
  phi.active_block = action;
  phi.values = Vec::Zero(static_cast<Eigen::Index>(block * n_actions));
  phi.values.segment(static_cast<Eigen::Index>(action * block), static_cast<Eigen::Index>(block)) =
      state_features;
  return phi;
}

double loss(const FeatureVector& phi, const VecRef& theta, double reward) {
  const double residual = phi.dot(theta) - reward;
  return residual * residual;
}

RbfBank::RbfBank(std::vector<Vec> means, std::vector<Mat> covariances, RbfRates rates)
    : means_(std::move(means)), covariances_(std::move(covariances)), rates_(rates) {
  require(!means_.empty(), "RBF bank needs at least one basis function");
  require(means_.size() == covariances_.size(), "means and covariances differ in count");
  require(rates_.cov_floor > 0.0, "covariance floor must be positive");
  obs_dim_ = static_cast<std::size_t>(means_.front().size());
  require(obs_dim_ > 0, "observation dimension must be positive");
  precisions_.resize(means_.size());
  for (std::size_t n = 0; n < means_.size(); ++n) {
    require(static_cast<std::size_t>(means_[n].size()) == obs_dim_, "inconsistent mean length");
    require(static_cast<std::size_t>(covariances_[n].rows()) == obs_dim_ &&
                static_cast<std::size_t>(covariances_[n].cols()) == obs_dim_,
            "covariance shape does not match observation dimension");
    require((covariances_[n] - covariances_[n].transpose()).cwiseAbs().maxCoeff() <= 1e-12,
            "covariance must be symmetric");
    refresh_precision(n);
  }
}

RbfBank RbfBank::random(std::size_t n_rbf, const VecRef& low, const VecRef& high, Rng& rng,
                        RbfRates rates) {
  require(n_rbf > 0, "RBF count must be positive");
  require(low.size() == high.size() && low.size() > 0, "bounding box dimensions differ");
  const auto dim = low.size();
  std::vector<Vec> means;
  std::vector<Mat> covs;
  means.reserve(n_rbf);
  covs.reserve(n_rbf);
  for (std::size_t n = 0; n < n_rbf; ++n) {
    Vec mu(dim);
    for (Eigen::Index d = 0; d < dim; ++d) mu[d] = low[d] + (high[d] - low[d]) * uniform01(rng);
    means.push_back(std::move(mu));
    covs.push_back(Mat::Identity(dim, dim));
  }
  return RbfBank(std::move(means), std::move(covs), rates);
}

void RbfBank::check_obs(const VecRef& obs) const {
  require(static_cast<std::size_t>(obs.size()) == obs_dim_,
          "observation has length " + std::to_string(obs.size()) + ", bank expects " +
              std::to_string(obs_dim_));
}

void RbfBank::refresh_precision(std::size_t n) {
  Eigen::LLT<Mat> llt(covariances_[n]);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("RBF covariance " + std::to_string(n) + " is not positive definite");
  }
  precisions_[n] = llt.solve(Mat::Identity(static_cast<Eigen::Index>(obs_dim_),
                                           static_cast<Eigen::Index>(obs_dim_)));
  symmetrize(precisions_[n]);
}

Vec RbfBank::state_features(const VecRef& obs) const {
  check_obs(obs);
  Vec out(static_cast<Eigen::Index>(block_size()));
  out[0] = 1.0;
  for (std::size_t n = 0; n < means_.size(); ++n) {
    const Vec d = obs - means_[n];
    out[static_cast<Eigen::Index>(n + 1)] = std::exp(-0.5 * d.dot(precisions_[n] * d));
  }
  return out;
}

FeatureVector RbfBank::state_action_features(const VecRef& obs, std::size_t action,
                                             std::size_t n_actions) const {
  return embed_state_action(state_features(obs), action, n_actions);
}

RbfGradient RbfBank::loss_gradient(const VecRef& obs, std::size_t action, const VecRef& theta,
                                   double reward) const {
  check_obs(obs);
  const FeatureVector phi = state_action_features(obs, action, theta.size() / block_size());
  require(static_cast<std::size_t>(theta.size()) == phi.size(),
          "weight vector length must be a multiple of the block size");
  RbfGradient grad;
  grad.residual = phi.dot(theta) - reward;
  grad.d_mean.reserve(n_rbf());
  grad.d_cov.reserve(n_rbf());
  const auto offset = static_cast<Eigen::Index>(action * block_size());
  for (std::size_t n = 0; n < n_rbf(); ++n) {
    const double phi_n = phi.values[offset + static_cast<Eigen::Index>(n + 1)];
    const double weight = theta[offset + static_cast<Eigen::Index>(n + 1)];
    const Vec scaled = precisions_[n] * (obs - means_[n]);
    const double common = grad.residual * weight * phi_n;
    // dL/dmu = 2 e w phi Sigma^-1 d ; dL/dSigma = e w phi Sigma^-1 d d^T Sigma^-1
    grad.d_mean.push_back(2.0 * common * scaled);
    grad.d_cov.push_back(common * scaled * scaled.transpose());
  }
  return grad;
}

RgdBranch RbfBank::rgd_update(const VecRef& obs, std::size_t action, const VecRef& theta,
                              double reward) {
  const RbfGradient grad = loss_gradient(obs, action, theta, reward);
  const double loss_value = grad.residual * grad.residual;
  if (loss_value == 0.0) return RgdBranch::kNone;
  const double prediction = grad.residual + reward;
  if (std::sqrt(loss_value) * prediction > 0.0) {
    for (std::size_t n = 0; n < n_rbf(); ++n) {
      if (grad.d_cov[n].isZero(0.0)) continue;
      Mat updated = covariances_[n] - rates_.cov * grad.d_cov[n];
      symmetrize(updated);
      Mat shifted = updated;
      shifted.diagonal().array() -= rates_.cov_floor;
      if (Eigen::LLT<Mat>(shifted).info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Mat> eig(updated);
        const Vec clamped = eig.eigenvalues().cwiseMax(rates_.cov_floor);
        updated = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
        symmetrize(updated);
      }
      covariances_[n] = std::move(updated);
      refresh_precision(n);
    }
    return RgdBranch::kCovariances;
  }
  for (std::size_t n = 0; n < n_rbf(); ++n) means_[n] -= rates_.mean * grad.d_mean[n];
  return RgdBranch::kMeans;
}

double RbfBank::min_cov_eigenvalue() const {
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& c : covariances_) {
    lowest = std::min(lowest, Eigen::SelfAdjointEigenSolver<Mat>(c, Eigen::EigenvaluesOnly)
                                  .eigenvalues()
                                  .minCoeff());
  }
  return lowest;
}

}  // namespace maktd
