#pragma once

#include "maktd/common.hpp"
#include "maktd/rng.hpp"

#include <vector>

namespace maktd {

/// A state-action feature vector: `n_actions` blocks of `block_size`
/// entries, only the block of `active_block` may be nonzero.
struct FeatureVector {
  Vec values;
  std::size_t block_size = 0;
  std::size_t active_block = 0;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  auto active() const {
    return values.segment(static_cast<Eigen::Index>(active_block * block_size),
                          static_cast<Eigen::Index>(block_size));
  }
  double dot(const VecRef& weights) const;
};

/// Places `state_features` into the block of `action`, zeros elsewhere.
FeatureVector embed_state_action(const VecRef& state_features, std::size_t action,
                                 std::size_t n_actions);

/// Squared residual of the linear reward/value model, (phi^T theta - r)^2.
double loss(const FeatureVector& phi, const VecRef& theta, double reward);

enum class RgdBranch { kNone, kMeans, kCovariances };

struct RbfRates {
  double mean = 1e-3;
  double cov = 1e-3;
  double cov_floor = 1e-6;
};

/// Gradient of the squared loss with respect to every RBF's mean and
/// covariance (covariance entries treated as independent parameters).
struct RbfGradient {
  double residual = 0.0;  ///< phi^T theta - r
  std::vector<Vec> d_mean;
  std::vector<Mat> d_cov;
};

/// Bank of Gaussian radial basis functions plus a constant bias. The state
/// feature vector is [1, phi_1(x), ..., phi_n(x)], so one action block holds
/// n_rbf + 1 entries.
class RbfBank {
 public:
  RbfBank(std::vector<Vec> means, std::vector<Mat> covariances, RbfRates rates = {});

  /// Means uniform in the box [low, high], identity covariances.
  static RbfBank random(std::size_t n_rbf, const VecRef& low, const VecRef& high, Rng& rng,
                        RbfRates rates = {});

  std::size_t n_rbf() const { return means_.size(); }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t block_size() const { return means_.size() + 1; }
  const RbfRates& rates() const { return rates_; }
  const std::vector<Vec>& means() const { return means_; }
  const std::vector<Mat>& covariances() const { return covariances_; }
  const std::vector<Mat>& precisions() const { return precisions_; }

  Vec state_features(const VecRef& obs) const;
  FeatureVector state_action_features(const VecRef& obs, std::size_t action,
                                      std::size_t n_actions) const;

  /// Analytic gradient of (phi(s,a)^T theta - r)^2. Only RBFs of the active
  /// action block carry signal; `theta` is the full L-length weight vector.
  RbfGradient loss_gradient(const VecRef& obs, std::size_t action, const VecRef& theta,
                            double reward) const;

  /// One restricted gradient step: covariances move when the loss is
  /// nonzero and phi^T theta > 0, means move otherwise. Never both.
  RgdBranch rgd_update(const VecRef& obs, std::size_t action, const VecRef& theta, double reward);

  /// Smallest eigenvalue over all covariances.
  double min_cov_eigenvalue() const;

 private:
  void check_obs(const VecRef& obs) const;
  void refresh_precision(std::size_t n);

  std::size_t obs_dim_ = 0;
  std::vector<Vec> means_;
  std::vector<Mat> covariances_;
  std::vector<Mat> precisions_;
  RbfRates rates_;
};

}  // namespace maktd
