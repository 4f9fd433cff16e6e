#pragma once

// Reference implementations used only by tests. They are written directly
// from the textbook formulas with no shared code paths, so agreement with
// the library is evidence rather than tautology.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Gaussian {
  Vec mean;
  Mat cov;
};

/// Kalman predict with dynamics F, Q.
inline Gaussian kalman_predict(const Gaussian& g, const Mat& F, const Mat& Q) {
  return {F * g.mean, F * g.cov * F.transpose() + Q};
}

/// Vector-measurement Kalman update z = H x + v, v ~ N(0, R), Joseph form.
inline Gaussian kalman_update(const Gaussian& g, const Mat& H, const Vec& z, const Mat& R) {
  const Mat S = H * g.cov * H.transpose() + R;
  const Mat K = g.cov * H.transpose() * S.inverse();
  const Mat I = Mat::Identity(g.cov.rows(), g.cov.cols());
  const Mat A = I - K * H;
  return {g.mean + K * (z - H * g.mean), A * g.cov * A.transpose() + K * R * K.transpose()};
}

inline Gaussian kalman_update_scalar(const Gaussian& g, const Vec& h, double z, double r) {
  Vec zv(1);
  zv << z;
  return kalman_update(g, h.transpose(), zv, Mat::Constant(1, 1, r));
}

/// Multiple-model update: every candidate starts from `prior`, weights are
/// multiplied by the Gaussian innovation density and renormalized.
struct MmaeResult {
  Gaussian fused;
  std::vector<double> weights;
};

inline MmaeResult mmae_update(const Gaussian& prior, const Vec& h, double z,
                              const std::vector<double>& r, std::vector<double> prev_weights) {
  const double pi = 3.14159265358979323846;
  std::vector<Gaussian> post;
  std::vector<double> w(r.size());
  double total = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    post.push_back(kalman_update_scalar(prior, h, z, r[j]));
    const double s = h.dot(prior.cov * h) + r[j];
    const double nu = z - h.dot(prior.mean);
    w[j] = prev_weights[j] * std::exp(-0.5 * nu * nu / s) / std::sqrt(2 * pi * s);
    total += w[j];
  }
  for (auto& x : w) x /= total;
  Gaussian fused{Vec::Zero(prior.mean.size()), Mat::Zero(prior.cov.rows(), prior.cov.cols())};
  for (std::size_t j = 0; j < r.size(); ++j) fused.mean += w[j] * post[j].mean;
  for (std::size_t j = 0; j < r.size(); ++j) {
    const Vec d = post[j].mean - fused.mean;
    fused.cov += w[j] * (post[j].cov + d * d.transpose());
  }
  return {fused, w};
}

/// Explicit H = g^T (x) I_L.
inline Mat kron_measurement(const Vec& g) {
  const auto L = g.size();
  Mat H = Mat::Zero(L, L * L);
  for (Eigen::Index j = 0; j < L; ++j) H.block(0, j * L, L, L) = g[j] * Mat::Identity(L, L);
  return H;
}

/// Deterministic finite MDP on a flat (state, action) table.
struct Mdp {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<std::vector<std::size_t>> next;   // next[s][a]
  std::vector<std::vector<double>> reward;      // reward[s][a]
  std::vector<std::vector<bool>> terminal;      // terminal[s][a]
};

/// Q* by value iteration to machine precision.
inline Mat value_iteration(const Mdp& mdp, double gamma) {
  Mat q = Mat::Zero(static_cast<Eigen::Index>(mdp.n_states), static_cast<Eigen::Index>(mdp.n_actions));
  for (int it = 0; it < 10000; ++it) {
    Mat next = q;
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      for (std::size_t a = 0; a < mdp.n_actions; ++a) {
        double v = mdp.reward[s][a];
        if (!mdp.terminal[s][a]) v += gamma * q.row(static_cast<Eigen::Index>(mdp.next[s][a])).maxCoeff();
        next(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = v;
      }
    }
    const double delta = (next - q).cwiseAbs().maxCoeff();
    q = next;
    if (delta < 1e-15) break;
  }
  return q;
}

/// Successor matrix for a fixed deterministic policy in one-hot feature
/// index space f(s, a) = a * n_states + s:
///   M = ((I - gamma P)^-1)^T,  P[i][j] = 1 when (s,a)=i leads to (s',pi(s'))=j.
inline Mat closed_form_sr(const Mdp& mdp, const std::vector<std::size_t>& policy, double gamma) {
  const auto n = static_cast<Eigen::Index>(mdp.n_states * mdp.n_actions);
  Mat P = Mat::Zero(n, n);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      if (mdp.terminal[s][a]) continue;
      const std::size_t s2 = mdp.next[s][a];
      const auto i = static_cast<Eigen::Index>(a * mdp.n_states + s);
      const auto j = static_cast<Eigen::Index>(policy[s2] * mdp.n_states + s2);
      P(i, j) = 1.0;
    }
  }
  return (Mat::Identity(n, n) - gamma * P).inverse().transpose();
}

/// Squared loss of a linear model over one RBF-encoded action block, with
/// covariances inverted generically (no symmetry assumed).
inline double rbf_loss(const std::vector<Vec>& means, const std::vector<Mat>& covs, const Vec& obs,
                       const Vec& block_weights, double reward) {
  double pred = block_weights[0];
  for (std::size_t n = 0; n < means.size(); ++n) {
    const Vec d = obs - means[n];
    pred += block_weights[static_cast<Eigen::Index>(n + 1)] *
            std::exp(-0.5 * d.dot(covs[n].inverse() * d));
  }
  return (pred - reward) * (pred - reward);
}

}  // namespace oracle
