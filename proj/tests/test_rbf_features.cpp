#include "maktd/rbf_features.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace maktd;

namespace {

RbfBank random_bank(std::size_t n_rbf, std::size_t dim, Rng& rng, RbfRates rates = {}) {
  std::vector<Vec> means;
  std::vector<Mat> covs;
  for (std::size_t n = 0; n < n_rbf; ++n) {
    Vec mu(static_cast<Eigen::Index>(dim));
    for (auto& x : mu) x = 2.0 * uniform01(rng) - 1.0;
    Mat a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (auto& x : a.reshaped()) x = uniform01(rng) - 0.5;
    means.push_back(mu);
    covs.push_back(a * a.transpose() + 0.5 * Mat::Identity(a.rows(), a.cols()));
  }
  return RbfBank(means, covs, rates);
}

Vec random_vec(Eigen::Index n, Rng& rng, double scale = 1.0) {
  Vec v(n);
  for (auto& x : v) x = scale * (2.0 * uniform01(rng) - 1.0);
  return v;
}

}  // namespace

TEST_CASE("state features are exactly one at a mean") {
  Rng rng(3);
  const RbfBank bank = random_bank(4, 3, rng);
  const Vec f = bank.state_features(bank.means()[0]);
  CHECK(f[1] == 1.0);
  CHECK(f[0] == 1.0);
}

TEST_CASE("unit offset under identity covariance gives exp(-1/2)") {
  RbfBank bank({Vec::Zero(2)}, {Mat::Identity(2, 2)});
  Vec obs(2);
  obs << 1.0, 0.0;
  CHECK(bank.state_features(obs)[1] == doctest::Approx(0.606531).epsilon(1e-6));
  CHECK(bank.state_features(obs)[1] == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
}

TEST_CASE("nine RBFs give blocks of ten and fifty state-action features") {
  Rng rng(1);
  const RbfBank bank = RbfBank::random(9, -Vec::Ones(4), Vec::Ones(4), rng);
  const Vec obs = random_vec(4, rng);
  CHECK(bank.state_features(obs).size() == 10);
  const FeatureVector phi = bank.state_action_features(obs, 2, 5);
  CHECK(phi.size() == 50);
  CHECK(phi.block_size == 10);
  CHECK(phi.active_block == 2);
  for (Eigen::Index i = 0; i < 50; ++i) {
    if (i >= 20 && i < 30) {
      CHECK(phi.values[i] > 0.0);
      CHECK(phi.values[i] <= 1.0);
    } else {
      CHECK(phi.values[i] == 0.0);
    }
  }
  CHECK(phi.values[20] == 1.0);
}

TEST_CASE("random banks draw means inside the box with identity covariances") {
  Rng rng(5);
  Vec low(2), high(2);
  low << -1.0, 2.0;
  high << 0.0, 3.0;
  const RbfBank bank = RbfBank::random(20, low, high, rng);
  for (std::size_t n = 0; n < bank.n_rbf(); ++n) {
    CHECK((bank.means()[n].array() >= low.array()).all());
    CHECK((bank.means()[n].array() <= high.array()).all());
    CHECK(bank.covariances()[n].isIdentity(0.0));
  }
}

TEST_CASE("action zero occupies the first block and blocks are orthogonal") {
  Rng rng(2);
  const RbfBank bank = random_bank(3, 2, rng);
  const Vec obs = random_vec(2, rng);
  const FeatureVector a0 = bank.state_action_features(obs, 0, 3);
  CHECK(a0.values.head(4).minCoeff() > 0.0);
  CHECK(a0.values.tail(8).isZero(0.0));
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      const double d = bank.state_action_features(obs, a, 3).values.dot(
          bank.state_action_features(obs, b, 3).values);
      if (a != b) CHECK(d == 0.0);
      if (a == b) CHECK(d > 0.0);
    }
  }
}

TEST_CASE("bad inputs are rejected") {
  Rng rng(2);
  const RbfBank bank = random_bank(3, 2, rng);
  CHECK_THROWS_AS(bank.state_action_features(Vec::Zero(2), 3, 3), InvalidInput);
  CHECK_THROWS_AS(bank.state_features(Vec::Zero(3)), InvalidInput);
  CHECK_THROWS_AS(RbfBank({Vec::Zero(2)}, {Mat::Identity(3, 3)}), InvalidInput);
  Mat indefinite = Mat::Identity(2, 2);
  indefinite(1, 1) = -1.0;
  CHECK_THROWS(RbfBank({Vec::Zero(2)}, {indefinite}));
}

TEST_CASE("squared residual loss") {
  FeatureVector phi = embed_state_action(Vec::Ones(1), 0, 1);
  CHECK(loss(phi, Vec::Constant(1, 3.0), 3.0) == 0.0);
  CHECK(loss(phi, Vec::Zero(1), 2.0) == 4.0);
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec s = random_vec(4, rng);
    const FeatureVector p = embed_state_action(s, 1, 3);
    const Vec theta = random_vec(12, rng);
    const double r = uniform01(rng);
    double direct = -r;
    for (Eigen::Index i = 0; i < 4; ++i) direct += s[i] * theta[4 + i];
    CHECK(loss(p, theta, r) == doctest::Approx(direct * direct).epsilon(1e-12));
  }
}

TEST_CASE("zero loss leaves the bank unchanged") {
  Rng rng(4);
  RbfBank bank = random_bank(3, 2, rng);
  const Vec obs = random_vec(2, rng);
  const Vec theta = random_vec(8, rng);
  const double r = bank.state_action_features(obs, 1, 2).dot(theta);
  const auto means = bank.means();
  const auto covs = bank.covariances();
  CHECK(bank.rgd_update(obs, 1, theta, r) == RgdBranch::kNone);
  for (std::size_t n = 0; n < 3; ++n) {
    CHECK(bank.means()[n] == means[n]);
    CHECK(bank.covariances()[n] == covs[n]);
  }
}

TEST_CASE("positive prediction with nonzero loss moves only covariances") {
  RbfBank bank({Vec::Zero(2), Vec::Ones(2)}, {Mat::Identity(2, 2), Mat::Identity(2, 2)}, {0.1, 0.1, 1e-6});
  Vec obs(2);
  obs << 0.3, 0.4;
  Vec theta(6);
  theta << 0.2, 1.0, 0.5, 0, 0, 0;
  const auto means = bank.means();
  const auto covs = bank.covariances();
  CHECK(bank.rgd_update(obs, 0, theta, 5.0) == RgdBranch::kCovariances);
  CHECK(bank.means()[0] == means[0]);
  CHECK(bank.means()[1] == means[1]);
  CHECK(bank.covariances()[0] != covs[0]);
  CHECK(bank.covariances()[1] != covs[1]);
}

TEST_CASE("non-positive prediction moves only means") {
  RbfBank bank({Vec::Zero(2), Vec::Ones(2)}, {Mat::Identity(2, 2), Mat::Identity(2, 2)}, {0.1, 0.1, 1e-6});
  Vec obs(2);
  obs << 0.3, 0.4;
  Vec theta(6);
  theta << 0.0, 0.0, 0.0, -1.0, -0.5, 0.2;
  const auto means = bank.means();
  const auto covs = bank.covariances();
  CHECK(bank.rgd_update(obs, 1, theta, 1.0) == RgdBranch::kMeans);
  CHECK(bank.means()[0] != means[0]);
  CHECK(bank.covariances()[0] == covs[0]);
  CHECK(bank.covariances()[1] == covs[1]);
}

TEST_CASE("mean step is the negative scaled gradient") {
  Rng rng(12);
  RbfBank bank = random_bank(3, 2, rng, {0.01, 0.01, 1e-6});
  const Vec obs = random_vec(2, rng);
  Vec theta = -random_vec(4, rng).cwiseAbs();
  const RbfGradient g = bank.loss_gradient(obs, 0, theta, 1.0);
  const auto before = bank.means();
  REQUIRE(bank.rgd_update(obs, 0, theta, 1.0) == RgdBranch::kMeans);
  for (std::size_t n = 0; n < 3; ++n) {
    CHECK((bank.means()[n] - (before[n] - 0.01 * g.d_mean[n])).norm() < 1e-15);
  }
}

TEST_CASE("scalar gradient matches central differences") {
  RbfBank bank({Vec::Constant(1, 0.2)}, {Mat::Constant(1, 1, 0.7)});
  const Vec obs = Vec::Constant(1, -0.4);
  Vec theta(2);
  theta << 0.0, 1.3;
  const double r = 0.1;
  const RbfGradient g = bank.loss_gradient(obs, 0, theta, r);
  const double h = 1e-6;
  auto f = [&](double mu, double sigma) {
    return oracle::rbf_loss({Vec::Constant(1, mu)}, {Mat::Constant(1, 1, sigma)}, obs, theta, r);
  };
  const double fd_mu = (f(0.2 + h, 0.7) - f(0.2 - h, 0.7)) / (2 * h);
  const double fd_sigma = (f(0.2, 0.7 + h) - f(0.2, 0.7 - h)) / (2 * h);
  CHECK(std::abs(g.d_mean[0][0] - fd_mu) / std::abs(fd_mu) < 1e-4);
  CHECK(std::abs(g.d_cov[0](0, 0) - fd_sigma) / std::abs(fd_sigma) < 1e-4);
}

TEST_CASE("only the active block receives gradient") {
  Rng rng(8);
  const RbfBank bank = random_bank(2, 2, rng);
  const Vec obs = random_vec(2, rng);
  Vec theta = random_vec(6, rng);
  theta.segment(3, 3).setZero();
  const RbfGradient g = bank.loss_gradient(obs, 1, theta, 0.5);
  for (const auto& d : g.d_mean) CHECK(d.isZero(0.0));
  for (const auto& d : g.d_cov) CHECK(d.isZero(0.0));
}

TEST_CASE("covariances stay symmetric above the floor after many steps") {
  Rng rng(21);
  const double floor = 1e-3;
  RbfBank bank = random_bank(4, 3, rng, {0.05, 0.5, floor});
  for (int k = 0; k < 2000; ++k) {
    const Vec obs = random_vec(3, rng);
    const Vec theta = random_vec(10, rng, 3.0);
    const auto branch = bank.rgd_update(obs, uniform_index(rng, 2), theta, 5.0 * uniform01(rng) - 2.0);
    CHECK(branch != RgdBranch::kNone);
  }
  for (std::size_t n = 0; n < bank.n_rbf(); ++n) {
    const Mat& c = bank.covariances()[n];
    CHECK((c - c.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((bank.precisions()[n] * c - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-6);
  }
  CHECK(bank.min_cov_eigenvalue() >= floor * (1 - 1e-9));
}
