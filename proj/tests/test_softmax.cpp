/* Copyright 2026 The hsrec Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "hsrec/softmax.hpp"
#include "test_support.hpp"

namespace hsrec {
namespace {

using testing::Instance;
using testing::random_instance;

double logsumexp_direct(const Eigen::VectorXd& x) { return std::log(x.array().exp().sum()); }

TEST(FullSoftmaxTest, EqualEmbeddingsGiveUniform) {
  Matrix<double> text = Matrix<double>::Constant(4, 3, 0.2);
  Matrix<double> items = Matrix<double>::Constant(6, 3, 0.2);
  Matrix<double> centroids(0, 3);
  const OutputLayer<double> layer{text, items, centroids};
  Vector<double> o(3);
  o << 1.0, -2.0, 0.5;
  for (std::uint32_t w = 0; w < 10; ++w) {
    EXPECT_NEAR(full_logprob(o, layer.space().token(w), layer), std::log(0.1), 1e-12);
  }
  const auto g = nll_and_grad(o, TokenId::item(2), layer, nullptr, SoftmaxMode::kFull);
  EXPECT_NEAR(g.loss, std::log(10.0), 1e-12);
}

TEST(FullSoftmaxTest, TwoTokenClosedForm) {
  Matrix<double> text(1, 1), items(1, 1), centroids(0, 1);
  text << 0.0;
  items << std::log(3.0);
  const OutputLayer<double> layer{text, items, centroids};
  Vector<double> o(1);
  o << 1.0;
  EXPECT_NEAR(std::exp(full_logprob(o, TokenId::text(0), layer)), 0.25, 1e-15);
  EXPECT_NEAR(std::exp(full_logprob(o, TokenId::item(0), layer)), 0.75, 1e-15);
}

TEST(FullSoftmaxTest, MatchesDirectSummation) {
  const auto in = random_instance<double>(20, 30, 5, 8, 3, 0.5);
  const auto layer = in.layer();
  Eigen::VectorXd logits(50);
  for (std::uint32_t w = 0; w < 50; ++w) logits[w] = layer.token_row(w).dot(in.o.transpose());
  const double lse = logsumexp_direct(logits);
  for (std::uint32_t w = 0; w < 50; ++w) {
    EXPECT_NEAR(full_logprob(in.o, in.space().token(w), layer), logits[w] - lse, 1e-10);
  }
}

TEST(TwoLevelTest, SingletonClusterHasNoSecondLevelTerm) {
  const auto in = random_instance<double>(6, 9, 3, 4, 11);
  const auto layer = in.layer();
  const auto cs = cluster_scores(in.o, layer, in.map);
  for (std::uint32_t v = 0; v < 6; ++v) {
    EXPECT_EQ(two_level_logprob(in.o, TokenId::text(v), layer, in.map), cs.log_prob(v));
  }
}

// Three text tokens at 0.1 each, item cluster c1 at 0.6 with members
// (0.3, 0.4, 0.3) and item cluster c2 at 0.1 with members (0.5, 0.5).
struct WorkedExample {
  Matrix<double> text{3, 1}, items{5, 1}, centroids{2, 1};
  ClusterMap map{TokenSpace(3, 5), {0, 0, 0, 1, 1}, 2};
  Vector<double> o = Vector<double>::Ones(1);

  WorkedExample() {
    text.setConstant(std::log(0.1));
    items << std::log(0.3), std::log(0.4), std::log(0.3), std::log(0.5), std::log(0.5);
    centroids << std::log(0.6), std::log(0.1);
  }
  OutputLayer<double> layer() const { return {text, items, centroids}; }
};

TEST(TwoLevelTest, WorkedExampleProduct) {
  const WorkedExample f;
  EXPECT_NEAR(std::exp(two_level_logprob(f.o, TokenId::item(1), f.layer(), f.map)), 0.24, 1e-12);
  EXPECT_NEAR(std::exp(two_level_logprob(f.o, TokenId::item(3), f.layer(), f.map)), 0.05, 1e-12);
}

TEST(TwoLevelTest, MatchesUnshiftedReference) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto in = random_instance<double>(15, 40, 6, 5, seed);
    const auto ref = testing::brute_two_level(in);
    const auto all = score_all(in.o, in.layer(), &in.map, SoftmaxMode::kTwoLevel);
    for (std::uint32_t w = 0; w < 55; ++w) {
      EXPECT_NEAR(all[w], ref[w], 1e-10);
      EXPECT_EQ(all[w], two_level_logprob(in.o, in.space().token(w), in.layer(), in.map));
    }
  }
}

TEST(TwoLevelTest, NormalizesOverRandomInstances) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto in = random_instance<double>(30, 200, 15, 6, seed, 1.0);
    const auto all = score_all(in.o, in.layer(), &in.map, SoftmaxMode::kTwoLevel);
    EXPECT_NEAR(all.array().exp().sum(), 1.0, 1e-9) << "seed " << seed;
  }
}

TEST(TwoLevelTest, CostIsClustersPlusOwnCluster) {
  const auto in = random_instance<double>(10, 37, 5, 4, 2);
  for (std::uint32_t w : {0u, 9u, 10u, 30u, 46u}) {
    CostCounter cost;
    two_level_logprob(in.o, in.space().token(w), in.layer(), in.map, &cost);
    EXPECT_EQ(cost.dots, in.map.n_clusters() + in.map.members(in.map.cluster_of(w)).size());
  }
  CostCounter full;
  full_logprob(in.o, TokenId::item(0), in.layer(), &full);
  EXPECT_EQ(full.dots, 47u);
  EXPECT_EQ(full.to_json(), "{\"dots\": 47}");
}

TEST(TwoLevelTest, TrainingCostAtDeskScale) {
  const auto in = random_instance<float>(1000, 10000, 100, 8, 4);
  CostCounter two, full;
  nll_and_grad(in.o, TokenId::item(1234), in.layer(), &in.map, SoftmaxMode::kTwoLevel, &two);
  nll_and_grad(in.o, TokenId::item(1234), in.layer(), &in.map, SoftmaxMode::kFull, &full);
  EXPECT_EQ(two.dots, 1100u + 100u);
  EXPECT_LE(two.dots, two_level_cost_bound(in.map));
  EXPECT_EQ(full.dots, 11000u);
  EXPECT_GE(double(full.dots) / double(two.dots), 5.0);
}

TEST(ScoreAllTest, FullArgmaxMatchesEnumeration) {
  const auto in = random_instance<double>(12, 25, 5, 6, 8, 0.8);
  const auto all = score_all(in.o, in.layer(), nullptr, SoftmaxMode::kFull);
  std::uint32_t best = 0;
  double best_lp = -1e300;
  for (std::uint32_t w = 0; w < 37; ++w) {
    const double lp = full_logprob(in.o, in.space().token(w), in.layer());
    if (lp > best_lp) best_lp = lp, best = w;
  }
  Eigen::Index arg;
  all.maxCoeff(&arg);
  EXPECT_EQ(std::uint32_t(arg), best);
  EXPECT_NEAR(all.array().exp().sum(), 1.0, 1e-12);
}

TEST(ScoreAllTest, FullAndTwoLevelDiffer) {
  const auto in = random_instance<double>(12, 25, 5, 6, 8, 0.8);
  const auto full = score_all(in.o, in.layer(), &in.map, SoftmaxMode::kFull);
  const auto two = score_all(in.o, in.layer(), &in.map, SoftmaxMode::kTwoLevel);
  EXPECT_GT((full - two).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_THROW(score_all(in.o, in.layer(), nullptr, SoftmaxMode::kTwoLevel), UsageError);
}

TEST(StabilityTest, HugeLogitsStayFinite) {
  auto in = random_instance<double>(5, 20, 4, 3, 1);
  in.o *= 1e4 / in.o.cwiseAbs().maxCoeff();
  in.text *= 10;
  in.items *= 10;
  in.centroids *= 10;
  for (auto mode : {SoftmaxMode::kFull, SoftmaxMode::kTwoLevel}) {
    const auto all = score_all(in.o, in.layer(), &in.map, mode);
    EXPECT_TRUE(all.allFinite());
    EXPECT_NEAR(all.array().exp().sum(), 1.0, 1e-9);
    const auto g = nll_and_grad(in.o, TokenId::item(3), in.layer(), &in.map, mode);
    EXPECT_TRUE(std::isfinite(g.loss));
    EXPECT_TRUE(g.grad_o.allFinite());
  }
}

// loss as a function of every table, for finite differences
double loss_of(const Instance<double>& in, TokenId target, SoftmaxMode mode) {
  return mode == SoftmaxMode::kFull ? -full_logprob(in.o, target, in.layer())
                                    : -two_level_logprob(in.o, target, in.layer(), in.map);
}

double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / scale;
}

TEST(GradientTest, MatchesCentralDifferences) {
  const double eps = 1e-5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (auto mode : {SoftmaxMode::kFull, SoftmaxMode::kTwoLevel}) {
      auto in = random_instance<double>(4, 11, 3, 5, 100 + seed, 0.7);
      const TokenId target = seed % 3 == 0 ? TokenId::text(seed % 4) : TokenId::item(seed % 11);
      const auto g = nll_and_grad(in.o, target, in.layer(), &in.map, mode);
      EXPECT_NEAR(g.loss, loss_of(in, target, mode), 1e-12);

      // analytic dense gradients from the (row, coef) form
      Matrix<double> gt = Matrix<double>::Zero(4, 5), gi = Matrix<double>::Zero(11, 5),
                     gc = Matrix<double>::Zero(3, 5);
      for (auto [w, c] : g.token_coef) {
        if (w < 4) gt.row(w) += c * in.o.transpose();
        else gi.row(w - 4) += c * in.o.transpose();
      }
      for (auto [cl, c] : g.centroid_coef) {
        if (in.map.is_text_cluster(cl)) gt.row(cl) += c * in.o.transpose();
        else gc.row(in.map.centroid_row(cl)) += c * in.o.transpose();
      }

      auto fd = [&](auto& param) {
        Eigen::VectorXd out(param.size());
        for (Eigen::Index k = 0; k < param.size(); ++k) {
          const double keep = param.data()[k];
          param.data()[k] = keep + eps;
          const double up = loss_of(in, target, mode);
          param.data()[k] = keep - eps;
          const double down = loss_of(in, target, mode);
          param.data()[k] = keep;
          out[k] = (up - down) / (2 * eps);
        }
        return out;
      };
      auto flat = [](const Matrix<double>& m) {
        return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()).eval();
      };
      EXPECT_LT(relative_error(g.grad_o, fd(in.o)), 1e-4) << "o, seed " << seed;
      EXPECT_LT(relative_error(flat(gt), fd(in.text)), 1e-4) << "text, seed " << seed;
      EXPECT_LT(relative_error(flat(gi), fd(in.items)), 1e-4) << "items, seed " << seed;
      if (mode == SoftmaxMode::kTwoLevel) {
        EXPECT_LT(relative_error(flat(gc), fd(in.centroids)), 1e-4) << "centroids, seed " << seed;
      }
    }
  }
}

TEST(GradientTest, TwoLevelTouchesOnlyCentroidsAndTargetCluster) {
  const auto in = random_instance<double>(8, 60, 7, 4, 5);
  const TokenId target = TokenId::item(17);
  const auto g = nll_and_grad(in.o, target, in.layer(), &in.map, SoftmaxMode::kTwoLevel);
  const auto tc = in.map.cluster_of(target);
  EXPECT_EQ(g.centroid_coef.size(), in.map.n_clusters());
  EXPECT_EQ(g.token_coef.size(), in.map.members(tc).size());
  for (auto [w, c] : g.token_coef) EXPECT_EQ(in.map.cluster_of(w), tc);
}

}  // namespace
}  // namespace hsrec
