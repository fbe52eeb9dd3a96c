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

// Output distributions over the mixed text/item token space.
//
// Full softmax normalises <o, e_w> over every token. The two-level softmax
// factors P(w|H) = P(c(w)|H) * P(w|c(w),H): a softmax over cluster centroids
// followed by a softmax restricted to the members of w's cluster. Text tokens
// are singleton clusters whose centroid is their own E^V row.
//
// All probabilities are handled as max-shifted log-sum-exp in double.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hsrec/cluster_map.hpp"
#include "hsrec/types.hpp"

namespace hsrec {

// Number of d-dimensional dot products spent by an operation.
struct CostCounter {
  std::uint64_t dots = 0;

  void add(std::uint64_t n) { dots += n; }
  std::string to_json() const {
    return "{\"dots\": " + std::to_string(dots) + "}";
  }
};

// Read-only view of the output embeddings. `items` holds the projected
// (d-dim) item embeddings; `centroids` holds E^C rows for item clusters only.
template <typename Scalar>
struct OutputLayer {
  const Matrix<Scalar>& text;
  const Matrix<Scalar>& items;
  const Matrix<Scalar>& centroids;

  TokenSpace space() const {
    return {static_cast<std::uint32_t>(text.rows()),
            static_cast<std::uint32_t>(items.rows())};
  }
  Eigen::Index dim() const { return items.rows() > 0 ? items.cols() : text.cols(); }

  auto token_row(std::uint32_t ordinal) const {
    const auto n_text = static_cast<std::uint32_t>(text.rows());
    return ordinal < n_text ? text.row(ordinal) : items.row(ordinal - n_text);
  }

  auto centroid_row(const ClusterMap& map, std::uint32_t cluster) const {
    return map.is_text_cluster(cluster) ? text.row(cluster)
                                        : centroids.row(map.centroid_row(cluster));
  }
};

// Running max-shifted log-sum-exp.
class LogSumExp {
 public:
  void add(double x) {
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  double value() const { return max_ + std::log(sum_); }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

inline double log_sum_exp(const std::vector<double>& xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

template <typename Scalar, typename Derived>
double dot(const Eigen::MatrixBase<Derived>& row, const Vector<Scalar>& o) {
  return static_cast<double>(row.dot(o.transpose()));
}

// First level: logits <o, e_c> for every cluster and their log-partition.
struct ClusterScores {
  std::vector<double> logits;
  double log_partition = 0;

  double log_prob(std::uint32_t c) const { return logits[c] - log_partition; }
};

template <typename Scalar>
ClusterScores cluster_scores(const Vector<Scalar>& o,
                             const OutputLayer<Scalar>& layer,
                             const ClusterMap& map, CostCounter* cost = nullptr) {
  ClusterScores s;
  s.logits.resize(map.n_clusters());
  for (std::uint32_t c = 0; c < map.n_clusters(); ++c) {
    s.logits[c] = dot<Scalar>(layer.centroid_row(map, c), o);
  }
  s.log_partition = log_sum_exp(s.logits);
  if (cost) cost->add(map.n_clusters());
  return s;
}

// Second level for one cluster: writes log P(w|H) for each member, in member
// order, given log P(c|H). Every engine routes through this function so the
// scores it produces are bit-identical across engines.
template <typename Scalar>
void cluster_member_logprobs(const Vector<Scalar>& o,
                             const OutputLayer<Scalar>& layer,
                             const ClusterMap& map, std::uint32_t cluster,
                             double cluster_log_prob, std::vector<double>& out,
                             CostCounter* cost = nullptr) {
  const auto& members = map.members(cluster);
  out.resize(members.size());
  for (std::size_t j = 0; j < members.size(); ++j) {
    out[j] = dot<Scalar>(layer.token_row(members[j]), o);
  }
  const double lse = log_sum_exp(out);
  for (auto& x : out) x = cluster_log_prob + (x - lse);
  if (cost) cost->add(members.size());
}

template <typename Scalar>
double full_logprob(const Vector<Scalar>& o, TokenId w,
                    const OutputLayer<Scalar>& layer, CostCounter* cost = nullptr) {
  const TokenSpace space = layer.space();
  const std::uint32_t target = space.ordinal(w);
  LogSumExp lse;
  double target_logit = 0;
  for (std::uint32_t t = 0; t < space.size(); ++t) {
    const double s = dot<Scalar>(layer.token_row(t), o);
    lse.add(s);
    if (t == target) target_logit = s;
  }
  if (cost) cost->add(space.size());
  return target_logit - lse.value();
}

template <typename Scalar>
double two_level_logprob(const Vector<Scalar>& o, TokenId w,
                         const OutputLayer<Scalar>& layer, const ClusterMap& map,
                         CostCounter* cost = nullptr) {
  const std::uint32_t target = map.space().ordinal(w);
  const std::uint32_t c = map.cluster_of(target);
  const ClusterScores cs = cluster_scores(o, layer, map, cost);
  std::vector<double> member_lp;
  cluster_member_logprobs(o, layer, map, c, cs.log_prob(c), member_lp, cost);
  const auto& members = map.members(c);
  const auto pos = std::lower_bound(members.begin(), members.end(), target) - members.begin();
  return member_lp[pos];
}

// log P(w|H) for every token ordinal under the chosen mode.
template <typename Scalar>
Eigen::VectorXd score_all(const Vector<Scalar>& o, const OutputLayer<Scalar>& layer,
                          const ClusterMap* map, SoftmaxMode mode,
                          CostCounter* cost = nullptr) {
  const TokenSpace space = layer.space();
  Eigen::VectorXd out(space.size());
  if (mode == SoftmaxMode::kFull) {
    for (std::uint32_t t = 0; t < space.size(); ++t) {
      out[t] = dot<Scalar>(layer.token_row(t), o);
    }
    if (cost) cost->add(space.size());
    const double m = out.maxCoeff();
    const double lse = m + std::log((out.array() - m).exp().sum());
    out.array() -= lse;
    return out;
  }
  if (!map) throw UsageError("two-level scoring requires a cluster map");
  const ClusterScores cs = cluster_scores(o, layer, *map, cost);
  std::vector<double> member_lp;
  for (std::uint32_t c = 0; c < map->n_clusters(); ++c) {
    cluster_member_logprobs(o, layer, *map, c, cs.log_prob(c), member_lp, cost);
    const auto& members = map->members(c);
    for (std::size_t j = 0; j < members.size(); ++j) out[members[j]] = member_lp[j];
  }
  return out;
}

// Loss and exact gradients of -log P(target|H).
//
// Every embedding gradient is a multiple of o: d loss / d e_w = coef_w * o.
// They are therefore returned as (row, coef) pairs; `centroid_coef` is keyed
// by cluster id, and text-token clusters refer to E^V rows.
template <typename Scalar>
struct LossGrad {
  double loss = 0;
  Vector<Scalar> grad_o;
  std::vector<std::pair<std::uint32_t, Scalar>> token_coef;     // by ordinal
  std::vector<std::pair<std::uint32_t, Scalar>> centroid_coef;  // by cluster
};

template <typename Scalar>
LossGrad<Scalar> nll_and_grad(const Vector<Scalar>& o, TokenId target,
                              const OutputLayer<Scalar>& layer,
                              const ClusterMap* map, SoftmaxMode mode,
                              CostCounter* cost = nullptr) {
  const TokenSpace space = layer.space();
  const std::uint32_t t = space.ordinal(target);
  const Eigen::Index d = o.size();
  LossGrad<Scalar> g;
  Vector<double> grad_o = Vector<double>::Zero(d);

  // softmax over `rows` given their logits: accumulates E_p[e] - e_target
  // into grad_o and returns -log p(target_pos).
  auto level = [&](const std::vector<double>& logits, auto&& row_of,
                   std::size_t target_pos, auto& coefs, auto&& key_of) {
    const double lse = log_sum_exp(logits);
    coefs.reserve(coefs.size() + logits.size());
    for (std::size_t j = 0; j < logits.size(); ++j) {
      const double p = std::exp(logits[j] - lse);
      const double coef = p - (j == target_pos ? 1.0 : 0.0);
      grad_o += coef * row_of(j).transpose().template cast<double>();
      coefs.emplace_back(key_of(j), static_cast<Scalar>(coef));
    }
    return lse - logits[target_pos];
  };

  if (mode == SoftmaxMode::kFull) {
    std::vector<double> logits(space.size());
    for (std::uint32_t w = 0; w < space.size(); ++w) {
      logits[w] = dot<Scalar>(layer.token_row(w), o);
    }
    if (cost) cost->add(space.size());
    g.loss = level(
        logits, [&](std::size_t j) { return layer.token_row(static_cast<std::uint32_t>(j)); },
        t, g.token_coef, [](std::size_t j) { return static_cast<std::uint32_t>(j); });
  } else {
    if (!map) throw UsageError("two-level loss requires a cluster map");
    const std::uint32_t tc = map->cluster_of(t);
    const ClusterScores cs = cluster_scores(o, layer, *map, cost);
    g.loss = level(
        cs.logits, [&](std::size_t c) { return layer.centroid_row(*map, static_cast<std::uint32_t>(c)); },
        tc, g.centroid_coef, [](std::size_t c) { return static_cast<std::uint32_t>(c); });

    const auto& members = map->members(tc);
    std::vector<double> logits(members.size());
    std::size_t target_pos = 0;
    for (std::size_t j = 0; j < members.size(); ++j) {
      logits[j] = dot<Scalar>(layer.token_row(members[j]), o);
      if (members[j] == t) target_pos = j;
    }
    if (cost) cost->add(members.size());
    g.loss += level(
        logits, [&](std::size_t j) { return layer.token_row(members[j]); },
        target_pos, g.token_coef, [&](std::size_t j) { return members[j]; });
  }
  g.grad_o = grad_o.template cast<Scalar>();
  return g;
}

// Upper bound on dots per training example for the two-level softmax.
inline std::uint64_t two_level_cost_bound(const ClusterMap& map) {
  return std::uint64_t(map.n_clusters()) + map.max_cluster_size();
}

}  // namespace hsrec
