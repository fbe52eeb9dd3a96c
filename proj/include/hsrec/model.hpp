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

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

#include "hsrec/cluster_map.hpp"
#include "hsrec/clustering.hpp"
#include "hsrec/embedding.hpp"
#include "hsrec/softmax.hpp"
#include "hsrec/types.hpp"

namespace hsrec {

// Two-layer MLP o = W2 tanh(W1 x + b1) + b2 applied to the mean input
// embedding.
template <typename Scalar>
struct EncoderParams {
  Matrix<Scalar> w1;  // hidden x d
  Vector<Scalar> b1;  // hidden
  Matrix<Scalar> w2;  // d x hidden
  Vector<Scalar> b2;  // d

  Eigen::Index dim() const { return w1.cols(); }
  Eigen::Index hidden() const { return w1.rows(); }

  template <typename Other>
  EncoderParams<Other> cast() const {
    return {w1.template cast<Other>(), b1.template cast<Other>(),
            w2.template cast<Other>(), b2.template cast<Other>()};
  }
};

struct ModelShape {
  std::uint32_t n_text = 0;
  std::uint32_t n_items = 0;
  std::uint32_t dim = 64;        // d
  std::uint32_t item_dim = 512;  // k
  std::uint32_t hidden = 64;
};

template <typename Scalar>
struct Model {
  TokenSpace space;
  SoftmaxMode mode = SoftmaxMode::kTwoLevel;
  Matrix<Scalar> text;      // E^V, |V| x d
  Matrix<Scalar> item_raw;  // |I| x k
  ProjectionHead<Scalar> head;
  Matrix<Scalar> centroids;  // item-cluster rows of E^C
  EncoderParams<Scalar> encoder;
  std::optional<ClusterMap> clusters;
  // Bumped on every parameter update; derived indexes record it.
  std::uint64_t version = 0;

  Eigen::Index dim() const { return head.out_dim(); }
  Eigen::Index item_dim() const { return head.in_dim(); }

  Matrix<Scalar> projected_items() const { return project_items(item_raw, head); }

  OutputLayer<Scalar> output(const Matrix<Scalar>& projected) const {
    return {text, projected, centroids};
  }

  const ClusterMap* cluster_map() const { return clusters ? &*clusters : nullptr; }

  bool all_finite() const {
    return text.allFinite() && item_raw.allFinite() && head.weight.allFinite() &&
           head.bias.allFinite() && centroids.allFinite() && encoder.w1.allFinite() &&
           encoder.b1.allFinite() && encoder.w2.allFinite() && encoder.b2.allFinite();
  }

  template <typename Other>
  Model<Other> cast() const {
    Model<Other> m;
    m.space = space;
    m.mode = mode;
    m.text = text.template cast<Other>();
    m.item_raw = item_raw.template cast<Other>();
    m.head = head.template cast<Other>();
    m.centroids = centroids.template cast<Other>();
    m.encoder = encoder.template cast<Other>();
    m.clusters = clusters;
    m.version = version;
    return m;
  }
};

// Random initialisation: embeddings and MLP weights uniform in +-1/sqrt(fan_in),
// biases zero, centroids per `centroid_init` over the initial projections.
template <typename Scalar>
Model<Scalar> init_model(const ModelShape& shape, SoftmaxMode mode,
                         std::optional<ClusterMap> clusters, std::uint64_t seed,
                         CentroidInit centroid_init = CentroidInit::kMean) {
  if (mode == SoftmaxMode::kTwoLevel && !clusters) {
    throw UsageError("two-level softmax needs a cluster map");
  }
  std::mt19937_64 rng(seed);
  Model<Scalar> m;
  m.space = TokenSpace(shape.n_text, shape.n_items);
  m.mode = mode;
  m.text.resize(shape.n_text, shape.dim);
  fill_uniform(m.text, 1.0 / std::sqrt(double(shape.dim)), rng);
  m.item_raw.resize(shape.n_items, shape.item_dim);
  fill_uniform(m.item_raw, 1.0 / std::sqrt(double(shape.item_dim)), rng);
  m.head = ProjectionHead<Scalar>(shape.item_dim, shape.dim);
  // keeps projected rows on the same scale as E^V rows
  fill_uniform(m.head.weight, std::sqrt(3.0 / double(shape.dim)), rng);
  m.encoder.w1.resize(shape.hidden, shape.dim);
  fill_uniform(m.encoder.w1, 1.0 / std::sqrt(double(shape.dim)), rng);
  m.encoder.b1 = Vector<Scalar>::Zero(shape.hidden);
  m.encoder.w2.resize(shape.dim, shape.hidden);
  fill_uniform(m.encoder.w2, 1.0 / std::sqrt(double(shape.hidden)), rng);
  m.encoder.b2 = Vector<Scalar>::Zero(shape.dim);
  if (clusters) {
    if (!(clusters->space() == m.space)) {
      throw DataError("cluster map does not match the model token space");
    }
    m.centroids = init_centroids(*clusters, m.projected_items(), m.text,
                                 centroid_init, seed ^ 0x9e3779b97f4a7c15ULL);
  } else {
    m.centroids.resize(0, shape.dim);
  }
  m.clusters = std::move(clusters);
  return m;
}

}  // namespace hsrec
