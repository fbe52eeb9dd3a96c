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
#include <random>
#include <string>

#include "hsrec/types.hpp"

namespace hsrec {

// Embedding tables are plain row-major matrices: rows = tokens, cols = dim.
template <typename Scalar>
using EmbeddingTable = Matrix<Scalar>;

// Affine map k -> d used to bring item embeddings into the token space.
template <typename Scalar>
struct ProjectionHead {
  Matrix<Scalar> weight;  // d x k
  Vector<Scalar> bias;    // d

  ProjectionHead() = default;
  ProjectionHead(Eigen::Index in_dim, Eigen::Index out_dim)
      : weight(Matrix<Scalar>::Zero(out_dim, in_dim)),
        bias(Vector<Scalar>::Zero(out_dim)) {}

  Eigen::Index in_dim() const { return weight.cols(); }
  Eigen::Index out_dim() const { return weight.rows(); }

  static ProjectionHead identity(Eigen::Index dim) {
    ProjectionHead h(dim, dim);
    h.weight.setIdentity();
    return h;
  }

  template <typename Derived>
  Vector<Scalar> operator()(const Eigen::MatrixBase<Derived>& x) const {
    return weight * x + bias;
  }

  template <typename Other>
  ProjectionHead<Other> cast() const {
    ProjectionHead<Other> h;
    h.weight = weight.template cast<Other>();
    h.bias = bias.template cast<Other>();
    return h;
  }
};

// Row i of the result is head(raw.row(i)).
template <typename Scalar>
Matrix<Scalar> project_items(const Matrix<Scalar>& raw,
                             const ProjectionHead<Scalar>& head) {
  if (raw.cols() != head.in_dim()) {
    throw DataError("projection head expects input dim " +
                    std::to_string(head.in_dim()) + ", item table has " +
                    std::to_string(raw.cols()));
  }
  Matrix<Scalar> out = raw * head.weight.transpose();
  out.rowwise() += head.bias.transpose();
  return out;
}

// Uniform in [-scale, scale], drawn row-major so results only depend on seed.
template <typename Scalar, typename Rng>
void fill_uniform(Matrix<Scalar>& m, double scale, Rng& rng) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = static_cast<Scalar>(dist(rng));
    }
  }
}

template <typename Scalar, typename Rng>
void fill_normal(Matrix<Scalar>& m, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = static_cast<Scalar>(dist(rng));
    }
  }
}

// Learnable item parameters in the raw |I| x k table.
inline std::uint64_t item_parameter_count(std::uint64_t n_items,
                                          std::uint64_t item_dim) {
  return n_items * item_dim;
}

}  // namespace hsrec
