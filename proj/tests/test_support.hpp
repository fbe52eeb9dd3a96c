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

// Random output-layer instances shared by the test binaries.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hsrec/cluster_map.hpp"
#include "hsrec/clustering.hpp"
#include "hsrec/softmax.hpp"
#include "hsrec/types.hpp"

namespace hsrec::testing {

template <typename Scalar>
struct Instance {
  Matrix<Scalar> text;
  Matrix<Scalar> items;
  Matrix<Scalar> centroids;
  ClusterMap map;
  Vector<Scalar> o;

  OutputLayer<Scalar> layer() const { return {text, items, centroids}; }
  TokenSpace space() const { return map.space(); }
};

template <typename Scalar>
Matrix<Scalar> random_matrix(Eigen::Index rows, Eigen::Index cols, double scale,
                             std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix<Scalar> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(dist(rng));
  return m;
}

// Balanced random clusters, Gaussian embeddings with standard deviation
// `scale`, query vector with unit-variance entries.
template <typename Scalar>
Instance<Scalar> random_instance(std::uint32_t n_text, std::uint32_t n_items,
                                 std::uint32_t n_clusters, Eigen::Index dim,
                                 std::uint64_t seed, double scale = 0.3) {
  std::mt19937_64 rng(seed);
  Instance<Scalar> in;
  const TokenSpace space(n_text, n_items);
  in.map = cluster_random(space, n_clusters, seed + 17);
  in.text = random_matrix<Scalar>(n_text, dim, scale, rng);
  in.items = random_matrix<Scalar>(n_items, dim, scale, rng);
  in.centroids = random_matrix<Scalar>(n_clusters, dim, scale, rng);
  Matrix<Scalar> o = random_matrix<Scalar>(dim, 1, 1.0, rng);
  in.o = o.col(0);
  return in;
}

// Independent f64 reference: log P(w|H) by direct summation, no shifting.
inline std::vector<double> brute_two_level(const Instance<double>& in) {
  const auto& map = in.map;
  const auto layer = in.layer();
  std::vector<double> cz(map.n_clusters());
  double z = 0;
  for (std::uint32_t c = 0; c < map.n_clusters(); ++c) {
    cz[c] = std::exp(layer.centroid_row(map, c).dot(in.o.transpose()));
    z += cz[c];
  }
  std::vector<double> out(map.space().size());
  for (std::uint32_t c = 0; c < map.n_clusters(); ++c) {
    double zc = 0;
    for (auto w : map.members(c)) zc += std::exp(layer.token_row(w).dot(in.o.transpose()));
    for (auto w : map.members(c)) {
      out[w] = std::log(cz[c] / z) +
               std::log(std::exp(layer.token_row(w).dot(in.o.transpose())) / zc);
    }
  }
  return out;
}

}  // namespace hsrec::testing
