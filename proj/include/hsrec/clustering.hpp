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
#include <vector>

#include "hsrec/catalog.hpp"
#include "hsrec/cluster_map.hpp"
#include "hsrec/types.hpp"

namespace hsrec {

enum class ClusteringMethod { kKMeans, kFrequency, kRandom };

const char* to_string(ClusteringMethod m);
ClusteringMethod parse_clustering_method(const std::string& s);

// ceil(sqrt(n_items)), at least 1.
std::uint32_t default_cluster_count(std::uint32_t n_items);

struct KMeansOptions {
  int max_iterations = 50;
  double relative_tolerance = 1e-4;  // on ||C_new - C_old|| / ||C_old||
};

struct KMeansResult {
  std::vector<std::uint32_t> assignment;
  Matrix<double> centroids;
  double objective = 0;  // sum of squared distances to assigned centroid
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding. Empty clusters are refilled with
// the point farthest from its current centroid.
KMeansResult kmeans(const Matrix<double>& points, std::uint32_t n_clusters,
                    std::uint64_t seed, const KMeansOptions& options = {});

ClusterMap cluster_kmeans(TokenSpace space, const Matrix<double>& item_vectors,
                          std::uint32_t n_clusters, std::uint64_t seed,
                          const KMeansOptions& options = {});

// Items sorted by (count desc, index asc), cut into near-equal contiguous bins.
ClusterMap cluster_frequency(TokenSpace space,
                             const std::vector<std::uint64_t>& counts,
                             std::uint32_t n_clusters);

// Seeded shuffle then near-equal contiguous bins.
ClusterMap cluster_random(TokenSpace space, std::uint32_t n_clusters,
                          std::uint64_t seed);

// Bin sizes for splitting n elements into k near-equal contiguous bins.
std::vector<std::uint32_t> near_equal_bins(std::uint32_t n, std::uint32_t k);

// Item interaction counts over the training portion of the splits.
std::vector<std::uint64_t> train_item_counts(const Splits& splits,
                                             std::uint32_t n_items);

// Low-rank item vectors from the item x user incidence of the train split
// (randomized SVD, rows L2-normalised). Stand-in for pretrained item
// embeddings when none are supplied.
Matrix<double> item_cooccurrence_features(const Splits& splits,
                                          std::uint32_t n_items,
                                          std::uint32_t dim, std::uint64_t seed);

// Reads an |I| x p feature file: one whitespace/comma separated row per item.
Matrix<double> read_item_features(const std::string& path, std::uint32_t n_items);

// Builds a cluster map with the chosen method; k-means runs on
// item_cooccurrence_features (p = 32) unless `features` is given.
ClusterMap make_cluster_map(ClusteringMethod method, TokenSpace space,
                            const Splits& splits, std::uint32_t n_clusters,
                            std::uint64_t seed, const Matrix<double>* features = nullptr);

enum class CentroidInit { kMean, kRandom };

// Rows of E^C for the item clusters only; text-token clusters reuse their
// E^V row and have no entry here.
template <typename Scalar>
Matrix<Scalar> init_centroids(const ClusterMap& map,
                              const Matrix<Scalar>& items_projected,
                              const Matrix<Scalar>& text,
                              CentroidInit init = CentroidInit::kMean,
                              std::uint64_t seed = 0) {
  const auto& space = map.space();
  if (items_projected.rows() != space.n_items() ||
      text.rows() != space.n_text() ||
      (text.rows() > 0 && text.cols() != items_projected.cols())) {
    throw DataError("init_centroids: table shapes do not match the cluster map");
  }
  const Eigen::Index d = items_projected.cols();
  Matrix<Scalar> centroids(map.n_item_clusters(), d);
  if (init == CentroidInit::kRandom) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0 / std::sqrt(double(d)),
                                                1.0 / std::sqrt(double(d)));
    for (Eigen::Index i = 0; i < centroids.size(); ++i) {
      centroids.data()[i] = static_cast<Scalar>(dist(rng));
    }
    return centroids;
  }
  for (std::uint32_t r = 0; r < map.n_item_clusters(); ++r) {
    const auto& members = map.members(space.n_text() + r);
    Vector<double> acc = Vector<double>::Zero(d);
    for (auto w : members) {
      acc += items_projected.row(w - space.n_text()).transpose().template cast<double>();
    }
    centroids.row(r) = (acc / double(members.size())).template cast<Scalar>().transpose();
  }
  return centroids;
}

}  // namespace hsrec
