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

#include "hsrec/clustering.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace hsrec {

namespace {

void check_cluster_count(std::uint32_t n_clusters, std::uint32_t n_items) {
  if (n_clusters == 0) throw UsageError("number of clusters must be at least 1");
  if (n_clusters > n_items) {
    throw UsageError("cannot build " + std::to_string(n_clusters) +
                     " non-empty clusters from " + std::to_string(n_items) + " items");
  }
}

// Contiguous near-equal slicing of an item ordering into clusters.
std::vector<std::uint32_t> slice_order(const std::vector<std::uint32_t>& order,
                                       std::uint32_t n_clusters) {
  std::vector<std::uint32_t> item_cluster(order.size());
  const auto bins = near_equal_bins(static_cast<std::uint32_t>(order.size()), n_clusters);
  std::size_t pos = 0;
  for (std::uint32_t c = 0; c < bins.size(); ++c) {
    for (std::uint32_t j = 0; j < bins[c]; ++j) item_cluster[order[pos++]] = c;
  }
  return item_cluster;
}

}  // namespace

const char* to_string(ClusteringMethod m) {
  switch (m) {
    case ClusteringMethod::kKMeans: return "kmeans";
    case ClusteringMethod::kFrequency: return "frequency";
    case ClusteringMethod::kRandom: return "random";
  }
  return "?";
}

ClusteringMethod parse_clustering_method(const std::string& s) {
  if (s == "kmeans") return ClusteringMethod::kKMeans;
  if (s == "frequency") return ClusteringMethod::kFrequency;
  if (s == "random") return ClusteringMethod::kRandom;
  throw UsageError("unknown clustering '" + s + "' (expected kmeans|frequency|random)");
}

std::uint32_t default_cluster_count(std::uint32_t n_items) {
  if (n_items == 0) return 1;
  auto c = static_cast<std::uint32_t>(std::ceil(std::sqrt(double(n_items))));
  // guard against sqrt rounding for perfect squares
  while (c > 1 && std::uint64_t(c - 1) * (c - 1) >= n_items) --c;
  while (std::uint64_t(c) * c < n_items) ++c;
  return c;
}

std::vector<std::uint32_t> near_equal_bins(std::uint32_t n, std::uint32_t k) {
  std::vector<std::uint32_t> bins(k, n / k);
  for (std::uint32_t c = 0; c < n % k; ++c) ++bins[c];
  return bins;
}

KMeansResult kmeans(const Matrix<double>& points, std::uint32_t n_clusters,
                    std::uint64_t seed, const KMeansOptions& options) {
  const auto n = static_cast<std::uint32_t>(points.rows());
  check_cluster_count(n_clusters, n);
  if (!points.allFinite()) throw DataError("k-means input contains non-finite values");

  std::mt19937_64 rng(seed);
  const Eigen::Index dim = points.cols();
  Matrix<double> centroids(n_clusters, dim);

  // k-means++ seeding
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::uniform_int_distribution<std::uint32_t> first(0, n - 1);
  centroids.row(0) = points.row(first(rng));
  for (std::uint32_t c = 1; c < n_clusters; ++c) {
    double total = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points.row(i) - centroids.row(c - 1)).squaredNorm());
      total += d2[i];
    }
    std::uint32_t pick = 0;
    if (total > 0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double r = u(rng);
      double acc = 0;
      pick = n;
      for (std::uint32_t i = 0; i < n; ++i) {
        if (d2[i] <= 0) continue;
        acc += d2[i];
        pick = i;
        if (r < acc) break;
      }
    } else {
      pick = first(rng);
    }
    centroids.row(c) = points.row(pick);
  }

  KMeansResult res;
  res.assignment.assign(n, 0);
  std::vector<double> dist(n, 0.0);
  for (int it = 0; it < options.max_iterations; ++it) {
    res.iterations = it + 1;
    for (std::uint32_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t arg = 0;
      for (std::uint32_t c = 0; c < n_clusters; ++c) {
        const double dd = (points.row(i) - centroids.row(c)).squaredNorm();
        if (dd < best) {
          best = dd;
          arg = c;
        }
      }
      res.assignment[i] = arg;
      dist[i] = best;
    }

    std::vector<std::uint32_t> sizes(n_clusters, 0);
    for (auto a : res.assignment) ++sizes[a];
    for (std::uint32_t c = 0; c < n_clusters; ++c) {
      if (sizes[c] > 0) continue;
      // steal the worst-fit point from a cluster that can spare it
      std::uint32_t far = n;
      for (std::uint32_t i = 0; i < n; ++i) {
        if (sizes[res.assignment[i]] < 2) continue;
        if (far == n || dist[i] > dist[far]) far = i;
      }
      --sizes[res.assignment[far]];
      res.assignment[far] = c;
      dist[far] = 0;
      sizes[c] = 1;
    }

    Matrix<double> next = Matrix<double>::Zero(n_clusters, dim);
    for (std::uint32_t i = 0; i < n; ++i) next.row(res.assignment[i]) += points.row(i);
    for (std::uint32_t c = 0; c < n_clusters; ++c) next.row(c) /= double(sizes[c]);

    const double base = std::max(centroids.norm(), 1e-12);
    const double shift = (next - centroids).norm() / base;
    centroids = std::move(next);
    if (shift < options.relative_tolerance) break;
  }

  // final assignment consistent with the returned centroids, keeping clusters
  // non-empty
  std::vector<std::uint32_t> sizes(n_clusters, 0);
  for (auto a : res.assignment) ++sizes[a];
  for (std::uint32_t i = 0; i < n; ++i) {
    double best = (points.row(i) - centroids.row(res.assignment[i])).squaredNorm();
    std::uint32_t arg = res.assignment[i];
    for (std::uint32_t c = 0; c < n_clusters; ++c) {
      const double dd = (points.row(i) - centroids.row(c)).squaredNorm();
      if (dd < best || (dd == best && c < arg)) {
        best = dd;
        arg = c;
      }
    }
    if (arg != res.assignment[i] && sizes[res.assignment[i]] > 1) {
      --sizes[res.assignment[i]];
      ++sizes[arg];
      res.assignment[i] = arg;
    }
  }
  res.objective = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    res.objective += (points.row(i) - centroids.row(res.assignment[i])).squaredNorm();
  }
  res.centroids = std::move(centroids);
  return res;
}

ClusterMap cluster_kmeans(TokenSpace space, const Matrix<double>& item_vectors,
                          std::uint32_t n_clusters, std::uint64_t seed,
                          const KMeansOptions& options) {
  if (item_vectors.rows() != space.n_items()) {
    throw DataError("item feature table has " + std::to_string(item_vectors.rows()) +
                    " rows, catalog has " + std::to_string(space.n_items()) + " items");
  }
  auto res = kmeans(item_vectors, n_clusters, seed, options);
  return ClusterMap(space, res.assignment, n_clusters);
}

ClusterMap cluster_frequency(TokenSpace space,
                             const std::vector<std::uint64_t>& counts,
                             std::uint32_t n_clusters) {
  if (counts.size() != space.n_items()) {
    throw DataError("frequency clustering needs one count per item");
  }
  check_cluster_count(n_clusters, space.n_items());
  std::vector<std::uint32_t> order(space.n_items());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return counts[a] > counts[b];
  });
  return ClusterMap(space, slice_order(order, n_clusters), n_clusters);
}

ClusterMap cluster_random(TokenSpace space, std::uint32_t n_clusters,
                          std::uint64_t seed) {
  check_cluster_count(n_clusters, space.n_items());
  std::vector<std::uint32_t> order(space.n_items());
  std::iota(order.begin(), order.end(), 0u);
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  return ClusterMap(space, slice_order(order, n_clusters), n_clusters);
}

std::vector<std::uint64_t> train_item_counts(const Splits& splits,
                                             std::uint32_t n_items) {
  std::vector<std::uint64_t> counts(n_items, 0);
  for (const auto& u : splits.users) {
    for (auto i : u.train) ++counts.at(i);
  }
  return counts;
}

Matrix<double> item_cooccurrence_features(const Splits& splits,
                                          std::uint32_t n_items,
                                          std::uint32_t dim, std::uint64_t seed) {
  const auto n_users = static_cast<Eigen::Index>(splits.users.size());
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index u = 0; u < n_users; ++u) {
    for (auto i : splits.users[u].train) triplets.emplace_back(i, u, 1.0);
  }
  Eigen::SparseMatrix<double> x(n_items, n_users);
  x.setFromTriplets(triplets.begin(), triplets.end());

  const Eigen::Index rank = std::min<Eigen::Index>({Eigen::Index(dim) + 10, n_items, n_users});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Matrix<double> omega(n_users, rank);
  for (Eigen::Index i = 0; i < omega.size(); ++i) omega.data()[i] = gauss(rng);

  auto orthonormalize = [](const Eigen::MatrixXd& y) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols()));
  };
  Eigen::MatrixXd q = orthonormalize(x * omega);
  for (int p = 0; p < 2; ++p) {
    Eigen::MatrixXd z = x.transpose() * q;
    q = orthonormalize(x * z);
  }
  Eigen::MatrixXd b = q.transpose() * x;  // rank x n_users
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b * b.transpose());
  // eigenvalues ascending; take the top `dim` as singular values squared
  const Eigen::Index keep = std::min<Eigen::Index>(dim, rank);
  Matrix<double> features = Matrix<double>::Zero(n_items, dim);
  for (Eigen::Index j = 0; j < keep; ++j) {
    const Eigen::Index src = rank - 1 - j;
    const double sigma = std::sqrt(std::max(0.0, eig.eigenvalues()(src)));
    features.col(j) = q * eig.eigenvectors().col(src) * sigma;
  }
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const double norm = features.row(i).norm();
    if (norm > 0) features.row(i) /= norm;
  }
  return features;
}

ClusterMap make_cluster_map(ClusteringMethod method, TokenSpace space,
                            const Splits& splits, std::uint32_t n_clusters,
                            std::uint64_t seed, const Matrix<double>* features) {
  switch (method) {
    case ClusteringMethod::kKMeans: {
      if (features) return cluster_kmeans(space, *features, n_clusters, seed);
      const auto f = item_cooccurrence_features(splits, space.n_items(), 32, seed);
      return cluster_kmeans(space, f, n_clusters, seed);
    }
    case ClusteringMethod::kFrequency:
      return cluster_frequency(space, train_item_counts(splits, space.n_items()), n_clusters);
    case ClusteringMethod::kRandom:
      return cluster_random(space, n_clusters, seed);
  }
  throw UsageError("unknown clustering method");
}

Matrix<double> read_item_features(const std::string& path, std::uint32_t n_items) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open item feature file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    std::vector<double> row;
    double v;
    while (is >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.size() != n_items) {
    throw DataError("feature file has " + std::to_string(rows.size()) +
                    " rows, expected " + std::to_string(n_items));
  }
  Matrix<double> m(n_items, static_cast<Eigen::Index>(rows.front().size()));
  for (std::uint32_t i = 0; i < n_items; ++i) {
    if (rows[i].size() != static_cast<std::size_t>(m.cols())) {
      throw DataError("feature file row " + std::to_string(i + 1) + " has wrong width");
    }
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace hsrec
