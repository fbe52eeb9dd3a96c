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

// Top-k token generation from a query vector o.
//
//  * topk_exact      enumerates every two-level probability (reference).
//  * topk_structure  expands clusters best-first and prunes with
//                    P(w|H) <= P(c(w)|H); returns exactly topk_exact.
//  * topk_ann        maximum inner product search over rows e_c(w) + e_w,
//                    which drops the per-cluster log-partition term.

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "hsrec/cluster_map.hpp"
#include "hsrec/softmax.hpp"
#include "hsrec/types.hpp"

namespace hsrec {

struct ScoredToken {
  std::uint32_t ordinal = 0;
  double score = 0;

  friend bool operator==(const ScoredToken&, const ScoredToken&) = default;
};

// Descending score, ties by ascending ordinal.
inline bool ranks_before(const ScoredToken& a, const ScoredToken& b) {
  return a.score > b.score || (a.score == b.score && a.ordinal < b.ordinal);
}

struct TopK {
  std::vector<ScoredToken> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  const ScoredToken& operator[](std::size_t i) const { return entries[i]; }
  friend bool operator==(const TopK&, const TopK&) = default;
};

// Keeps the best `k` candidates seen so far; worst candidate on top.
class BestK {
 public:
  explicit BestK(std::size_t k) : k_(k) { heap_.reserve(k); }

  bool full() const { return heap_.size() >= k_; }
  const ScoredToken& worst() const { return heap_.front(); }

  void offer(const ScoredToken& t) {
    if (k_ == 0) return;
    if (!full()) {
      heap_.push_back(t);
      std::push_heap(heap_.begin(), heap_.end(), ranks_before);
    } else if (ranks_before(t, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), ranks_before);
      heap_.back() = t;
      std::push_heap(heap_.begin(), heap_.end(), ranks_before);
    }
  }

  TopK sorted() && {
    std::sort(heap_.begin(), heap_.end(), ranks_before);
    return TopK{std::move(heap_)};
  }

 private:
  std::size_t k_;
  std::vector<ScoredToken> heap_;
};

inline TopK select_topk(const Eigen::VectorXd& scores, std::size_t k) {
  BestK best(std::min<std::size_t>(k, scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    best.offer({static_cast<std::uint32_t>(i), scores[i]});
  }
  return std::move(best).sorted();
}

// Reference top-K over the two-level distribution. K larger than the token
// space yields the full ranking.
template <typename Scalar>
TopK topk_exact(const Vector<Scalar>& o, std::size_t k,
                const OutputLayer<Scalar>& layer, const ClusterMap& map,
                CostCounter* cost = nullptr) {
  if (k == 0) throw UsageError("top-k requires K >= 1");
  return select_topk(score_all(o, layer, &map, SoftmaxMode::kTwoLevel, cost), k);
}

struct StructureResult {
  TopK topk;
  std::uint32_t clusters_expanded = 0;
  std::uint32_t clusters_pruned = 0;
  std::uint64_t tokens_scored = 0;
  // Largest log P(c|H) among pruned clusters (-inf when nothing was pruned).
  double max_pruned_bound = -std::numeric_limits<double>::infinity();
};

// Best-first cluster expansion. Stops once K candidates are held and the
// K-th best log-probability strictly exceeds the next cluster's log P(c|H);
// on equality the cluster is still expanded so tie-breaking matches
// topk_exact.
template <typename Scalar>
StructureResult topk_structure(const Vector<Scalar>& o, std::size_t k,
                               const OutputLayer<Scalar>& layer,
                               const ClusterMap& map, CostCounter* cost = nullptr) {
  if (k == 0) throw UsageError("top-k requires K >= 1");
  const ClusterScores cs = cluster_scores(o, layer, map, cost);
  std::vector<std::uint32_t> order(map.n_clusters());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return cs.logits[a] > cs.logits[b] || (cs.logits[a] == cs.logits[b] && a < b);
  });

  StructureResult res;
  BestK best(std::min<std::size_t>(k, map.space().size()));
  std::vector<double> member_lp;
  std::size_t next = 0;
  for (; next < order.size(); ++next) {
    const std::uint32_t c = order[next];
    const double bound = cs.log_prob(c);
    if (best.full() && best.worst().score > bound) break;
    cluster_member_logprobs(o, layer, map, c, bound, member_lp, cost);
    const auto& members = map.members(c);
    for (std::size_t j = 0; j < members.size(); ++j) {
      best.offer({members[j], member_lp[j]});
    }
    ++res.clusters_expanded;
    res.tokens_scored += members.size();
  }
  res.clusters_pruned = static_cast<std::uint32_t>(order.size() - next);
  if (next < order.size()) res.max_pruned_bound = cs.log_prob(order[next]);
  res.topk = std::move(best).sorted();
  return res;
}

// Rank (1-based) of `target` among item tokens accepted by `keep`, under the
// two-level distribution, expanding only clusters that can hold a token
// ranked before it.
template <typename Scalar>
std::uint64_t structure_item_rank(const Vector<Scalar>& o, std::uint32_t target,
                                  const OutputLayer<Scalar>& layer,
                                  const ClusterMap& map,
                                  const std::function<bool(std::uint32_t)>& keep,
                                  CostCounter* cost = nullptr) {
  const ClusterScores cs = cluster_scores(o, layer, map, cost);
  const std::uint32_t tc = map.cluster_of(target);
  std::vector<double> target_lp;
  cluster_member_logprobs(o, layer, map, tc, cs.log_prob(tc), target_lp, cost);
  const auto& tm = map.members(tc);
  const ScoredToken t{target,
                      target_lp[std::lower_bound(tm.begin(), tm.end(), target) - tm.begin()]};

  std::uint64_t before = 0;
  std::vector<double> member_lp;
  for (std::uint32_t c = map.space().n_text(); c < map.n_clusters(); ++c) {
    const std::vector<double>* lp = &target_lp;
    if (c != tc) {
      if (cs.log_prob(c) < t.score) continue;
      cluster_member_logprobs(o, layer, map, c, cs.log_prob(c), member_lp, cost);
      lp = &member_lp;
    }
    const auto& members = map.members(c);
    for (std::size_t j = 0; j < members.size(); ++j) {
      if ((!keep || keep(members[j])) && ranks_before({members[j], (*lp)[j]}, t)) ++before;
    }
  }
  return before + 1;
}

// Index of e_c(w) + e_w for every token, stamped with the parameter version
// it was built from.
template <typename Scalar>
class AdditiveIndex {
 public:
  AdditiveIndex() = default;

  const Matrix<Scalar>& vectors() const { return vectors_; }
  std::uint64_t version() const { return version_; }
  const TokenSpace& space() const { return space_; }
  const ClusterMap& clusters() const { return map_; }
  // partition keys for probe mode: one centroid per cluster
  const Matrix<Scalar>& keys() const { return keys_; }

  template <typename S>
  friend AdditiveIndex<S> build_additive_index(const OutputLayer<S>&,
                                               const ClusterMap&, std::uint64_t);

 private:
  Matrix<Scalar> vectors_;
  Matrix<Scalar> keys_;
  ClusterMap map_;
  TokenSpace space_;
  std::uint64_t version_ = 0;
};

template <typename Scalar>
AdditiveIndex<Scalar> build_additive_index(const OutputLayer<Scalar>& layer,
                                           const ClusterMap& map,
                                           std::uint64_t version) {
  AdditiveIndex<Scalar> index;
  index.space_ = map.space();
  index.map_ = map;
  index.version_ = version;
  index.vectors_.resize(index.space_.size(), layer.dim());
  for (std::uint32_t w = 0; w < index.space_.size(); ++w) {
    index.vectors_.row(w) =
        layer.centroid_row(map, map.cluster_of(w)) + layer.token_row(w);
  }
  index.keys_.resize(map.n_clusters(), layer.dim());
  for (std::uint32_t c = 0; c < map.n_clusters(); ++c) {
    index.keys_.row(c) = layer.centroid_row(map, c);
  }
  return index;
}

class StaleIndexError : public Error {
 public:
  using Error::Error;
};

struct AnnOptions {
  // 0 = exact brute-force MIPS over the index. Otherwise only the `probe`
  // item clusters with the largest <o, e_c> are scanned (text rows always).
  std::uint32_t probe = 0;
};

// Additive dot-product scores <o, e_c(w) + e_w> for every row.
template <typename Scalar>
Eigen::VectorXd ann_scores(const Vector<Scalar>& o, const AdditiveIndex<Scalar>& index,
                           std::uint64_t expected_version) {
  if (index.version() != expected_version) {
    throw StaleIndexError("additive index built from parameter version " +
                          std::to_string(index.version()) + ", tables are at " +
                          std::to_string(expected_version));
  }
  return (index.vectors() * o).template cast<double>();
}

template <typename Scalar>
TopK topk_ann(const Vector<Scalar>& o, std::size_t k, const AdditiveIndex<Scalar>& index,
              std::uint64_t expected_version, const AnnOptions& options = {},
              std::uint64_t* tokens_scored = nullptr) {
  if (k == 0) throw UsageError("top-k requires K >= 1");
  if (options.probe == 0) {
    auto scores = ann_scores(o, index, expected_version);
    if (tokens_scored) *tokens_scored += scores.size();
    return select_topk(scores, k);
  }
  if (index.version() != expected_version) {
    throw StaleIndexError("additive index is stale");
  }
  const ClusterMap& map = index.clusters();
  const std::uint32_t n_text = map.space().n_text();
  std::vector<std::pair<double, std::uint32_t>> keys;
  for (std::uint32_t c = n_text; c < map.n_clusters(); ++c) {
    keys.emplace_back(static_cast<double>(index.keys().row(c).dot(o.transpose())), c);
  }
  const std::size_t probe = std::min<std::size_t>(options.probe, keys.size());
  std::partial_sort(keys.begin(), keys.begin() + probe, keys.end(),
                    [](const auto& a, const auto& b) {
                      return a.first > b.first || (a.first == b.first && a.second < b.second);
                    });
  BestK best(std::min<std::size_t>(k, map.space().size()));
  std::uint64_t scored = 0;
  auto score_row = [&](std::uint32_t w) {
    best.offer({w, static_cast<double>(index.vectors().row(w).dot(o.transpose()))});
    ++scored;
  };
  for (std::uint32_t v = 0; v < n_text; ++v) score_row(v);
  for (std::size_t p = 0; p < probe; ++p) {
    for (auto w : map.members(keys[p].second)) score_row(w);
  }
  if (tokens_scored) *tokens_scored += scored;
  return std::move(best).sorted();
}

// Stable subsequence of item entries.
inline TopK filter_items(const TopK& topk, const TokenSpace& space) {
  TopK out;
  for (const auto& e : topk.entries) {
    if (space.is_item_ordinal(e.ordinal)) out.entries.push_back(e);
  }
  return out;
}

// Top-K items from an engine that ranks the whole token space: fetch
// overfetch*K tokens, keep items, and widen the fetch until K items survive
// or the space is exhausted.
inline TopK topk_items(const std::function<TopK(std::size_t)>& fetch, std::size_t k,
                       const TokenSpace& space, std::size_t overfetch = 4,
                       const std::function<bool(std::uint32_t)>& keep = {}) {
  std::size_t want = std::max<std::size_t>(1, overfetch * k);
  for (;;) {
    const TopK all = fetch(std::min<std::size_t>(want, space.size()));
    TopK items;
    for (const auto& e : all.entries) {
      if (space.is_item_ordinal(e.ordinal) && (!keep || keep(e.ordinal))) {
        items.entries.push_back(e);
      }
    }
    if (items.size() >= k || want >= space.size()) {
      if (items.size() > k) items.entries.resize(k);
      return items;
    }
    want *= 2;
  }
}

}  // namespace hsrec
