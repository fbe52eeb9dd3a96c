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

#include <algorithm>
#include <cstdint>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "hsrec/catalog.hpp"
#include "hsrec/encoder.hpp"
#include "hsrec/inference.hpp"
#include "hsrec/model.hpp"
#include "hsrec/render.hpp"

namespace hsrec {

enum class Engine { kFull, kStructure, kAnn };

const char* to_string(Engine e);
Engine parse_engine(const std::string& s);

// Full-catalog ranking metrics against one held-out item per user.
struct MetricReport {
  double recall_at_1 = 0;
  double recall_at_10 = 0;
  double ndcg_at_10 = 0;
  double mrr = 0;
  std::size_t n_users = 0;

  std::string to_json() const;
  static std::string csv_header();
  std::string csv_row(const std::string& dataset, const std::string& engine,
                      const std::string& clustering) const;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

// Ranks are 1-based positions of the target among candidate items.
MetricReport metrics_from_ranks(const std::vector<std::uint64_t>& ranks);

// Rank of each target when items are ordered by descending count (ties by
// ascending index). History items are candidates unless excluded.
std::vector<std::uint64_t> popularity_ranks(const std::vector<SequenceExample>& examples,
                                            const std::vector<std::uint64_t>& counts,
                                            bool exclude_history = false);

// Counts over train + validation events (everything before the test item).
std::vector<std::uint64_t> pre_test_item_counts(const Splits& splits,
                                                std::uint32_t n_items);

struct EvalOptions {
  Engine engine = Engine::kFull;
  bool exclude_history = false;
  std::size_t overfetch = 4;
  AnnOptions ann;
  std::size_t max_users = 0;  // 0 = all
  std::size_t max_history = 50;
  unsigned threads = 1;
};

struct EvalStats {
  std::uint64_t tokens_scored = 0;
  std::uint64_t clusters_expanded = 0;
};

// Per-user item ranks for the chosen engine. Full enumerates the model's own
// distribution; Structure returns identical ranks for two-level models while
// pruning clusters; ANN ranks by the additive dot product.
template <typename Scalar>
std::vector<std::uint64_t> evaluate_ranks(const Model<Scalar>& model,
                                          const std::vector<SequenceExample>& examples,
                                          const RenderContext& ctx,
                                          const EvalOptions& options,
                                          EvalStats* stats = nullptr) {
  if (options.engine != Engine::kFull &&
      (model.mode != SoftmaxMode::kTwoLevel || !model.clusters)) {
    throw UsageError(std::string("engine '") + to_string(options.engine) +
                     "' requires a two-level snapshot with a cluster map");
  }
  const std::size_t n = options.max_users ? std::min(options.max_users, examples.size())
                                          : examples.size();
  const Matrix<Scalar> projected = model.projected_items();
  const auto layer = model.output(projected);
  const TokenSpace space = model.space;
  const ClusterMap* map = model.cluster_map();
  AdditiveIndex<Scalar> index;
  if (options.engine == Engine::kAnn) index = build_additive_index(layer, *map, model.version);

  std::vector<std::uint64_t> ranks(n, 0);
  std::vector<EvalStats> per_user(n);

  auto run_user = [&](std::size_t u) {
    const SequenceExample& ex = examples[u];
    const std::uint32_t target = space.ordinal(ex.target);
    std::unordered_set<std::uint32_t> excluded;
    if (options.exclude_history) {
      for (const auto& h : ex.history) {
        const auto w = space.ordinal(h.item);
        if (w != target) excluded.insert(w);
      }
    }
    const std::function<bool(std::uint32_t)> keep =
        [&](std::uint32_t w) { return !excluded.count(w); };
    const auto tokens = render_id_only(ex, ctx, options.max_history);
    const Vector<Scalar> o = encode(std::span<const TokenId>(tokens), model, projected);

    std::uint64_t rank = 0;
    TopK top;
    auto rank_by_scores = [&](const Eigen::VectorXd& scores) {
      const ScoredToken t{target, scores[target]};
      std::uint64_t before = 0;
      for (std::uint32_t w = space.n_text(); w < space.size(); ++w) {
        if (keep(w) && ranks_before({w, scores[w]}, t)) ++before;
      }
      return before + 1;
    };
    switch (options.engine) {
      case Engine::kFull: {
        const Eigen::VectorXd scores = score_all(o, layer, map, model.mode);
        rank = rank_by_scores(scores);
        top = topk_items([&](std::size_t k) { return select_topk(scores, k); }, 10,
                         space, options.overfetch, keep);
        per_user[u].tokens_scored += space.size();
        break;
      }
      case Engine::kStructure: {
        CostCounter cost;
        rank = structure_item_rank(o, target, layer, *map, keep, &cost);
        top = topk_items(
            [&](std::size_t k) {
              auto r = topk_structure(o, k, layer, *map);
              per_user[u].clusters_expanded += r.clusters_expanded;
              per_user[u].tokens_scored += r.tokens_scored;
              return r.topk;
            },
            10, space, options.overfetch, keep);
        break;
      }
      case Engine::kAnn: {
        const Eigen::VectorXd scores = ann_scores(o, index, model.version);
        rank = rank_by_scores(scores);
        std::uint64_t scored = 0;
        top = topk_items(
            [&](std::size_t k) { return topk_ann(o, k, index, model.version, options.ann, &scored); },
            10, space, options.overfetch, keep);
        per_user[u].tokens_scored += scored;
        break;
      }
    }
    if (options.engine != Engine::kAnn || options.ann.probe == 0) {
      const bool listed = std::any_of(top.entries.begin(), top.entries.end(),
                                      [&](const ScoredToken& e) { return e.ordinal == target; });
      if (listed != (rank <= top.size())) {
        throw NumericalError("top-k list and rank disagree for user '" + ex.user + "'");
      }
    }
    ranks[u] = rank;
  };

  const unsigned threads = std::max(1u, options.threads);
  if (threads == 1 || n < 2) {
    for (std::size_t u = 0; u < n; ++u) run_user(u);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t u = t; u < n; u += threads) run_user(u);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  if (stats) {
    for (const auto& s : per_user) {
      stats->tokens_scored += s.tokens_scored;
      stats->clusters_expanded += s.clusters_expanded;
    }
  }
  return ranks;
}

template <typename Scalar>
MetricReport evaluate(const Model<Scalar>& model,
                      const std::vector<SequenceExample>& examples,
                      const RenderContext& ctx, const EvalOptions& options,
                      EvalStats* stats = nullptr) {
  return metrics_from_ranks(evaluate_ranks(model, examples, ctx, options, stats));
}

}  // namespace hsrec
