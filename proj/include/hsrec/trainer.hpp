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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "hsrec/catalog.hpp"
#include "hsrec/clustering.hpp"
#include "hsrec/model.hpp"
#include "hsrec/render.hpp"

namespace hsrec {

enum class Optimizer { kSgd, kAdamW };

const char* to_string(Optimizer o);
Optimizer parse_optimizer(const std::string& s);

struct TrainConfig {
  std::size_t batch_size = 64;
  double learning_rate = 5e-3;
  double weight_decay = 1e-5;
  std::size_t max_steps = 2000;
  RenderOptions render;
  std::uint64_t seed = 42;
  SoftmaxMode softmax_mode = SoftmaxMode::kTwoLevel;
  Optimizer optimizer = Optimizer::kAdamW;
  // validation Recall@10 is computed every `eval_every` steps
  std::size_t eval_every = 200;
  // stop after this many evaluations without improvement (0 = never)
  std::size_t patience = 5;
  std::size_t eval_users = 0;  // 0 = all validation users
  ModelShape shape;            // n_text / n_items are filled from the data
  CentroidInit centroid_init = CentroidInit::kMean;

  void validate() const;
};

struct MetricsRow {
  std::size_t step = 0;
  double loss = 0;
  double val_recall_at_10 = std::numeric_limits<double>::quiet_NaN();
};

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows);

struct TrainingData {
  const Catalog* catalog = nullptr;
  const Vocabulary* vocab = nullptr;
  const std::vector<ItemTokens>* item_tokens = nullptr;
  const Splits* splits = nullptr;

  RenderContext render_context() const { return {vocab, item_tokens}; }
};

// Every (prefix, next item) pair inside each user's train split.
std::vector<SequenceExample> training_examples(const Splits& splits, const Catalog& catalog);

struct TrainResult {
  Model<float> model;
  std::vector<MetricsRow> log;
  std::size_t steps = 0;
  bool early_stopped = false;
  double best_val_recall_at_10 = std::numeric_limits<double>::quiet_NaN();
};

// Mini-batch training with cosine learning-rate decay and decoupled weight
// decay. The parameters with the best validation Recall@10 (MRR breaking
// ties) are returned.
// Throws NumericalError if the loss stops being finite.
TrainResult train(const TrainingData& data, Model<float> model, const TrainConfig& config);

// Initial model for `data` according to `config` (shape, mode, centroids).
Model<float> initial_model(const TrainingData& data, const TrainConfig& config,
                           std::optional<ClusterMap> clusters);

}  // namespace hsrec
