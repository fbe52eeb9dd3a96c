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

// Glue shared by the command-line tool and end-to-end checks: a loaded
// dataset with its splits and vocabulary, snapshot conversion, and the
// clustering ablation.

#pragma once

#include <string>
#include <vector>

#include "hsrec/catalog.hpp"
#include "hsrec/eval.hpp"
#include "hsrec/snapshot.hpp"
#include "hsrec/trainer.hpp"

namespace hsrec {

struct Dataset {
  InteractionLog log;
  Splits splits;
  Vocabulary vocab;
  std::vector<ItemTokens> item_tokens;

  TokenSpace space() const { return TokenSpace(vocab.size(), log.catalog.size()); }
  TrainingData training_data() const { return {&log.catalog, &vocab, &item_tokens, &splits}; }
  RenderContext render_context() const { return {&vocab, &item_tokens}; }
};

Dataset make_dataset(InteractionLog log);
Dataset make_dataset(InteractionLog log, Vocabulary vocab);
Dataset load_dataset(const std::string& jsonl_path);

Snapshot<float> to_snapshot(Model<float> model, const Dataset& data);

// Re-tokenizes `log` with the snapshot's vocabulary. Throws DataError when
// the catalog does not list the snapshot's items in the same order.
Dataset dataset_for_snapshot(InteractionLog log, const Snapshot<float>& snap);

struct AblationRow {
  ClusteringMethod clustering = ClusteringMethod::kKMeans;
  Engine engine = Engine::kStructure;
  MetricReport report;
  MetricReport oracle;  // full enumeration of the same model
};

std::string ablation_csv_header();
std::string ablation_csv_row(const std::string& dataset, const AblationRow& row);

// Trains one two-level model per clustering method and evaluates it on the
// test split with the structure and ANN engines next to full enumeration.
std::vector<AblationRow> run_clustering_ablation(const Dataset& data, TrainConfig config,
                                                 std::uint32_t n_clusters,
                                                 const EvalOptions& eval);

}  // namespace hsrec
