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

#include "hsrec/pipeline.hpp"

#include <sstream>

namespace hsrec {

Dataset make_dataset(InteractionLog log) {
  Vocabulary vocab = Vocabulary::build(log.catalog);
  return make_dataset(std::move(log), std::move(vocab));
}

Dataset make_dataset(InteractionLog log, Vocabulary vocab) {
  Dataset d;
  d.log = std::move(log);
  d.splits = split_leave_one_out(d.log);
  d.vocab = std::move(vocab);
  d.item_tokens = tokenize_catalog(d.log.catalog, d.vocab);
  return d;
}

Dataset load_dataset(const std::string& jsonl_path) {
  return make_dataset(ingest_jsonl(jsonl_path));
}

Snapshot<float> to_snapshot(Model<float> model, const Dataset& data) {
  Snapshot<float> s;
  s.model = std::move(model);
  s.vocab_words = data.vocab.words();
  s.price_edges = data.vocab.price_edges();
  for (const auto& item : data.log.catalog.items()) s.item_keys.push_back(item.item_id);
  return s;
}

Dataset dataset_for_snapshot(InteractionLog log, const Snapshot<float>& snap) {
  const Catalog& catalog = log.catalog;
  if (catalog.size() != snap.item_keys.size()) {
    throw DataError("data has " + std::to_string(catalog.size()) + " items, snapshot has " +
                    std::to_string(snap.item_keys.size()));
  }
  for (std::uint32_t i = 0; i < catalog.size(); ++i) {
    if (catalog[i].item_id != snap.item_keys[i]) {
      throw DataError("item " + std::to_string(i) + " is '" + catalog[i].item_id +
                      "' in the data but '" + snap.item_keys[i] + "' in the snapshot");
    }
  }
  return make_dataset(std::move(log), Vocabulary::from_words(snap.vocab_words, snap.price_edges));
}

std::string ablation_csv_header() {
  return MetricReport::csv_header() + ",oracle_recall@10,oracle_mrr,equals_oracle";
}

std::string ablation_csv_row(const std::string& dataset, const AblationRow& row) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << row.report.csv_row(dataset, to_string(row.engine), to_string(row.clustering))
     << ',' << row.oracle.recall_at_10 << ',' << row.oracle.mrr << ','
     << (row.report == row.oracle ? 1 : 0);
  return os.str();
}

std::vector<AblationRow> run_clustering_ablation(const Dataset& data, TrainConfig config,
                                                 std::uint32_t n_clusters,
                                                 const EvalOptions& eval) {
  config.softmax_mode = SoftmaxMode::kTwoLevel;
  const auto test = data.splits.test_examples(data.log.catalog);
  std::vector<AblationRow> rows;
  for (auto method : {ClusteringMethod::kKMeans, ClusteringMethod::kFrequency,
                      ClusteringMethod::kRandom}) {
    ClusterMap map = make_cluster_map(method, data.space(), data.splits, n_clusters, config.seed);
    const auto trained =
        train(data.training_data(), initial_model(data.training_data(), config, std::move(map)),
              config);
    EvalOptions full = eval;
    full.engine = Engine::kFull;
    const MetricReport oracle = evaluate(trained.model, test, data.render_context(), full);
    for (auto engine : {Engine::kStructure, Engine::kAnn}) {
      EvalOptions o = eval;
      o.engine = engine;
      rows.push_back({method, engine, evaluate(trained.model, test, data.render_context(), o),
                      oracle});
    }
  }
  return rows;
}

}  // namespace hsrec
