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

// hsrec: command-line front end.
//
//   hsrec synth    --out-dir D                      interactions.jsonl, groups.csv
//   hsrec ingest   --data F                         stats.json
//   hsrec cluster  --data F --clusters kmeans       clusters.csv, cluster_stats.json
//   hsrec train    --data F --mode twolevel         model.snap, metrics.csv, train.json
//   hsrec eval     --data F --engine structure      eval_<engine>.json
//   hsrec eval     --data F --ablation              ablation.csv
//   hsrec latency  --profile mistral7b              latency.csv
//   hsrec bench    --data F --k 10                  bench.csv, bench_timing.csv
//   hsrec size     --snapshot S                     size.json
//
// Exit codes: 0 ok, 1 usage, 2 data, 3 numerical. Errors end with one JSON
// line on stderr.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hsrec/clustering.hpp"
#include "hsrec/encoder.hpp"
#include "hsrec/eval.hpp"
#include "hsrec/inference.hpp"
#include "hsrec/latency.hpp"
#include "hsrec/log.hpp"
#include "hsrec/pipeline.hpp"
#include "hsrec/snapshot.hpp"
#include "hsrec/synth.hpp"
#include "hsrec/trainer.hpp"
#include "json.hpp"

namespace {

using namespace hsrec;
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct Global {
  std::string data;
  std::uint64_t seed = 42;
  unsigned threads = 1;
  std::string out_dir = ".";
};

struct TrainFlags {
  std::string mode = "twolevel";
  std::string clusters = "kmeans";
  std::string cluster_map;
  std::uint32_t n_clusters = 0;  // 0 = ceil(sqrt(|I|))
  std::size_t steps = 2000;
  std::size_t batch = 64;
  double lr = 5e-3;
  double weight_decay = 1e-5;
  std::string optimizer = "adamw";
  std::size_t eval_every = 200;
  std::size_t patience = 5;
  std::size_t eval_users = 0;
  double id_only_fraction = 0.25;
  double keep_prob = 0.5;
  std::size_t max_history = 50;
  std::uint32_t dim = 64;
  std::uint32_t item_dim = 512;
  std::uint32_t hidden = 64;
  std::string centroid_init = "mean";

  TrainConfig config(std::uint64_t seed) const {
    TrainConfig c;
    c.batch_size = batch;
    c.learning_rate = lr;
    c.weight_decay = weight_decay;
    c.max_steps = steps;
    c.render.id_only_fraction = id_only_fraction;
    c.render.metadata_keep_prob = keep_prob;
    c.render.max_history = max_history;
    c.seed = seed;
    c.softmax_mode = parse_softmax_mode(mode);
    c.optimizer = parse_optimizer(optimizer);
    c.eval_every = eval_every;
    c.patience = patience;
    c.eval_users = eval_users;
    c.shape.dim = dim;
    c.shape.item_dim = item_dim;
    c.shape.hidden = hidden;
    if (centroid_init == "mean") {
      c.centroid_init = CentroidInit::kMean;
    } else if (centroid_init == "random") {
      c.centroid_init = CentroidInit::kRandom;
    } else {
      throw UsageError("unknown centroid init '" + centroid_init + "' (expected mean|random)");
    }
    c.validate();
    return c;
  }
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--mode", f.mode, "softmax: full|twolevel")->capture_default_str();
  cmd->add_option("--clusters", f.clusters, "clustering: kmeans|frequency|random")
      ->capture_default_str();
  cmd->add_option("--n-clusters", f.n_clusters, "item clusters (0 = ceil(sqrt(|I|)))")
      ->capture_default_str();
  cmd->add_option("--steps", f.steps, "training steps")->capture_default_str();
  cmd->add_option("--batch", f.batch, "examples per step")->capture_default_str();
  cmd->add_option("--lr", f.lr, "peak learning rate")->capture_default_str();
  cmd->add_option("--weight-decay", f.weight_decay, "decoupled weight decay")
      ->capture_default_str();
  cmd->add_option("--optimizer", f.optimizer, "adamw|sgd")->capture_default_str();
  cmd->add_option("--eval-every", f.eval_every, "steps between validation passes")
      ->capture_default_str();
  cmd->add_option("--patience", f.patience, "validation passes without gain before stopping")
      ->capture_default_str();
  cmd->add_option("--eval-users", f.eval_users, "validation users per pass (0 = all)")
      ->capture_default_str();
  cmd->add_option("--id-only-fraction", f.id_only_fraction, "share of ID-only examples")
      ->capture_default_str();
  cmd->add_option("--keep-prob", f.keep_prob, "metadata field keep probability")
      ->capture_default_str();
  cmd->add_option("--max-history", f.max_history, "most recent items rendered")
      ->capture_default_str();
  cmd->add_option("--dim", f.dim, "model width d")->capture_default_str();
  cmd->add_option("--item-dim", f.item_dim, "raw item embedding width k")->capture_default_str();
  cmd->add_option("--hidden", f.hidden, "encoder hidden width")->capture_default_str();
  cmd->add_option("--centroid-init", f.centroid_init, "mean|random")->capture_default_str();
}

std::string require_data(const Global& g) {
  if (g.data.empty()) throw UsageError("--data is required for this command");
  return g.data;
}

fs::path output_path(const Global& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::uint32_t cluster_count(std::uint32_t requested, std::uint32_t n_items) {
  return requested ? requested : default_cluster_count(n_items);
}

// ---------------------------------------------------------------- synth

struct SynthFlags {
  SynthSpec spec;
};

int cmd_synth(const Global& g, SynthFlags f) {
  f.spec.seed = g.seed;
  const SynthDataset d = generate(f.spec);
  std::ostringstream jsonl, groups;
  d.write_jsonl(jsonl);
  d.write_groups_csv(groups);
  const auto events = output_path(g, "interactions.jsonl");
  write_text(events, jsonl.str());
  write_text(output_path(g, "groups.csv"), groups.str());
  std::cout << "wrote " << d.events.size() << " events to " << events.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- ingest

int cmd_ingest(const Global& g) {
  const Dataset d = load_dataset(require_data(g));
  Json j = Json::parse(compute_stats(d.log).to_json());
  j["users_kept"] = d.splits.users.size();
  j["users_dropped"] = d.splits.dropped_users;
  j["vocab_size"] = d.vocab.size();
  const std::string text = j.dump(2) + "\n";
  write_text(output_path(g, "stats.json"), text);
  std::cout << text;
  return 0;
}

// ---------------------------------------------------------------- cluster

struct ClusterFlags {
  std::string method = "kmeans";
  std::uint32_t n_clusters = 0;
  std::string features;
};

int cmd_cluster(const Global& g, const ClusterFlags& f) {
  const Dataset d = load_dataset(require_data(g));
  const auto method = parse_clustering_method(f.method);
  const auto space = d.space();
  Matrix<double> features;
  if (!f.features.empty()) features = read_item_features(f.features, space.n_items());
  const ClusterMap map = make_cluster_map(method, space, d.splits,
                                          cluster_count(f.n_clusters, space.n_items()), g.seed,
                                          f.features.empty() ? nullptr : &features);
  std::ostringstream csv;
  map.write_csv(csv);
  write_text(output_path(g, "clusters.csv"), csv.str());
  Json j;
  j["method"] = to_string(method);
  j["n_text"] = space.n_text();
  j["n_items"] = space.n_items();
  j["n_item_clusters"] = map.n_item_clusters();
  j["max_cluster_size"] = map.max_cluster_size();
  const std::string text = j.dump(2) + "\n";
  write_text(output_path(g, "cluster_stats.json"), text);
  std::cout << text;
  return 0;
}

// ---------------------------------------------------------------- train

int cmd_train(const Global& g, const TrainFlags& f) {
  const Dataset d = load_dataset(require_data(g));
  const TrainConfig config = f.config(g.seed);
  std::optional<ClusterMap> clusters;
  if (config.softmax_mode == SoftmaxMode::kTwoLevel) {
    if (!f.cluster_map.empty()) {
      std::ifstream in(f.cluster_map);
      if (!in) throw DataError("cannot open cluster map '" + f.cluster_map + "'");
      clusters = ClusterMap::read_csv(in, d.space());
    } else {
      clusters = make_cluster_map(parse_clustering_method(f.clusters), d.space(), d.splits,
                                  cluster_count(f.n_clusters, d.space().n_items()), g.seed);
    }
  }
  const auto start = std::chrono::steady_clock::now();
  TrainResult result =
      train(d.training_data(), initial_model(d.training_data(), config, std::move(clusters)),
            config);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log_info("trained " + std::to_string(result.steps) + " steps in " + std::to_string(seconds) +
           " s");

  save_snapshot(to_snapshot(std::move(result.model), d), output_path(g, "model.snap").string());
  std::ostringstream csv;
  write_metrics_csv(csv, result.log);
  write_text(output_path(g, "metrics.csv"), csv.str());
  Json j;
  j["mode"] = to_string(config.softmax_mode);
  j["clusters"] = config.softmax_mode == SoftmaxMode::kTwoLevel
                      ? (f.cluster_map.empty() ? f.clusters : f.cluster_map)
                      : "none";
  j["steps"] = result.steps;
  j["early_stopped"] = result.early_stopped;
  j["best_val_recall@10"] = result.best_val_recall_at_10;
  const std::string text = j.dump(2) + "\n";
  write_text(output_path(g, "train.json"), text);
  std::cout << text;
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalFlags {
  std::string snapshot;
  std::string engine = "full";
  std::string split = "test";
  bool exclude_history = false;
  std::uint32_t probe = 0;
  std::size_t max_users = 0;
  bool popularity = false;
  bool ablation = false;
  TrainFlags train;
};

std::vector<SequenceExample> pick_split(const Dataset& d, const std::string& split) {
  if (split == "test") return d.splits.test_examples(d.log.catalog);
  if (split == "validation") return d.splits.validation_examples(d.log.catalog);
  throw UsageError("unknown split '" + split + "' (expected test|validation)");
}

std::string snapshot_path(const Global& g, const std::string& flag) {
  return flag.empty() ? (fs::path(g.out_dir) / "model.snap").string() : flag;
}

int cmd_eval(const Global& g, const EvalFlags& f) {
  EvalOptions options;
  options.exclude_history = f.exclude_history;
  options.ann.probe = f.probe;
  options.max_users = f.max_users;
  options.threads = g.threads;

  if (f.ablation) {
    const Dataset d = load_dataset(require_data(g));
    const TrainConfig config = f.train.config(g.seed);
    const auto rows = run_clustering_ablation(
        d, config, cluster_count(f.train.n_clusters, d.space().n_items()), options);
    const std::string dataset = fs::path(g.data).stem().string();
    std::ostringstream csv;
    csv << ablation_csv_header() << '\n';
    for (const auto& r : rows) csv << ablation_csv_row(dataset, r) << '\n';
    write_text(output_path(g, "ablation.csv"), csv.str());
    std::cout << csv.str();
    return 0;
  }

  if (f.popularity) {
    const Dataset d = load_dataset(require_data(g));
    const auto examples = pick_split(d, f.split);
    const auto counts = pre_test_item_counts(d.splits, d.log.catalog.size());
    const MetricReport r =
        metrics_from_ranks(popularity_ranks(examples, counts, f.exclude_history));
    const std::string text = r.to_json() + "\n";
    write_text(output_path(g, "eval_popularity.json"), text);
    std::cout << text;
    return 0;
  }

  const Engine engine = parse_engine(f.engine);
  options.engine = engine;
  const auto snap = load_snapshot<float>(snapshot_path(g, f.snapshot));
  const Dataset d = dataset_for_snapshot(ingest_jsonl(require_data(g)), snap);
  const auto examples = pick_split(d, f.split);
  EvalStats stats;
  const auto start = std::chrono::steady_clock::now();
  const MetricReport r = evaluate(snap.model, examples, d.render_context(), options, &stats);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log_info(std::string("eval ") + to_string(engine) + " " + std::to_string(seconds) +
           " s, tokens scored " + std::to_string(stats.tokens_scored));
  const std::string text = r.to_json() + "\n";
  write_text(output_path(g, std::string("eval_") + to_string(engine) + ".json"), text);
  std::cout << text;
  return 0;
}

// ---------------------------------------------------------------- latency

struct LatencyFlags {
  std::vector<std::string> profiles;
  std::vector<std::string> encoders;
  std::string registry;
  double history = 0;  // 0 = profile reference
  double const_tokens = -1;  // < 0 = profile reference
};

int cmd_latency(const Global& g, const LatencyFlags& f) {
  const ProfileRegistry registry =
      f.registry.empty() ? ProfileRegistry::builtin() : ProfileRegistry::from_file(f.registry);
  std::vector<const DeploymentProfile*> profiles;
  if (f.profiles.empty()) {
    for (const auto& p : registry.profiles()) profiles.push_back(&p);
  } else {
    for (const auto& name : f.profiles) profiles.push_back(&registry.get(name));
  }
  std::vector<ItemEncoder> encoders;
  for (const auto& e : f.encoders) encoders.push_back(parse_item_encoder(e));
  if (encoders.empty()) encoders = {ItemEncoder::kId, ItemEncoder::kTitle, ItemEncoder::kCategory};

  std::optional<Dataset> data;
  if (!g.data.empty()) data = load_dataset(g.data);
  const std::string dataset = data ? fs::path(g.data).stem().string() : "reference";

  std::ostringstream csv;
  csv << latency_csv_header() << '\n';
  for (const auto* p : profiles) {
    const auto id_ref = p->reference_encodings.find("id");
    EncodingSpec base;
    if (id_ref != p->reference_encodings.end()) base = id_ref->second;
    if (f.history > 0) base.history_len = f.history;
    if (f.const_tokens >= 0) base.const_tokens = f.const_tokens;
    base.tokens_per_item = 1;
    for (auto enc : encoders) {
      EncodingSpec spec = base;
      if (data) {
        if (enc != ItemEncoder::kId) {
          const auto m = measure_m(data->log.catalog, enc, data->vocab);
          if (m.n_items == 0) {
            log_info(std::string("no items carry ") + to_string(enc) + " metadata; skipped");
            continue;
          }
          spec.tokens_per_item = std::max(1.0, m.mean);
        }
      } else {
        const auto ref = p->reference_encodings.find(to_string(enc));
        if (ref == p->reference_encodings.end()) continue;
        spec.tokens_per_item = ref->second.tokens_per_item;
        if (f.history <= 0) spec.history_len = ref->second.history_len;
        if (f.const_tokens < 0) spec.const_tokens = ref->second.const_tokens;
      }
      EncodingSpec single = spec;
      single.tokens_per_item = 1;
      LatencyRow row;
      row.dataset = dataset;
      row.encoder = to_string(enc);
      row.profile = p->name;
      row.latency = total_latency(*p, spec);
      row.speedup = speedup(*p, spec, single);
      row.bounds = speedup_bounds(spec, single);
      csv << latency_csv_row(row) << '\n';
    }
  }
  write_text(output_path(g, "latency.csv"), csv.str());
  std::cout << csv.str();
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchFlags {
  std::string snapshot;
  std::size_t k = 10;
  std::size_t queries = 200;
  std::uint32_t probe = 0;
};

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t idx = std::min(v.size() - 1, std::size_t(q * double(v.size() - 1) + 0.5));
  return v[idx];
}

int cmd_bench(const Global& g, const BenchFlags& f) {
  if (f.k == 0) throw UsageError("--k must be >= 1");
  const auto snap = load_snapshot<float>(snapshot_path(g, f.snapshot));
  const Model<float>& model = snap.model;
  if (model.mode != SoftmaxMode::kTwoLevel || !model.clusters) {
    throw UsageError("bench needs a two-level snapshot with a cluster map");
  }
  const Dataset d = dataset_for_snapshot(ingest_jsonl(require_data(g)), snap);
  auto examples = d.splits.test_examples(d.log.catalog);
  if (examples.size() > f.queries) examples.resize(f.queries);
  if (examples.empty()) throw DataError("no test users to build queries from");

  const Matrix<float> projected = model.projected_items();
  const auto layer = model.output(projected);
  const ClusterMap& map = *model.clusters;
  const auto index = build_additive_index(layer, map, model.version);
  std::vector<Vector<float>> queries;
  for (const auto& ex : examples) {
    const auto tokens = render_id_only(ex, d.render_context());
    queries.push_back(encode(std::span<const TokenId>(tokens), model, projected));
  }

  struct EngineStats {
    std::string name;
    std::vector<double> micros;
    double tokens = 0;
    double clusters = 0;
    double overlap = 0;
  };
  std::vector<EngineStats> engines{{"exact"}, {"structure"}, {"ann"}};
  AnnOptions ann;
  ann.probe = f.probe;
  using Clock = std::chrono::steady_clock;
  for (const auto& o : queries) {
    auto t0 = Clock::now();
    CostCounter cost;
    const TopK exact = topk_exact(o, f.k, layer, map, &cost);
    auto t1 = Clock::now();
    const StructureResult st = topk_structure(o, f.k, layer, map);
    auto t2 = Clock::now();
    std::uint64_t ann_scored = 0;
    const TopK approx = topk_ann(o, f.k, index, model.version, ann, &ann_scored);
    auto t3 = Clock::now();

    auto overlap = [&](const TopK& t) {
      std::size_t hit = 0;
      for (const auto& e : t.entries) {
        for (const auto& x : exact.entries) hit += e.ordinal == x.ordinal;
      }
      return double(hit) / double(exact.size());
    };
    auto us = [](auto a, auto b) { return std::chrono::duration<double, std::micro>(b - a).count(); };
    engines[0].micros.push_back(us(t0, t1));
    engines[0].tokens += double(map.space().size());
    engines[0].clusters += double(map.n_clusters());
    engines[0].overlap += 1.0;
    engines[1].micros.push_back(us(t1, t2));
    engines[1].tokens += double(st.tokens_scored);
    engines[1].clusters += double(st.clusters_expanded);
    engines[1].overlap += overlap(st.topk);
    engines[2].micros.push_back(us(t2, t3));
    engines[2].tokens += double(ann_scored);
    engines[2].clusters += f.probe ? double(std::min(f.probe, map.n_item_clusters()))
                                   : double(map.n_item_clusters());
    engines[2].overlap += overlap(approx);
  }

  const double n = double(queries.size());
  std::ostringstream csv, timing;
  csv.precision(6);
  csv << std::fixed;
  timing.precision(3);
  timing << std::fixed;
  csv << "engine,queries,k,mean_tokens_scored,mean_clusters_expanded,overlap_with_exact\n";
  timing << "engine,queries,k,p50_us,p95_us\n";
  for (const auto& e : engines) {
    csv << e.name << ',' << queries.size() << ',' << f.k << ',' << e.tokens / n << ','
        << e.clusters / n << ',' << e.overlap / n << '\n';
    timing << e.name << ',' << queries.size() << ',' << f.k << ',' << percentile(e.micros, 0.5)
           << ',' << percentile(e.micros, 0.95) << '\n';
  }
  write_text(output_path(g, "bench.csv"), csv.str());
  write_text(output_path(g, "bench_timing.csv"), timing.str());
  std::cout << csv.str() << timing.str();
  return 0;
}

// ---------------------------------------------------------------- size

struct SizeFlags {
  std::string snapshot;
  std::uint64_t items = 0;
  std::uint32_t item_dim = 512;
  std::uint64_t text = 0;
  std::uint32_t dim = 64;
  std::uint32_t hidden = 64;
  std::uint64_t item_clusters = 0;
};

int cmd_size(const Global& g, const SizeFlags& f) {
  SnapshotHeader h;
  if (!f.snapshot.empty()) {
    h = read_snapshot_header(f.snapshot);
  } else {
    if (f.items == 0) throw UsageError("size needs --snapshot or --items");
    h.n_items = f.items;
    h.item_dim = f.item_dim;
    h.n_text = f.text;
    h.dim = f.dim;
    h.hidden = f.hidden;
    h.n_item_clusters = f.item_clusters;
    h.has_clusters = f.item_clusters > 0;
    h.mode = h.has_clusters ? SoftmaxMode::kTwoLevel : SoftmaxMode::kFull;
  }
  const std::string text = storage_report(h).to_json() + "\n";
  write_text(output_path(g, "size.json"), text);
  std::cout << text;
  return 0;
}

// ---------------------------------------------------------------- main

int fail(int code, const char* kind, const std::string& message) {
  std::cerr << "hsrec: " << kind << " error: " << message << '\n';
  Json j;
  j["error"] = kind;
  j["exit_code"] = code;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hsrec: item-ID recommendation with a two-level softmax"};
  app.require_subcommand(1);
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "key=value config file ([command] sections allowed)");
  app.fallthrough();

  Global g;
  app.add_option("--data", g.data, "interactions JSONL");
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads for eval")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();

  SynthFlags synth;
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic interaction log");
  c_synth->add_option("--users", synth.spec.n_users)->capture_default_str();
  c_synth->add_option("--items", synth.spec.n_items)->capture_default_str();
  c_synth->add_option("--groups", synth.spec.n_groups)->capture_default_str();
  c_synth->add_option("--history-min", synth.spec.history_min)->capture_default_str();
  c_synth->add_option("--history-max", synth.spec.history_max)->capture_default_str();
  c_synth->add_option("--stickiness", synth.spec.stickiness)->capture_default_str();

  auto* c_ingest = app.add_subcommand("ingest", "validate a log and report catalog statistics");

  ClusterFlags cluster;
  auto* c_cluster = app.add_subcommand("cluster", "partition items into clusters");
  c_cluster->add_option("--clusters", cluster.method, "kmeans|frequency|random")
      ->capture_default_str();
  c_cluster->add_option("--n-clusters", cluster.n_clusters, "0 = ceil(sqrt(|I|))")
      ->capture_default_str();
  c_cluster->add_option("--features", cluster.features, "item feature file for k-means");

  TrainFlags trainf;
  auto* c_train = app.add_subcommand("train", "train a model and write a snapshot");
  add_train_flags(c_train, trainf);
  c_train->add_option("--cluster-map", trainf.cluster_map, "clusters.csv from 'cluster'");

  EvalFlags evalf;
  auto* c_eval = app.add_subcommand("eval", "ranking metrics for a snapshot");
  c_eval->add_option("--snapshot", evalf.snapshot, "defaults to <out-dir>/model.snap");
  c_eval->add_option("--engine", evalf.engine, "full|structure|ann")->capture_default_str();
  c_eval->add_option("--split", evalf.split, "test|validation")->capture_default_str();
  c_eval->add_flag("--exclude-history", evalf.exclude_history, "drop history items from ranking");
  c_eval->add_option("--probe", evalf.probe, "ANN clusters probed (0 = brute force)")
      ->capture_default_str();
  c_eval->add_option("--max-users", evalf.max_users, "0 = all")->capture_default_str();
  c_eval->add_flag("--popularity", evalf.popularity, "evaluate the popularity baseline");
  c_eval->add_flag("--ablation", evalf.ablation,
                   "train and evaluate every clustering with structure and ann");
  add_train_flags(c_eval, evalf.train);

  LatencyFlags latency;
  auto* c_latency = app.add_subcommand("latency", "prefill/decode latency table");
  c_latency->add_option("--profile", latency.profiles, "profile name (repeatable)");
  c_latency->add_option("--encoder", latency.encoders, "id|title|category (repeatable)");
  c_latency->add_option("--profiles", latency.registry, "profile registry JSON");
  c_latency->add_option("--history", latency.history, "history length (0 = profile reference)")
      ->capture_default_str();
  c_latency->add_option("--const", latency.const_tokens, "prompt tokens (<0 = profile reference)")
      ->capture_default_str();

  BenchFlags bench;
  auto* c_bench = app.add_subcommand("bench", "time exact, structure and ann top-k");
  c_bench->add_option("--snapshot", bench.snapshot, "defaults to <out-dir>/model.snap");
  c_bench->add_option("--k", bench.k, "top-K size")->capture_default_str();
  c_bench->add_option("--queries", bench.queries, "test users used as queries")
      ->capture_default_str();
  c_bench->add_option("--probe", bench.probe, "ANN clusters probed (0 = brute force)")
      ->capture_default_str();

  SizeFlags size;
  auto* c_size = app.add_subcommand("size", "parameter and storage accounting");
  c_size->add_option("--snapshot", size.snapshot, "snapshot to inspect");
  c_size->add_option("--items", size.items, "|I| when no snapshot is given");
  c_size->add_option("--item-dim", size.item_dim, "k")->capture_default_str();
  c_size->add_option("--text", size.text, "|V|")->capture_default_str();
  c_size->add_option("--dim", size.dim, "d")->capture_default_str();
  c_size->add_option("--hidden", size.hidden, "encoder hidden width")->capture_default_str();
  c_size->add_option("--item-clusters", size.item_clusters, "centroid rows")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(1, "usage", e.what());
  }

  try {
    if (*c_synth) return cmd_synth(g, synth);
    if (*c_ingest) return cmd_ingest(g);
    if (*c_cluster) return cmd_cluster(g, cluster);
    if (*c_train) return cmd_train(g, trainf);
    if (*c_eval) return cmd_eval(g, evalf);
    if (*c_latency) return cmd_latency(g, latency);
    if (*c_bench) return cmd_bench(g, bench);
    if (*c_size) return cmd_size(g, size);
  } catch (const UsageError& e) {
    return fail(1, "usage", e.what());
  } catch (const DataError& e) {
    return fail(2, "data", e.what());
  } catch (const NumericalError& e) {
    return fail(3, "numerical", e.what());
  } catch (const std::exception& e) {
    return fail(2, "data", e.what());
  }
  return fail(1, "usage", "no command given");
}
