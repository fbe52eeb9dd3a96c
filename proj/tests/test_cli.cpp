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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "hsrec/pipeline.hpp"
#include "json.hpp"

namespace hsrec {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("hsrec_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun run(const std::string& args) {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = std::string(HSREC_CLI_PATH) + " " + args + " >" + out.string() +
                            " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  // Small synthetic log shared by the pipeline tests.
  std::string synth() {
    const auto r = run("synth --users 120 --items 30 --groups 5 --seed 3 --out-dir " +
                       (dir_ / "s").string());
    EXPECT_EQ(r.code, 0) << r.err;
    return (dir_ / "s" / "interactions.jsonl").string();
  }

  static std::string small_model() { return " --dim 8 --item-dim 12 --hidden 8 --batch 8"; }

  fs::path dir_;
};

TEST_F(CliTest, SynthIsReproducible) {
  const auto a = synth();
  const std::string first = slurp(a);
  ASSERT_EQ(run("synth --users 120 --items 30 --groups 5 --seed 3 --out-dir " +
                (dir_ / "again").string())
                .code,
            0);
  EXPECT_EQ(first, slurp(dir_ / "again" / "interactions.jsonl"));
  EXPECT_EQ(slurp(dir_ / "s" / "groups.csv").rfind("item,group\n", 0), 0u);
}

TEST_F(CliTest, TrainIsReproducible) {
  const auto data = synth();
  for (const char* out : {"a", "b"}) {
    const auto r = run("train --data " + data + " --steps 30 --eval-every 10" + small_model() +
                       " --out-dir " + (dir_ / out).string());
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(dir_ / "a" / "model.snap"), slurp(dir_ / "b" / "model.snap"));
  EXPECT_EQ(slurp(dir_ / "a" / "metrics.csv"), slurp(dir_ / "b" / "metrics.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "train.json"), slurp(dir_ / "b" / "train.json"));
}

TEST_F(CliTest, ZeroStepsWritesTheInitialization) {
  const auto data = synth();
  const auto r = run("train --data " + data + " --steps 0 --seed 11 --clusters random" +
                     small_model() + " --out-dir " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto snap = load_snapshot<float>((dir_ / "model.snap").string());

  const Dataset d = load_dataset(data);
  TrainConfig cfg;
  cfg.shape.dim = 8;
  cfg.shape.item_dim = 12;
  cfg.shape.hidden = 8;
  cfg.seed = 11;
  ClusterMap map = make_cluster_map(ClusteringMethod::kRandom, d.space(), d.splits,
                                    default_cluster_count(d.space().n_items()), 11);
  const auto init = initial_model(d.training_data(), cfg, std::move(map));
  EXPECT_EQ(snap.model.text, init.text);
  EXPECT_EQ(snap.model.item_raw, init.item_raw);
  EXPECT_EQ(snap.model.head.weight, init.head.weight);
  EXPECT_EQ(snap.model.head.bias, init.head.bias);
  EXPECT_EQ(snap.model.centroids, init.centroids);
  EXPECT_EQ(snap.model.encoder.w1, init.encoder.w1);
  EXPECT_EQ(snap.model.encoder.w2, init.encoder.w2);
  EXPECT_EQ(snap.model.clusters->assignment(), init.clusters->assignment());
  EXPECT_EQ(snap.vocab_words, d.vocab.words());
}

TEST_F(CliTest, StructureAndFullWriteIdenticalMetrics) {
  const auto data = synth();
  const std::string out = " --out-dir " + dir_.string();
  ASSERT_EQ(run("train --data " + data + " --steps 40" + small_model() + out).code, 0);
  for (const char* engine : {"full", "structure", "ann"}) {
    const auto r = run("eval --data " + data + " --engine " + engine + out);
    ASSERT_EQ(r.code, 0) << r.err;
  }
  const std::string full = slurp(dir_ / "eval_full.json");
  EXPECT_EQ(full, slurp(dir_ / "eval_structure.json"));
  EXPECT_NE(nlohmann::json::parse(full).at("n_users").get<int>(), 0);

  ASSERT_EQ(run("eval --data " + data + " --engine full --threads 3 --out-dir " +
                (dir_ / "t3").string() + " --snapshot " + (dir_ / "model.snap").string())
                .code,
            0);
  EXPECT_EQ(full, slurp(dir_ / "t3" / "eval_full.json"));
}

TEST_F(CliTest, PrunedEngineOnFullSoftmaxSnapshotIsUsageError) {
  const auto data = synth();
  const std::string out = " --out-dir " + dir_.string();
  ASSERT_EQ(run("train --data " + data + " --mode full --steps 5" + small_model() + out).code, 0);
  EXPECT_EQ(run("eval --data " + data + " --engine structure" + out).code, 1);
}

TEST_F(CliTest, LatencyTitleRowForMistral) {
  const auto r = run("latency --profile mistral7b --encoder title --out-dir " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(dir_ / "latency.csv");
  EXPECT_EQ(csv,
            "dataset,encoder,profile,prefill_ms,decode_ms,total_ms,speedup\n"
            "reference,title,mistral7b,75.0000,400.0000,475.0000,8.6364\n");
}

TEST_F(CliTest, SizeReportsItemParameters) {
  const auto r = run("size --items 1000000 --item-dim 500 --out-dir " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out).at("item_parameters").get<std::uint64_t>(),
            500000000u);
}

TEST_F(CliTest, BenchWritesPerEngineStats) {
  const auto data = synth();
  const std::string out = " --out-dir " + dir_.string();
  ASSERT_EQ(run("train --data " + data + " --steps 5" + small_model() + out).code, 0);
  const auto r = run("bench --data " + data + " --k 5 --queries 20" + out);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(dir_ / "bench.csv");
  EXPECT_NE(csv.find("\nexact,20,5,"), std::string::npos);
  EXPECT_NE(csv.find("\nstructure,20,5,"), std::string::npos);
  EXPECT_NE(csv.find("\nann,20,5,"), std::string::npos);
  // structure is exact: full overlap with the exact top-k
  const auto line = csv.substr(csv.find("\nstructure"));
  EXPECT_NE(line.substr(0, line.find('\n', 1)).find(",1.000000"), std::string::npos);
  EXPECT_NE(slurp(dir_ / "bench_timing.csv").find("p50_us,p95_us"), std::string::npos);
}

TEST_F(CliTest, ConfigFilePrecedence) {
  const fs::path ini = dir_ / "run.ini";
  std::ofstream(ini) << "seed=5\n[synth]\nusers=9\nitems=12\ngroups=3\n";
  const std::string base = "synth --config " + ini.string() + " --out-dir ";
  ASSERT_EQ(run(base + (dir_ / "file").string()).code, 0);
  ASSERT_EQ(run(base + (dir_ / "flag").string() + " --users 4").code, 0);
  const auto users = [&](const char* sub) {
    const Dataset d = load_dataset((dir_ / sub / "interactions.jsonl").string());
    return d.log.users.size();
  };
  EXPECT_EQ(users("file"), 9u);
  EXPECT_EQ(users("flag"), 4u);

  std::ofstream(dir_ / "bad.ini") << "[synth]\nuserz=9\n";
  EXPECT_EQ(run("synth --config " + (dir_ / "bad.ini").string()).code, 1);
}

TEST_F(CliTest, ExitCodesAndJsonTrailer) {
  auto trailer = [](const CliRun& r) {
    const auto pos = r.err.rfind('{');
    return nlohmann::json::parse(r.err.substr(pos));
  };
  const auto usage = run("train");
  EXPECT_EQ(usage.code, 1);
  EXPECT_EQ(trailer(usage).at("error"), "usage");

  const auto data_err = run("ingest --data " + (dir_ / "missing.jsonl").string());
  EXPECT_EQ(data_err.code, 2);
  EXPECT_EQ(trailer(data_err).at("exit_code"), 2);

  std::ofstream(dir_ / "broken.jsonl") << "{\"user\":\"u\"}\n";
  EXPECT_EQ(run("ingest --data " + (dir_ / "broken.jsonl").string()).code, 2);

  const auto data = synth();
  const auto num = run("train --data " + data + " --optimizer sgd --lr 1e30 --steps 5" +
                       small_model() + " --out-dir " + dir_.string());
  EXPECT_EQ(num.code, 3);
  EXPECT_EQ(trailer(num).at("error"), "numerical");

  EXPECT_EQ(run("eval --data " + data + " --engine beam --out-dir " + dir_.string()).code, 1);
  EXPECT_EQ(run("train --data " + data + " --mode flat").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

}  // namespace
}  // namespace hsrec
