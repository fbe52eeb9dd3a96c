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

#include <random>
#include <sstream>

#include "hsrec/latency.hpp"

namespace hsrec {
namespace {

const DeploymentProfile& builtin(const std::string& name) {
  static const ProfileRegistry registry = ProfileRegistry::builtin();
  return registry.get(name);
}

EncodingSpec reference(const std::string& profile, const std::string& encoding) {
  return builtin(profile).reference_encodings.at(encoding);
}

TEST(LatencyTest, MistralHeadlineTotals) {
  const auto& p = builtin("mistral7b");
  const auto id = total_latency(p, reference("mistral7b", "id"));
  EXPECT_DOUBLE_EQ(id.prefill_ms, 35.0);
  EXPECT_DOUBLE_EQ(id.decode_ms, 20.0);
  EXPECT_DOUBLE_EQ(id.total_ms, 55.0);
  const auto title = total_latency(p, reference("mistral7b", "title"));
  EXPECT_DOUBLE_EQ(title.prefill_ms, 75.0);
  EXPECT_DOUBLE_EQ(title.decode_ms, 400.0);
  EXPECT_DOUBLE_EQ(title.total_ms, 475.0);
  EXPECT_NEAR(speedup(p, reference("mistral7b", "title"), reference("mistral7b", "id")), 8.6,
              0.05);
}

TEST(LatencyTest, PalmHeadlineTotals) {
  const auto& p = builtin("palm");
  const auto id = total_latency(p, reference("palm", "id"));
  EXPECT_DOUBLE_EQ(id.prefill_ms, 48.0);
  EXPECT_DOUBLE_EQ(id.total_ms, 68.0);
  const auto title = total_latency(p, reference("palm", "title"));
  EXPECT_DOUBLE_EQ(title.prefill_ms, 96.0);
  EXPECT_DOUBLE_EQ(title.decode_ms, 580.0);
  EXPECT_DOUBLE_EQ(title.total_ms, 676.0);
  EXPECT_NEAR(speedup(p, reference("palm", "title"), reference("palm", "id")), 9.9, 0.05);
}

TEST(LatencyTest, BuiltinProfilesAreLinearThroughOrigin) {
  EXPECT_NEAR(*builtin("mistral7b").linear_slope(), 35.0 / 133.0, 1e-12);
  EXPECT_NEAR(*builtin("palm").linear_slope(), 48.0 / 224.0, 1e-12);
}

TEST(LatencyTest, SingleTokenWithFreePrefillIsOneDecode) {
  DeploymentProfile p;
  p.name = "free-prefill";
  p.decode_ms = 13;
  p.prefill_slope_ms = 0.0;
  EXPECT_DOUBLE_EQ(total_latency(p, {1, 8, 100}).total_ms, 13.0);
}

TEST(LatencyTest, PiecewiseTableInterpolatesAndExtrapolates) {
  DeploymentProfile p;
  p.name = "table";
  p.prefill_table = {{0, 0}, {10, 5}, {20, 20}};
  EXPECT_DOUBLE_EQ(p.prefill_ms(10), 5.0);
  EXPECT_DOUBLE_EQ(p.prefill_ms(5), 2.5);
  EXPECT_DOUBLE_EQ(p.prefill_ms(15), 12.5);
  EXPECT_DOUBLE_EQ(p.prefill_ms(30), 35.0);
  EXPECT_FALSE(p.is_linear());
}

TEST(LatencyTest, ProfileValidation) {
  DeploymentProfile p;
  p.name = "bad";
  EXPECT_THROW(p.validate(), DataError);  // no prefill at all
  p.prefill_table = {{0, 0}, {10, 5}, {20, 4}};
  EXPECT_THROW(p.validate(), DataError);
  p.prefill_table = {{0, 0}, {10, 5}};
  p.prefill_slope_ms = 1.0;
  EXPECT_THROW(p.validate(), DataError);
  p.prefill_table.clear();
  p.decode_ms = -1;
  EXPECT_THROW(p.validate(), DataError);
  p.decode_ms = 1;
  EXPECT_NO_THROW(p.validate());
}

TEST(LatencyTest, EncodingSpecValidation) {
  EXPECT_THROW((EncodingSpec{0.5, 8, 0}).validate(), UsageError);
  EXPECT_THROW((EncodingSpec{1, 0, 0}).validate(), UsageError);
  EXPECT_THROW((EncodingSpec{1, 8, -1}).validate(), UsageError);
  EXPECT_NO_THROW((EncodingSpec{1, 1, 0}).validate());
}

TEST(SpeedupTest, LimitsOfTheClosedForm) {
  const EncodingSpec multi{12, 8, 20}, single{1, 8, 20};
  EXPECT_DOUBLE_EQ(speedup_linear(7.0, 0.0, multi, single), 12.0);
  EXPECT_DOUBLE_EQ(speedup_linear(0.0, 0.3, multi, single), 116.0 / 28.0);
}

TEST(SpeedupTest, LinearClosedFormMatchesProfile) {
  DeploymentProfile p;
  p.name = "lin";
  p.decode_ms = 20;
  p.prefill_slope_ms = 0.25;
  const EncodingSpec multi{5, 10, 40}, single{1, 10, 40};
  // (5*20 + 90*0.25) / (20 + 50*0.25) = 122.5 / 32.5
  EXPECT_DOUBLE_EQ(speedup(p, multi, single), 122.5 / 32.5);
  EXPECT_DOUBLE_EQ(speedup_linear(20, 0.25, multi, single), 122.5 / 32.5);
}

TEST(SpeedupTest, BoundsClosedForm) {
  const auto one = speedup_bounds({1, 8, 20}, {1, 8, 20});
  EXPECT_EQ(one.lower, 1.0);
  EXPECT_EQ(one.upper, 1.0);
  const auto b = speedup_bounds({12, 8, 20}, {1, 8, 20});
  EXPECT_DOUBLE_EQ(b.lower, 116.0 / 28.0);
  EXPECT_DOUBLE_EQ(b.upper, 12.0);
}

TEST(SpeedupTest, RandomLinearProfilesStayWithinBounds) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> m(1, 40), h(1, 60), c(0, 500), dec(0, 100),
      slope(0, 5);
  std::size_t violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const EncodingSpec multi{m(rng), h(rng), c(rng)};
    const EncodingSpec single{1, multi.history_len, multi.const_tokens};
    double d = dec(rng);
    const double s = slope(rng);
    if (i % 50 == 0) d = 0;  // pure prefill corner
    if (d == 0 && s == 0) continue;
    const double r = speedup_linear(d, s, multi, single);
    // independent restatement of the two limits
    const double lo = (multi.tokens_per_item * multi.history_len + multi.const_tokens) /
                      (multi.history_len + multi.const_tokens);
    const double hi = multi.tokens_per_item;
    const auto b = speedup_bounds(multi, single);
    EXPECT_NEAR(b.lower, lo, 1e-12 * hi);
    EXPECT_NEAR(b.upper, hi, 1e-12 * hi);
    if (r < lo * (1 - 1e-12) || r > hi * (1 + 1e-12)) ++violations;
  }
  EXPECT_EQ(violations, 0u);
}

TEST(LatencyTest, TotalIsMonotoneInEachArgument) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> m(1, 30), h(1, 40), c(0, 300), step(0, 5);
  for (const auto* name : {"mistral7b", "palm"}) {
    DeploymentProfile p = builtin(name);
    for (int i = 0; i < 500; ++i) {
      const EncodingSpec s{m(rng), h(rng), c(rng)};
      const double base = total_latency(p, s).total_ms;
      EXPECT_LE(base, total_latency(p, {s.tokens_per_item + step(rng), s.history_len,
                                        s.const_tokens}).total_ms);
      EXPECT_LE(base, total_latency(p, {s.tokens_per_item, s.history_len + step(rng),
                                        s.const_tokens}).total_ms);
      EXPECT_LE(base, total_latency(p, {s.tokens_per_item, s.history_len,
                                        s.const_tokens + step(rng)}).total_ms);
      DeploymentProfile slower = p;
      slower.decode_ms += step(rng);
      EXPECT_LE(base, total_latency(slower, s).total_ms);
    }
  }
}

TEST(RegistryTest, JsonRoundTrip) {
  const auto a = ProfileRegistry::builtin();
  const auto b = ProfileRegistry::from_json(a.to_json());
  ASSERT_EQ(a.profiles().size(), b.profiles().size());
  for (std::size_t i = 0; i < a.profiles().size(); ++i) {
    EXPECT_EQ(a.profiles()[i].name, b.profiles()[i].name);
    EXPECT_EQ(a.profiles()[i].prefill_table, b.profiles()[i].prefill_table);
    EXPECT_EQ(a.profiles()[i].decode_ms, b.profiles()[i].decode_ms);
    EXPECT_EQ(a.profiles()[i].reference_encodings.size(),
              b.profiles()[i].reference_encodings.size());
  }
  EXPECT_EQ(a.to_json(), b.to_json());
}

TEST(RegistryTest, SlopeProfileAndErrors) {
  const auto r = ProfileRegistry::from_json(
      R"({"profiles":[{"name":"x","decode_ms":10,"prefill_ms_per_token":0.5}]})");
  EXPECT_DOUBLE_EQ(total_latency(r.get("x"), {2, 4, 2}).total_ms, 20.0 + 5.0);
  EXPECT_THROW(r.get("y"), UsageError);
  EXPECT_THROW(ProfileRegistry::from_json("{"), DataError);
  EXPECT_THROW(ProfileRegistry::from_json(R"({"profiles":[{"decode_ms":1}]})"), DataError);
  EXPECT_THROW(ProfileRegistry::from_file("/nonexistent/profiles.json"), DataError);
}

TEST(MeasureMTest, HandCountedTitles) {
  // titles: 3, 2, 4 words; the fourth item has no title
  std::istringstream in(
      R"({"user":"u1","item":"a","timestamp":1,"title":"Red wool sock","category":"apparel"}
{"user":"u1","item":"b","timestamp":2,"title":"blue hat","category":"apparel hats"}
{"user":"u2","item":"c","timestamp":3,"title":"a very long title"}
{"user":"u2","item":"d","timestamp":4}
)");
  const auto log = ingest_jsonl(in);
  const auto vocab = Vocabulary::build(log.catalog);

  const auto id = measure_m(log.catalog, ItemEncoder::kId, vocab);
  EXPECT_EQ(id.n_items, 4u);
  EXPECT_EQ(id.mean, 1.0);
  EXPECT_EQ(id.histogram.at(1), 4u);

  const auto title = measure_m(log.catalog, ItemEncoder::kTitle, vocab);
  EXPECT_EQ(title.n_items, 3u);
  EXPECT_EQ(title.n_skipped, 1u);
  EXPECT_DOUBLE_EQ(title.mean, 3.0);
  EXPECT_EQ(title.histogram, (std::map<std::size_t, std::size_t>{{2, 1}, {3, 1}, {4, 1}}));

  const auto cat = measure_m(log.catalog, ItemEncoder::kCategory, vocab);
  EXPECT_EQ(cat.n_items, 2u);
  EXPECT_DOUBLE_EQ(cat.mean, 1.5);
}

TEST(MeasureMTest, EncoderNames) {
  for (auto e : {ItemEncoder::kId, ItemEncoder::kTitle, ItemEncoder::kCategory}) {
    EXPECT_EQ(parse_item_encoder(to_string(e)), e);
  }
  EXPECT_THROW(parse_item_encoder("semantic"), UsageError);
}

TEST(LatencyCsvTest, Layout) {
  EXPECT_EQ(latency_csv_header(), "dataset,encoder,profile,prefill_ms,decode_ms,total_ms,speedup");
  LatencyRow row;
  row.dataset = "synth";
  row.encoder = "title";
  row.profile = "mistral7b";
  row.latency = total_latency(builtin("mistral7b"), reference("mistral7b", "title"));
  row.speedup = 475.0 / 55.0;
  EXPECT_EQ(latency_csv_row(row), "synth,title,mistral7b,75.0000,400.0000,475.0000,8.6364");
}

}  // namespace
}  // namespace hsrec
