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

#include <cmath>
#include <map>
#include <sstream>

#include "hsrec/synth.hpp"

namespace hsrec {
namespace {

std::size_t number(const std::string& key) { return std::stoul(key.substr(1)); }

TEST(SynthTest, SameSeedSameOutput) {
  SynthSpec s;
  s.n_users = 50;
  s.seed = 42;
  std::ostringstream a, b;
  generate(s).write_jsonl(a);
  generate(s).write_jsonl(b);
  EXPECT_EQ(a.str(), b.str());
  s.seed = 43;
  std::ostringstream c;
  generate(s).write_jsonl(c);
  EXPECT_NE(a.str(), c.str());
}

TEST(SynthTest, CountsMatchSpec) {
  SynthSpec s;
  s.n_users = 300;
  s.n_items = 50;
  s.n_groups = 7;
  s.history_min = 3;
  s.history_max = 9;
  const auto d = generate(s);
  EXPECT_EQ(d.item_titles.size(), 50u);
  EXPECT_EQ(d.item_group.size(), 50u);
  EXPECT_EQ(d.user_group.size(), 300u);
  std::map<std::string, std::size_t> per_user;
  for (const auto& e : d.events) ++per_user[e.user];
  EXPECT_EQ(per_user.size(), 300u);
  for (const auto& [user, n] : per_user) {
    EXPECT_GE(n, 3u) << user;
    EXPECT_LE(n, 9u) << user;
  }
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(d.item_group[i], i % 7);
    EXPECT_EQ(d.item_titles[i].rfind("group-" + std::to_string(i % 7) + " word-", 0), 0u);
  }
  const auto log = d.to_log();
  EXPECT_EQ(log.users.size(), 300u);
  EXPECT_EQ(log.n_events, d.events.size());
}

TEST(SynthTest, StickinessWithinThreeSigma) {
  SynthSpec s;  // 1000 users, 200 items, 10 groups, stickiness 0.8
  const auto d = generate(s);
  const double n = double(d.events.size());

  const double p = s.stickiness;
  const double sigma = std::sqrt(p * (1 - p) / n);
  EXPECT_NEAR(double(d.sticky_draws) / n, p, 3 * sigma);

  // Counted from the emitted events alone: uniform draws also land in the
  // user's group one time in n_groups.
  std::size_t in_group = 0;
  for (const auto& e : d.events) {
    if (d.item_group[number(e.item)] == d.user_group[number(e.user)]) ++in_group;
  }
  const double q = p + (1 - p) / double(s.n_groups);
  const double sigma_q = std::sqrt(q * (1 - q) / n);
  EXPECT_NEAR(double(in_group) / n, q, 3 * sigma_q);
}

TEST(SynthTest, ZeroStickinessIsUniformOverItems) {
  SynthSpec s;
  s.n_users = 2000;
  s.n_items = 40;
  s.n_groups = 4;
  s.stickiness = 0;
  const auto d = generate(s);
  EXPECT_EQ(d.sticky_draws, 0u);
  std::vector<double> counts(s.n_items, 0);
  for (const auto& e : d.events) counts[number(e.item)] += 1;
  const double n = double(d.events.size());
  const double p = 1.0 / double(s.n_items);
  const double sigma = std::sqrt(n * p * (1 - p));
  for (double c : counts) EXPECT_NEAR(c, n * p, 4 * sigma);
}

TEST(SynthTest, FullStickinessOneItemPerGroup) {
  SynthSpec s;
  s.n_users = 40;
  s.n_items = 5;
  s.n_groups = 5;
  s.stickiness = 1;
  const auto d = generate(s);
  for (const auto& e : d.events) {
    EXPECT_EQ(number(e.item), d.user_group[number(e.user)]);
  }
}

TEST(SynthTest, JsonlAndGroupsCsv) {
  SynthSpec s;
  s.n_users = 2;
  s.n_items = 3;
  s.n_groups = 2;
  s.history_min = s.history_max = 1;
  const auto d = generate(s);
  std::ostringstream csv;
  d.write_groups_csv(csv);
  EXPECT_EQ(csv.str(), "item,group\ni0,0\ni1,1\ni2,0\n");
  std::ostringstream jsonl;
  d.write_jsonl(jsonl);
  const std::string first = jsonl.str().substr(0, jsonl.str().find('\n'));
  EXPECT_EQ(first.rfind("{\"user\":\"u0\",\"item\":\"i", 0), 0u);
  EXPECT_NE(first.find("\"timestamp\":0"), std::string::npos);
  EXPECT_NE(first.find("\"category\":\"group-"), std::string::npos);
}

TEST(SynthTest, GroundTruthFollowsCatalogIndex) {
  SynthSpec s;
  s.n_users = 100;
  s.n_items = 30;
  s.n_groups = 3;
  const auto d = generate(s);
  const auto log = d.to_log();
  const auto groups = d.groups_for(log.catalog);
  ASSERT_EQ(groups.size(), log.catalog.size());
  for (std::uint32_t c = 0; c < log.catalog.size(); ++c) {
    EXPECT_EQ(groups[c], number(log.catalog[c].item_id) % 3);
  }
}

TEST(SynthTest, InvalidSpecs) {
  auto bad = [](auto mutate) {
    SynthSpec s;
    mutate(s);
    return s;
  };
  EXPECT_THROW(generate(bad([](SynthSpec& s) { s.n_users = 0; })), UsageError);
  EXPECT_THROW(generate(bad([](SynthSpec& s) { s.n_groups = 300; })), UsageError);
  EXPECT_THROW(generate(bad([](SynthSpec& s) { s.n_groups = 0; })), UsageError);
  EXPECT_THROW(generate(bad([](SynthSpec& s) { s.stickiness = 1.5; })), UsageError);
  EXPECT_THROW(generate(bad([](SynthSpec& s) { s.history_min = 9; s.history_max = 3; })),
               UsageError);
  EXPECT_THROW(generate(bad([](SynthSpec& s) { s.history_min = 0; })), UsageError);
}

}  // namespace
}  // namespace hsrec
