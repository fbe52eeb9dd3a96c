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

#include "hsrec/synth.hpp"

#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace hsrec {

void SynthSpec::validate() const {
  if (n_users == 0) throw UsageError("synth: n_users must be positive");
  if (n_items == 0) throw UsageError("synth: n_items must be positive");
  if (n_groups == 0 || n_groups > n_items) {
    throw UsageError("synth: n_groups must lie in [1, n_items]");
  }
  if (history_min == 0 || history_min > history_max) {
    throw UsageError("synth: history range must satisfy 1 <= min <= max");
  }
  if (!(stickiness >= 0 && stickiness <= 1)) {
    throw UsageError("synth: stickiness must lie in [0, 1]");
  }
}

std::string SynthDataset::item_key(std::size_t i) { return "i" + std::to_string(i); }
std::string SynthDataset::user_key(std::size_t u) { return "u" + std::to_string(u); }

SynthDataset generate(const SynthSpec& spec) {
  spec.validate();
  SynthDataset d;
  std::vector<std::vector<std::size_t>> members(spec.n_groups);
  d.item_group.resize(spec.n_items);
  for (std::size_t i = 0; i < spec.n_items; ++i) {
    const std::size_t g = i % spec.n_groups;
    d.item_group[i] = g;
    d.item_titles.push_back("group-" + std::to_string(g) + " word-" +
                            std::to_string(members[g].size()));
    members[g].push_back(i);
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> group_of_user(0, spec.n_groups - 1);
  std::uniform_int_distribution<std::size_t> length(spec.history_min, spec.history_max);
  std::uniform_int_distribution<std::size_t> any_item(0, spec.n_items - 1);
  std::bernoulli_distribution sticky(spec.stickiness);

  std::int64_t clock = 0;
  d.user_group.resize(spec.n_users);
  for (std::size_t u = 0; u < spec.n_users; ++u) {
    const std::size_t g = group_of_user(rng);
    d.user_group[u] = g;
    const std::size_t n = length(rng);
    const auto& own = members[g];
    std::uniform_int_distribution<std::size_t> own_item(0, own.size() - 1);
    for (std::size_t t = 0; t < n; ++t) {
      std::size_t item;
      if (sticky(rng)) {
        item = own[own_item(rng)];
        ++d.sticky_draws;
      } else {
        item = any_item(rng);
      }
      d.events.push_back({SynthDataset::user_key(u), SynthDataset::item_key(item), clock++});
    }
  }
  return d;
}

void SynthDataset::write_jsonl(std::ostream& os) const {
  for (const auto& e : events) {
    const std::size_t i = std::stoul(e.item.substr(1));
    nlohmann::ordered_json j;
    j["user"] = e.user;
    j["item"] = e.item;
    j["timestamp"] = e.timestamp;
    j["title"] = item_titles[i];
    j["category"] = "group-" + std::to_string(item_group[i]);
    os << j.dump() << '\n';
  }
}

void SynthDataset::write_groups_csv(std::ostream& os) const {
  os << "item,group\n";
  for (std::size_t i = 0; i < item_group.size(); ++i) {
    os << item_key(i) << ',' << item_group[i] << '\n';
  }
}

InteractionLog SynthDataset::to_log() const {
  std::stringstream ss;
  write_jsonl(ss);
  return ingest_jsonl(ss);
}

std::vector<std::size_t> SynthDataset::groups_for(const Catalog& catalog) const {
  std::vector<std::size_t> out(catalog.size());
  for (std::uint32_t c = 0; c < catalog.size(); ++c) {
    const std::string& key = catalog[c].item_id;
    if (key.size() < 2 || key[0] != 'i') throw DataError("not a synthetic item key: " + key);
    const std::size_t i = std::stoul(key.substr(1));
    if (i >= item_group.size()) throw DataError("synthetic item out of range: " + key);
    out[c] = item_group[i];
  }
  return out;
}

}  // namespace hsrec
