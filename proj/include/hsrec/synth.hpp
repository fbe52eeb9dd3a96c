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

// Synthetic interaction logs with planted group structure.
//
// Every user belongs to one latent group. Each event picks an item of that
// group with probability `stickiness`, otherwise an item uniformly from the
// whole catalog. Item i belongs to group i mod n_groups.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "hsrec/catalog.hpp"

namespace hsrec {

struct SynthSpec {
  std::size_t n_users = 1000;
  std::size_t n_items = 200;
  std::size_t n_groups = 10;
  std::size_t history_min = 6;  // events per user, inclusive range
  std::size_t history_max = 20;
  double stickiness = 0.8;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthEvent {
  std::string user;
  std::string item;
  std::int64_t timestamp = 0;
};

struct SynthDataset {
  std::vector<SynthEvent> events;  // emission order
  std::vector<std::string> item_titles;
  std::vector<std::size_t> item_group;  // by synthetic item number
  std::vector<std::size_t> user_group;  // by synthetic user number
  std::size_t sticky_draws = 0;         // events drawn from the user's group

  static std::string item_key(std::size_t i);
  static std::string user_key(std::size_t u);

  void write_jsonl(std::ostream& os) const;
  void write_groups_csv(std::ostream& os) const;  // item,group
  // Parses the emitted JSONL, so the result matches ingest_jsonl exactly.
  InteractionLog to_log() const;
  // Ground-truth group keyed by catalog index of `log`.
  std::vector<std::size_t> groups_for(const Catalog& catalog) const;
};

SynthDataset generate(const SynthSpec& spec);

}  // namespace hsrec
