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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hsrec/types.hpp"

namespace hsrec {

enum MetadataField : std::uint8_t {
  kTitle = 1u << 0,
  kBrand = 1u << 1,
  kPrice = 1u << 2,
  kCategory = 1u << 3,
};

struct ItemRecord {
  std::string item_id;
  std::optional<std::string> title;
  std::optional<std::string> brand;
  std::optional<std::string> price;
  std::optional<std::string> category;

  // Bitmask of MetadataField values present on this record.
  std::uint8_t metadata_mask() const;
};

// Item catalog with unique external keys. Item index == insertion order.
class Catalog {
 public:
  // Returns the index of `key`, inserting a bare record if absent.
  std::uint32_t intern(const std::string& key);
  // Fills fields of an existing record that are still empty.
  void merge_metadata(std::uint32_t index, const ItemRecord& fields);

  std::optional<std::uint32_t> find(const std::string& key) const;
  const ItemRecord& operator[](std::uint32_t i) const { return items_[i]; }
  std::uint32_t size() const { return static_cast<std::uint32_t>(items_.size()); }
  const std::vector<ItemRecord>& items() const { return items_; }

 private:
  std::vector<ItemRecord> items_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct UserSequence {
  std::string user;
  std::vector<std::uint32_t> items;  // chronological
};

struct InteractionLog {
  Catalog catalog;
  std::vector<UserSequence> users;  // in order of first appearance
  std::size_t n_events = 0;
};

struct CatalogStats {
  double n_users = 0;
  double n_items = 0;
  double n_interactions = 0;
  double items_per_user = 0;
  double purchases_per_item = 0;

  std::string to_json() const;
};

CatalogStats compute_stats(const InteractionLog& log);

// One event per line: {"user", "item", "timestamp", optional "title",
// "brand", "price", "category"}. Per-user events are sorted by
// (timestamp, line order). Throws DataError naming the line and field.
InteractionLog ingest_jsonl(const std::string& path);
InteractionLog ingest_jsonl(std::istream& in);

struct HistoryEntry {
  TokenId item;
  std::uint8_t metadata_mask = 0;
};

struct SequenceExample {
  std::string user;
  std::vector<HistoryEntry> history;
  TokenId target;
};

struct UserSplit {
  std::string user;
  std::vector<std::uint32_t> train;
  std::uint32_t validation = 0;
  std::uint32_t test = 0;
};

struct Splits {
  std::vector<UserSplit> users;
  std::size_t dropped_users = 0;

  std::size_t n_events() const;
  // history = train, target = validation
  std::vector<SequenceExample> validation_examples(const Catalog& catalog) const;
  // history = train + validation, target = test
  std::vector<SequenceExample> test_examples(const Catalog& catalog) const;
};

// Leave-one-out: last event is test, second-to-last validation, remainder
// train. Users with fewer than three events are dropped and counted.
Splits split_leave_one_out(const InteractionLog& log);

SequenceExample make_example(const std::string& user,
                             const std::vector<std::uint32_t>& history,
                             std::uint32_t target, const Catalog& catalog);

// Text vocabulary standing in for an LLM tokenizer: whitespace-split,
// lowercased metadata words, most frequent first, with fixed prompt words,
// field labels, price-bucket tokens and an OOV token always present.
class Vocabulary {
 public:
  static constexpr std::size_t kDefaultCap = 8192;
  static constexpr int kPriceBuckets = 10;

  static Vocabulary build(const Catalog& catalog,
                          std::size_t cap = kDefaultCap);
  static Vocabulary from_words(std::vector<std::string> words,
                               std::vector<double> price_edges);

  std::uint32_t size() const { return static_cast<std::uint32_t>(words_.size()); }
  std::uint32_t oov() const { return 0; }
  std::uint32_t id(const std::string& word) const;
  const std::string& word(std::uint32_t id) const { return words_.at(id); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<double>& price_edges() const { return price_edges_; }

  std::vector<std::uint32_t> tokenize(const std::string& text) const;
  std::optional<std::uint32_t> price_token(const std::string& price) const;

  std::vector<std::uint32_t> prompt_prefix() const;
  std::vector<std::uint32_t> prompt_suffix() const;
  std::uint32_t label(MetadataField f) const;
  std::uint32_t id_label() const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<double> price_edges_;  // ascending, kPriceBuckets-1 entries

  void index_words();
};

std::vector<std::string> split_words(const std::string& text);
std::optional<double> parse_price(const std::string& price);

// Per-item metadata tokens, precomputed once per catalog.
struct ItemTokens {
  std::vector<std::uint32_t> title;
  std::vector<std::uint32_t> brand;
  std::vector<std::uint32_t> price;
  std::vector<std::uint32_t> category;

  const std::vector<std::uint32_t>& field(MetadataField f) const;
};

std::vector<ItemTokens> tokenize_catalog(const Catalog& catalog,
                                         const Vocabulary& vocab);

}  // namespace hsrec
