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

#include "hsrec/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace hsrec {

namespace {

const char* const kPromptPrefix =
    "the user has interacted with following items in chronological order";
const char* const kPromptSuffix =
    "which item will the user interact with next? id:";
const char* const kOov = "<oov>";

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string price_bucket_word(int b) { return "<price_" + std::to_string(b) + ">"; }

std::vector<std::string> reserved_words() {
  std::vector<std::string> words{kOov, "id:", "title:", "brand:", "price:",
                                 "category:"};
  for (int b = 0; b < Vocabulary::kPriceBuckets; ++b) {
    words.push_back(price_bucket_word(b));
  }
  for (const char* text : {kPromptPrefix, kPromptSuffix}) {
    for (auto& w : split_words(text)) {
      if (std::find(words.begin(), words.end(), w) == words.end()) {
        words.push_back(std::move(w));
      }
    }
  }
  return words;
}

std::string json_key(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    std::ostringstream os;
    os << v.get<double>();
    return os.str();
  }
  throw std::invalid_argument("expected string or number");
}

std::optional<std::string> optional_text(const nlohmann::json& obj,
                                         const char* field) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) {
    auto s = it->get<std::string>();
    if (s.empty()) return std::nullopt;
    return s;
  }
  return json_key(*it);
}

}  // namespace

std::uint8_t ItemRecord::metadata_mask() const {
  std::uint8_t m = 0;
  if (title) m |= kTitle;
  if (brand) m |= kBrand;
  if (price) m |= kPrice;
  if (category) m |= kCategory;
  return m;
}

std::uint32_t Catalog::intern(const std::string& key) {
  auto [it, inserted] = index_.try_emplace(key, size());
  if (inserted) {
    ItemRecord r;
    r.item_id = key;
    items_.push_back(std::move(r));
  }
  return it->second;
}

void Catalog::merge_metadata(std::uint32_t index, const ItemRecord& fields) {
  ItemRecord& r = items_.at(index);
  if (!r.title) r.title = fields.title;
  if (!r.brand) r.brand = fields.brand;
  if (!r.price) r.price = fields.price;
  if (!r.category) r.category = fields.category;
}

std::optional<std::uint32_t> Catalog::find(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

CatalogStats compute_stats(const InteractionLog& log) {
  CatalogStats s;
  s.n_users = static_cast<double>(log.users.size());
  s.n_items = static_cast<double>(log.catalog.size());
  s.n_interactions = static_cast<double>(log.n_events);
  s.items_per_user = s.n_users > 0 ? s.n_interactions / s.n_users : 0.0;
  s.purchases_per_item = s.n_items > 0 ? s.n_interactions / s.n_items : 0.0;
  return s;
}

std::string CatalogStats::to_json() const {
  nlohmann::ordered_json j;
  j["n_users"] = static_cast<std::uint64_t>(n_users);
  j["n_items"] = static_cast<std::uint64_t>(n_items);
  j["n_interactions"] = static_cast<std::uint64_t>(n_interactions);
  j["items_per_user"] = items_per_user;
  j["purchases_per_item"] = purchases_per_item;
  return j.dump(2);
}

InteractionLog ingest_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open interactions file '" + path + "'");
  return ingest_jsonl(in);
}

InteractionLog ingest_jsonl(std::istream& in) {
  struct Event {
    double timestamp;
    std::size_t order;
    std::uint32_t item;
  };
  InteractionLog log;
  std::unordered_map<std::string, std::size_t> user_slot;
  std::vector<std::vector<Event>> events;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(),
                    [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    const std::string where = "line " + std::to_string(line_no);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + ": malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw DataError(where + ": expected a JSON object");
    for (const char* field : {"user", "item", "timestamp"}) {
      if (!obj.contains(field) || obj[field].is_null()) {
        throw DataError(where + ": missing required field '" + field + "'");
      }
    }
    std::string user, item;
    double ts = 0;
    try {
      user = json_key(obj["user"]);
      item = json_key(obj["item"]);
      const auto& t = obj["timestamp"];
      ts = t.is_string() ? std::stod(t.get<std::string>()) : t.get<double>();
    } catch (const std::exception&) {
      throw DataError(where + ": field 'user', 'item' or 'timestamp' has an "
                              "unsupported type");
    }

    ItemRecord meta;
    meta.title = optional_text(obj, "title");
    meta.brand = optional_text(obj, "brand");
    meta.price = optional_text(obj, "price");
    meta.category = optional_text(obj, "category");
    const std::uint32_t idx = log.catalog.intern(item);
    log.catalog.merge_metadata(idx, meta);

    auto [it, inserted] = user_slot.try_emplace(user, log.users.size());
    if (inserted) {
      log.users.push_back({user, {}});
      events.emplace_back();
    }
    events[it->second].push_back({ts, line_no, idx});
    ++log.n_events;
  }

  for (std::size_t u = 0; u < events.size(); ++u) {
    auto& ev = events[u];
    std::stable_sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) {
      return a.timestamp < b.timestamp;
    });
    auto& seq = log.users[u].items;
    seq.reserve(ev.size());
    for (const auto& e : ev) seq.push_back(e.item);
  }
  return log;
}

std::size_t Splits::n_events() const {
  std::size_t n = 0;
  for (const auto& u : users) n += u.train.size() + 2;
  return n;
}

SequenceExample make_example(const std::string& user,
                             const std::vector<std::uint32_t>& history,
                             std::uint32_t target, const Catalog& catalog) {
  SequenceExample ex;
  ex.user = user;
  ex.history.reserve(history.size());
  for (auto i : history) {
    ex.history.push_back({TokenId::item(i), catalog[i].metadata_mask()});
  }
  ex.target = TokenId::item(target);
  return ex;
}

std::vector<SequenceExample> Splits::validation_examples(
    const Catalog& catalog) const {
  std::vector<SequenceExample> out;
  out.reserve(users.size());
  for (const auto& u : users) {
    out.push_back(make_example(u.user, u.train, u.validation, catalog));
  }
  return out;
}

std::vector<SequenceExample> Splits::test_examples(const Catalog& catalog) const {
  std::vector<SequenceExample> out;
  out.reserve(users.size());
  for (const auto& u : users) {
    auto history = u.train;
    history.push_back(u.validation);
    out.push_back(make_example(u.user, history, u.test, catalog));
  }
  return out;
}

Splits split_leave_one_out(const InteractionLog& log) {
  if (log.users.empty()) throw DataError("empty corpus: no interactions");
  Splits s;
  for (const auto& u : log.users) {
    const std::size_t n = u.items.size();
    if (n < 3) {
      ++s.dropped_users;
      continue;
    }
    UserSplit split;
    split.user = u.user;
    split.train.assign(u.items.begin(), u.items.end() - 2);
    split.validation = u.items[n - 2];
    split.test = u.items[n - 1];
    s.users.push_back(std::move(split));
  }
  if (s.users.empty()) {
    throw DataError("no user has at least 3 interactions");
  }
  return s;
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string w;
  while (is >> w) out.push_back(lower(w));
  return out;
}

std::optional<double> parse_price(const std::string& price) {
  std::string digits;
  for (char c : price) {
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') digits += c;
    else if (c == ',' || c == '$' || std::isspace(static_cast<unsigned char>(c))) continue;
    else if (!digits.empty()) break;
  }
  if (digits.empty()) return std::nullopt;
  try {
    double v = std::stod(digits);
    if (!std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

Vocabulary Vocabulary::build(const Catalog& catalog, std::size_t cap) {
  std::map<std::string, std::size_t> counts;
  std::vector<double> prices;
  for (const auto& r : catalog.items()) {
    for (const auto* f : {&r.title, &r.brand, &r.category}) {
      if (!*f) continue;
      for (auto& w : split_words(**f)) ++counts[w];
    }
    if (r.price) {
      if (auto p = parse_price(*r.price)) prices.push_back(*p);
    }
  }

  Vocabulary v;
  v.words_ = reserved_words();
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  // most frequent first; std::map order breaks ties alphabetically
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::unordered_set<std::string> reserved(v.words_.begin(), v.words_.end());
  for (auto& [w, c] : ranked) {
    if (v.words_.size() >= cap) break;
    if (reserved.count(w)) continue;
    v.words_.push_back(w);
  }

  std::sort(prices.begin(), prices.end());
  if (!prices.empty()) {
    for (int q = 1; q < kPriceBuckets; ++q) {
      const double pos = q * (prices.size() - 1) / double(kPriceBuckets);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min(lo + 1, prices.size() - 1);
      v.price_edges_.push_back(prices[lo] + (pos - lo) * (prices[hi] - prices[lo]));
    }
  }
  v.index_words();
  return v;
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words,
                                  std::vector<double> price_edges) {
  Vocabulary v;
  v.words_ = std::move(words);
  v.price_edges_ = std::move(price_edges);
  v.index_words();
  if (v.words_.empty() || v.words_[0] != kOov) {
    throw DataError("vocabulary must start with the OOV token");
  }
  return v;
}

void Vocabulary::index_words() {
  index_.clear();
  for (std::uint32_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
}

std::uint32_t Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? oov() : it->second;
}

std::vector<std::uint32_t> Vocabulary::tokenize(const std::string& text) const {
  std::vector<std::uint32_t> out;
  for (const auto& w : split_words(text)) out.push_back(id(w));
  return out;
}

std::optional<std::uint32_t> Vocabulary::price_token(const std::string& price) const {
  auto p = parse_price(price);
  if (!p) return std::nullopt;
  const auto bucket = std::upper_bound(price_edges_.begin(), price_edges_.end(), *p) -
                      price_edges_.begin();
  return id(price_bucket_word(static_cast<int>(bucket)));
}

std::vector<std::uint32_t> Vocabulary::prompt_prefix() const {
  return tokenize(kPromptPrefix);
}

std::vector<std::uint32_t> Vocabulary::prompt_suffix() const {
  return tokenize(kPromptSuffix);
}

std::uint32_t Vocabulary::label(MetadataField f) const {
  switch (f) {
    case kTitle: return id("title:");
    case kBrand: return id("brand:");
    case kPrice: return id("price:");
    case kCategory: return id("category:");
  }
  return oov();
}

std::uint32_t Vocabulary::id_label() const { return id("id:"); }

const std::vector<std::uint32_t>& ItemTokens::field(MetadataField f) const {
  switch (f) {
    case kTitle: return title;
    case kBrand: return brand;
    case kPrice: return price;
    case kCategory: return category;
  }
  return title;
}

std::vector<ItemTokens> tokenize_catalog(const Catalog& catalog,
                                         const Vocabulary& vocab) {
  std::vector<ItemTokens> out(catalog.size());
  for (std::uint32_t i = 0; i < catalog.size(); ++i) {
    const auto& r = catalog[i];
    if (r.title) out[i].title = vocab.tokenize(*r.title);
    if (r.brand) out[i].brand = vocab.tokenize(*r.brand);
    if (r.category) out[i].category = vocab.tokenize(*r.category);
    if (r.price) {
      if (auto t = vocab.price_token(*r.price)) out[i].price = {*t};
    }
  }
  return out;
}

}  // namespace hsrec
