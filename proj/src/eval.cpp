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

#include "hsrec/eval.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

namespace hsrec {

const char* to_string(Engine e) {
  switch (e) {
    case Engine::kFull: return "full";
    case Engine::kStructure: return "structure";
    case Engine::kAnn: return "ann";
  }
  return "?";
}

Engine parse_engine(const std::string& s) {
  if (s == "full") return Engine::kFull;
  if (s == "structure") return Engine::kStructure;
  if (s == "ann") return Engine::kAnn;
  throw UsageError("unknown engine '" + s + "' (expected full|structure|ann)");
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["recall@1"] = recall_at_1;
  j["recall@10"] = recall_at_10;
  j["ndcg@10"] = ndcg_at_10;
  j["mrr"] = mrr;
  j["n_users"] = n_users;
  return j.dump(2);
}

std::string MetricReport::csv_header() {
  return "dataset,engine,clustering,recall@1,recall@10,ndcg@10,mrr,n_users";
}

std::string MetricReport::csv_row(const std::string& dataset, const std::string& engine,
                                  const std::string& clustering) const {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << dataset << ',' << engine << ',' << clustering << ',' << recall_at_1
     << ',' << recall_at_10 << ',' << ndcg_at_10 << ',' << mrr << ',' << n_users;
  return os.str();
}

MetricReport metrics_from_ranks(const std::vector<std::uint64_t>& ranks) {
  MetricReport r;
  r.n_users = ranks.size();
  if (ranks.empty()) return r;
  double hit1 = 0, hit10 = 0, ndcg = 0, mrr = 0;
  for (auto rank : ranks) {
    if (rank == 0) throw std::invalid_argument("ranks are 1-based");
    if (rank <= 1) hit1 += 1;
    if (rank <= 10) {
      hit10 += 1;
      ndcg += 1.0 / std::log2(double(rank) + 1.0);
    }
    mrr += 1.0 / double(rank);
  }
  const double n = double(ranks.size());
  r.recall_at_1 = hit1 / n;
  r.recall_at_10 = hit10 / n;
  r.ndcg_at_10 = ndcg / n;
  r.mrr = mrr / n;
  return r;
}

std::vector<std::uint64_t> popularity_ranks(const std::vector<SequenceExample>& examples,
                                            const std::vector<std::uint64_t>& counts,
                                            bool exclude_history) {
  std::vector<std::uint64_t> ranks;
  ranks.reserve(examples.size());
  for (const auto& ex : examples) {
    const std::uint32_t t = ex.target.index;
    std::unordered_set<std::uint32_t> excluded;
    if (exclude_history) {
      for (const auto& h : ex.history) {
        if (h.item.index != t) excluded.insert(h.item.index);
      }
    }
    std::uint64_t before = 0;
    for (std::uint32_t i = 0; i < counts.size(); ++i) {
      if (excluded.count(i)) continue;
      if (counts[i] > counts[t] || (counts[i] == counts[t] && i < t)) ++before;
    }
    ranks.push_back(before + 1);
  }
  return ranks;
}

std::vector<std::uint64_t> pre_test_item_counts(const Splits& splits,
                                                std::uint32_t n_items) {
  std::vector<std::uint64_t> counts(n_items, 0);
  for (const auto& u : splits.users) {
    for (auto i : u.train) ++counts.at(i);
    ++counts.at(u.validation);
  }
  return counts;
}

}  // namespace hsrec
