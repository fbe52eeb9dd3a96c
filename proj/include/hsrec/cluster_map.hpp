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

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hsrec/types.hpp"

namespace hsrec {

// Total map from token ordinals to clusters.
//
// Cluster ids [0, |V|) are the text-token singletons, with c(v) = v.
// Cluster ids [|V|, |V| + n_item_clusters) partition the items. Member lists
// are kept in ascending ordinal order.
class ClusterMap {
 public:
  ClusterMap() = default;

  // `item_cluster[i]` is the item-cluster index (0-based) of item i.
  ClusterMap(TokenSpace space, const std::vector<std::uint32_t>& item_cluster,
             std::uint32_t n_item_clusters);

  // Rebuilds from a full per-ordinal assignment (as stored in snapshots).
  static ClusterMap from_assignment(TokenSpace space,
                                    std::vector<std::uint32_t> assignment);

  const TokenSpace& space() const { return space_; }
  std::uint32_t n_clusters() const {
    return static_cast<std::uint32_t>(members_.size());
  }
  std::uint32_t n_item_clusters() const { return n_clusters() - space_.n_text(); }
  bool is_text_cluster(std::uint32_t c) const { return c < space_.n_text(); }
  // Row of E^C backing an item cluster.
  std::uint32_t centroid_row(std::uint32_t c) const { return c - space_.n_text(); }

  std::uint32_t cluster_of(std::uint32_t ordinal) const { return assignment_[ordinal]; }
  std::uint32_t cluster_of(TokenId t) const { return assignment_[space_.ordinal(t)]; }
  const std::vector<std::uint32_t>& members(std::uint32_t c) const { return members_[c]; }
  const std::vector<std::uint32_t>& assignment() const { return assignment_; }
  std::uint32_t max_cluster_size() const;

  // Checks every structural invariant; throws DataError on violation.
  void validate() const;

  void write_csv(std::ostream& os) const;
  // Inverse of write_csv; throws DataError on malformed rows.
  static ClusterMap read_csv(std::istream& is, TokenSpace space);

 private:
  TokenSpace space_;
  std::vector<std::uint32_t> assignment_;
  std::vector<std::vector<std::uint32_t>> members_;

  void rebuild_members(std::uint32_t n_clusters);
};

}  // namespace hsrec
