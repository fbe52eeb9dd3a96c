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

#include "hsrec/cluster_map.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace hsrec {

ClusterMap::ClusterMap(TokenSpace space,
                       const std::vector<std::uint32_t>& item_cluster,
                       std::uint32_t n_item_clusters)
    : space_(space) {
  if (item_cluster.size() != space.n_items()) {
    throw DataError("cluster assignment covers " +
                    std::to_string(item_cluster.size()) + " items, expected " +
                    std::to_string(space.n_items()));
  }
  assignment_.resize(space.size());
  for (std::uint32_t v = 0; v < space.n_text(); ++v) assignment_[v] = v;
  for (std::uint32_t i = 0; i < space.n_items(); ++i) {
    if (item_cluster[i] >= n_item_clusters) {
      throw DataError("item " + std::to_string(i) + " assigned to cluster " +
                      std::to_string(item_cluster[i]) + " of " +
                      std::to_string(n_item_clusters));
    }
    assignment_[space.n_text() + i] = space.n_text() + item_cluster[i];
  }
  rebuild_members(space.n_text() + n_item_clusters);
  validate();
}

ClusterMap ClusterMap::from_assignment(TokenSpace space,
                                       std::vector<std::uint32_t> assignment) {
  if (assignment.size() != space.size()) {
    throw DataError("cluster assignment has " + std::to_string(assignment.size()) +
                    " entries, token space has " + std::to_string(space.size()));
  }
  ClusterMap m;
  m.space_ = space;
  std::uint32_t n = space.n_text();
  for (auto c : assignment) n = std::max(n, c + 1);
  m.assignment_ = std::move(assignment);
  m.rebuild_members(n);
  m.validate();
  return m;
}

void ClusterMap::rebuild_members(std::uint32_t n_clusters) {
  members_.assign(n_clusters, {});
  for (std::uint32_t w = 0; w < assignment_.size(); ++w) {
    members_[assignment_[w]].push_back(w);
  }
}

std::uint32_t ClusterMap::max_cluster_size() const {
  std::size_t m = 0;
  for (const auto& c : members_) m = std::max(m, c.size());
  return static_cast<std::uint32_t>(m);
}

void ClusterMap::validate() const {
  if (assignment_.size() != space_.size()) {
    throw DataError("cluster map does not cover the token space");
  }
  for (std::uint32_t v = 0; v < space_.n_text(); ++v) {
    if (assignment_[v] != v || members_[v].size() != 1) {
      throw DataError("text token " + std::to_string(v) +
                      " is not alone in its own cluster");
    }
  }
  for (std::uint32_t c = space_.n_text(); c < members_.size(); ++c) {
    if (members_[c].empty()) {
      throw DataError("item cluster " + std::to_string(c) + " is empty");
    }
    for (auto w : members_[c]) {
      if (!space_.is_item_ordinal(w) || assignment_[w] != c) {
        throw DataError("cluster members are not the inverse of assignment");
      }
    }
  }
}

void ClusterMap::write_csv(std::ostream& os) const {
  os << "ordinal,cluster\n";
  for (std::uint32_t w = 0; w < assignment_.size(); ++w) {
    os << w << ',' << assignment_[w] << '\n';
  }
}

ClusterMap ClusterMap::read_csv(std::istream& is, TokenSpace space) {
  std::string line;
  if (!std::getline(is, line) || line != "ordinal,cluster") {
    throw DataError("cluster map: expected header 'ordinal,cluster'");
  }
  std::vector<std::uint32_t> assignment;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::uint64_t w = 0, c = 0;
    char comma = 0;
    if (!(row >> w >> comma >> c) || comma != ',' || !(row >> std::ws).eof() ||
        w != assignment.size() || c > UINT32_MAX) {
      throw DataError("cluster map: malformed row at line " + std::to_string(line_no));
    }
    assignment.push_back(static_cast<std::uint32_t>(c));
  }
  return from_assignment(space, std::move(assignment));
}

}  // namespace hsrec
