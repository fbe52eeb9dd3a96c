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

// Binary model snapshots.
//
// Layout (little-endian):
//   magic "HSRC", u32 format version, u32 d, u32 k, u32 hidden,
//   u64 |V|, u64 |I|, u64 item clusters, u64 model version,
//   u8 precision (4 = f32, 8 = f64), u8 softmax mode, u8 flags,
// then row-major payloads: E^V, E^I raw, head weight, head bias, E^C,
// cluster assignment (u32 per ordinal, when flagged), encoder W1 b1 W2 b2,
// and length-prefixed string tables (vocabulary, item keys) plus the price
// bucket edges.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsrec/model.hpp"

namespace hsrec {

inline constexpr std::uint32_t kSnapshotVersion = 1;

struct SnapshotHeader {
  std::uint32_t format_version = kSnapshotVersion;
  std::uint32_t dim = 0;
  std::uint32_t item_dim = 0;
  std::uint32_t hidden = 0;
  std::uint64_t n_text = 0;
  std::uint64_t n_items = 0;
  std::uint64_t n_item_clusters = 0;
  std::uint64_t model_version = 0;
  std::uint8_t precision = 4;
  SoftmaxMode mode = SoftmaxMode::kFull;
  bool has_clusters = false;
};

template <typename Scalar>
struct Snapshot {
  Model<Scalar> model;
  std::vector<std::string> vocab_words;
  std::vector<double> price_edges;
  std::vector<std::string> item_keys;
};

template <typename Scalar>
void save_snapshot(const Snapshot<Scalar>& snap, const std::string& path);

// Throws DataError on bad magic, unsupported version, precision mismatch or
// truncation.
template <typename Scalar>
Snapshot<Scalar> load_snapshot(const std::string& path);

SnapshotHeader read_snapshot_header(const std::string& path);

// Parameter accounting, computed from shapes alone.
struct StorageReport {
  std::uint64_t text_parameters = 0;
  std::uint64_t item_parameters = 0;  // |I| * k
  std::uint64_t head_parameters = 0;
  std::uint64_t centroid_parameters = 0;
  std::uint64_t encoder_parameters = 0;
  std::uint64_t total_parameters = 0;
  std::uint64_t payload_bytes = 0;

  std::string to_json() const;
};

StorageReport storage_report(const SnapshotHeader& header);

}  // namespace hsrec
