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

// Analytical prefill/decode latency of generating one item.
//
// An item encoded as m tokens costs m decode steps, and a history H puts
// m*|H| + const tokens into the prefill:
//
//   total = m * l_decode + l_prefill(m * |H| + const)

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hsrec/catalog.hpp"

namespace hsrec {

struct EncodingSpec {
  double tokens_per_item = 1;  // m
  double history_len = 1;      // |H|
  double const_tokens = 0;     // non-item prompt tokens

  void validate() const;
};

struct DeploymentProfile {
  std::string name;
  double decode_ms = 0;  // l_decode
  // Prefill is either linear (slope ms/token) or a monotone piecewise-linear
  // table of (tokens, ms) points.
  std::optional<double> prefill_slope_ms;
  std::vector<std::pair<double, double>> prefill_table;
  std::string note;
  // Named encodings the profile's constants were derived from.
  std::map<std::string, EncodingSpec> reference_encodings;

  double prefill_ms(double tokens) const;
  bool is_linear() const;
  // Per-token prefill slope when the profile is linear through the origin.
  std::optional<double> linear_slope() const;
  void validate() const;
};

struct LatencyBreakdown {
  double prefill_ms = 0;
  double decode_ms = 0;
  double total_ms = 0;
};

LatencyBreakdown total_latency(const DeploymentProfile& profile, const EncodingSpec& spec);

// Ratio of total latencies, multi-token over single-token.
double speedup(const DeploymentProfile& profile, const EncodingSpec& multi,
               const EncodingSpec& single);

// Closed form for a linear profile (l_prefill = per-token slope).
double speedup_linear(double decode_ms, double prefill_ms_per_token,
                      const EncodingSpec& multi, const EncodingSpec& single);

struct SpeedupBounds {
  double lower = 1;
  double upper = 1;
};

// For any nonnegative (l_decode, l_prefill) the linear speedup lies between
// m_multi/m_single (decode-bound) and (m_multi*|H|+const)/(m_single*|H|+const)
// (prefill-bound). Multi and single share |H| and const.
SpeedupBounds speedup_bounds(const EncodingSpec& multi, const EncodingSpec& single);

class ProfileRegistry {
 public:
  static ProfileRegistry builtin();
  static ProfileRegistry from_json(const std::string& text);
  static ProfileRegistry from_file(const std::string& path);

  const DeploymentProfile& get(const std::string& name) const;
  const std::vector<DeploymentProfile>& profiles() const { return profiles_; }
  std::string to_json() const;

 private:
  std::vector<DeploymentProfile> profiles_;
};

enum class ItemEncoder { kId, kTitle, kCategory };

const char* to_string(ItemEncoder e);
ItemEncoder parse_item_encoder(const std::string& s);

struct TokenCountStats {
  std::map<std::size_t, std::size_t> histogram;  // tokens -> items
  double mean = 0;
  std::size_t n_items = 0;
  std::size_t n_skipped = 0;  // items without the required metadata
};

// Tokens per item under the vocabulary's tokenization; id encoding is one
// token per item.
TokenCountStats measure_m(const Catalog& catalog, ItemEncoder encoder,
                          const Vocabulary& vocab);

struct LatencyRow {
  std::string dataset;
  std::string encoder;
  std::string profile;
  LatencyBreakdown latency;
  double speedup = 1;
  SpeedupBounds bounds;
};

std::string latency_csv_header();
std::string latency_csv_row(const LatencyRow& row);

}  // namespace hsrec
