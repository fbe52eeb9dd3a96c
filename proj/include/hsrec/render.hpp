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
#include <random>
#include <vector>

#include "hsrec/catalog.hpp"
#include "hsrec/types.hpp"

namespace hsrec {

struct RenderOptions {
  // Fraction of training examples rendered with item tokens only.
  double id_only_fraction = 0.25;
  // Per item, per metadata field keep probability in mixed examples.
  double metadata_keep_prob = 0.5;
  // Only the most recent items of a history are rendered (0 = all).
  std::size_t max_history = 50;
};

// Everything needed to turn a SequenceExample into tokens.
struct RenderContext {
  const Vocabulary* vocab = nullptr;
  const std::vector<ItemTokens>* item_tokens = nullptr;
};

struct RenderedExample {
  std::vector<TokenId> tokens;
  bool id_only = false;
};

// Prompt prefix, then per history item "id: <item>" followed by a sampled
// subset of its metadata fields ("title: ...", "brand: ...", ...), then the
// prompt suffix ending in "id:". With probability id_only_fraction the whole
// example carries no metadata.
RenderedExample render_example(const SequenceExample& example,
                               const RenderContext& ctx,
                               const RenderOptions& options, std::mt19937_64& rng);

// Evaluation rendering: always ID-only.
std::vector<TokenId> render_id_only(const SequenceExample& example,
                                    const RenderContext& ctx,
                                    std::size_t max_history = 50);

}  // namespace hsrec
