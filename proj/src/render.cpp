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

#include "hsrec/render.hpp"

namespace hsrec {

namespace {

constexpr MetadataField kFields[] = {kTitle, kBrand, kPrice, kCategory};

template <typename Fn>
void render_into(const SequenceExample& example, const RenderContext& ctx,
                 std::size_t max_history, std::vector<TokenId>& out, Fn&& emit_metadata) {
  const Vocabulary& vocab = *ctx.vocab;
  for (auto v : vocab.prompt_prefix()) out.push_back(TokenId::text(v));
  std::size_t first = 0;
  if (max_history > 0 && example.history.size() > max_history) {
    first = example.history.size() - max_history;
  }
  for (std::size_t j = first; j < example.history.size(); ++j) {
    const HistoryEntry& h = example.history[j];
    out.push_back(TokenId::text(vocab.id_label()));
    out.push_back(h.item);
    emit_metadata(h);
  }
  for (auto v : vocab.prompt_suffix()) out.push_back(TokenId::text(v));
}

}  // namespace

RenderedExample render_example(const SequenceExample& example,
                               const RenderContext& ctx,
                               const RenderOptions& options, std::mt19937_64& rng) {
  RenderedExample r;
  std::bernoulli_distribution id_only(options.id_only_fraction);
  std::bernoulli_distribution keep(options.metadata_keep_prob);
  r.id_only = id_only(rng);
  const Vocabulary& vocab = *ctx.vocab;
  render_into(example, ctx, options.max_history, r.tokens, [&](const HistoryEntry& h) {
    if (r.id_only) return;
    const ItemTokens& meta = (*ctx.item_tokens)[h.item.index];
    for (MetadataField f : kFields) {
      if (!(h.metadata_mask & f)) continue;
      if (!keep(rng)) continue;
      const auto& words = meta.field(f);
      if (words.empty()) continue;
      r.tokens.push_back(TokenId::text(vocab.label(f)));
      for (auto w : words) r.tokens.push_back(TokenId::text(w));
    }
  });
  return r;
}

std::vector<TokenId> render_id_only(const SequenceExample& example,
                                    const RenderContext& ctx, std::size_t max_history) {
  std::vector<TokenId> out;
  render_into(example, ctx, max_history, out, [](const HistoryEntry&) {});
  return out;
}

}  // namespace hsrec
