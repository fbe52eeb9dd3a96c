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

#include "hsrec/trainer.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <utility>

#include "hsrec/encoder.hpp"
#include "hsrec/eval.hpp"
#include "hsrec/log.hpp"

namespace hsrec {

namespace {

struct AdamState {
  std::vector<Vector<float>> m;
  std::vector<Vector<float>> v;
  std::size_t t = 0;
};

}  // namespace

const char* to_string(Optimizer o) { return o == Optimizer::kSgd ? "sgd" : "adamw"; }

Optimizer parse_optimizer(const std::string& s) {
  if (s == "sgd") return Optimizer::kSgd;
  if (s == "adamw") return Optimizer::kAdamW;
  throw UsageError("unknown optimizer '" + s + "' (expected sgd|adamw)");
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw UsageError("batch_size must be positive");
  if (!(learning_rate >= 0)) throw UsageError("learning_rate must be >= 0");
  if (!(weight_decay >= 0)) throw UsageError("weight_decay must be >= 0");
  if (!(render.id_only_fraction >= 0 && render.id_only_fraction <= 1)) {
    throw UsageError("id_only_fraction must lie in [0, 1]");
  }
  if (!(render.metadata_keep_prob >= 0 && render.metadata_keep_prob <= 1)) {
    throw UsageError("metadata_keep_prob must lie in [0, 1]");
  }
  if (eval_every == 0) throw UsageError("eval_every must be positive");
  if (shape.dim == 0 || shape.item_dim == 0 || shape.hidden == 0) {
    throw UsageError("model dimensions must be positive");
  }
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  os << "step,loss,val_recall@10\n";
  for (const auto& r : rows) {
    os << r.step << ',' << r.loss << ',';
    if (!std::isnan(r.val_recall_at_10)) os << r.val_recall_at_10;
    os << '\n';
  }
}

std::vector<SequenceExample> training_examples(const Splits& splits, const Catalog& catalog) {
  std::vector<SequenceExample> out;
  for (const auto& u : splits.users) {
    for (std::size_t t = 1; t < u.train.size(); ++t) {
      std::vector<std::uint32_t> history(u.train.begin(), u.train.begin() + t);
      out.push_back(make_example(u.user, history, u.train[t], catalog));
    }
  }
  return out;
}

Model<float> initial_model(const TrainingData& data, const TrainConfig& config,
                           std::optional<ClusterMap> clusters) {
  ModelShape shape = config.shape;
  shape.n_text = data.vocab->size();
  shape.n_items = data.catalog->size();
  return init_model<float>(shape, config.softmax_mode, std::move(clusters), config.seed,
                           config.centroid_init);
}

TrainResult train(const TrainingData& data, Model<float> model, const TrainConfig& config) {
  config.validate();
  if (model.mode == SoftmaxMode::kTwoLevel && !model.clusters) {
    throw UsageError("two-level training needs a cluster map");
  }
  const auto examples = training_examples(*data.splits, *data.catalog);
  TrainResult result;
  if (config.max_steps == 0) {
    result.model = std::move(model);
    return result;
  }
  if (examples.empty()) throw DataError("no training examples (train splits too short)");

  const auto validation = data.splits->validation_examples(*data.catalog);
  const RenderContext ctx = data.render_context();
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, examples.size() - 1);

  ModelGrad<float> grad = ModelGrad<float>::zeros_like(model);
  AdamState adam;
  if (config.optimizer == Optimizer::kAdamW) {
    for_each_parameter(model, grad, [&](auto p, auto) {
      adam.m.push_back(Vector<float>::Zero(p.size()));
      adam.v.push_back(Vector<float>::Zero(p.size()));
    });
  }

  Model<float> best = model;
  // validation Recall@10 first, MRR breaks ties (Recall@10 saturates on
  // small catalogs)
  std::pair<double, double> best_key{-1.0, -1.0};
  std::size_t evals_without_gain = 0;
  double loss_sum = 0;
  std::size_t loss_count = 0;

  for (std::size_t step = 0; step < config.max_steps; ++step) {
    const double lr = config.learning_rate * 0.5 *
                      (1.0 + std::cos(std::numbers::pi * double(step) / double(config.max_steps)));
    grad.set_zero();
    const Matrix<float> projected = model.projected_items();
    double batch_loss = 0;
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      const auto& ex = examples[pick(rng)];
      const auto rendered = render_example(ex, ctx, config.render, rng);
      batch_loss += accumulate_example_grad(model, projected,
                                            std::span<const TokenId>(rendered.tokens),
                                            ex.target, grad);
    }
    batch_loss /= double(config.batch_size);
    if (!std::isfinite(batch_loss)) {
      throw NumericalError("training loss is not finite at step " + std::to_string(step) +
                           " (lr=" + std::to_string(lr) + ")");
    }
    fold_projection(model, grad);

    const float scale = 1.0f / float(config.batch_size);
    const float lr_f = static_cast<float>(lr);
    const float decay = static_cast<float>(lr * config.weight_decay);
    if (config.optimizer == Optimizer::kSgd) {
      for_each_parameter(model, grad, [&](auto p, auto g) {
        p -= (lr_f * scale) * g;
        p -= decay * p;
      });
    } else {
      constexpr float kBeta1 = 0.9f, kBeta2 = 0.999f, kEps = 1e-8f;
      ++adam.t;
      const float c1 = 1.0f - std::pow(kBeta1, float(adam.t));
      const float c2 = 1.0f - std::pow(kBeta2, float(adam.t));
      std::size_t slot = 0;
      for_each_parameter(model, grad, [&](auto p, auto g) {
        auto& m = adam.m[slot];
        auto& v = adam.v[slot];
        ++slot;
        m = kBeta1 * m + (1 - kBeta1) * scale * g;
        v = kBeta2 * v + (1 - kBeta2) * (scale * g).cwiseAbs2();
        p.array() -= lr_f * ((m.array() / c1) / ((v.array() / c2).sqrt() + kEps));
        p -= decay * p;
      });
    }
    ++model.version;
    if (!model.all_finite()) {
      throw NumericalError("parameters became non-finite at step " + std::to_string(step));
    }
    loss_sum += batch_loss;
    ++loss_count;
    result.steps = step + 1;

    const bool last = step + 1 == config.max_steps;
    if ((step + 1) % config.eval_every == 0 || last) {
      EvalOptions eo;
      eo.engine = Engine::kFull;
      eo.max_users = config.eval_users;
      eo.max_history = config.render.max_history;
      const MetricReport report = evaluate(model, validation, ctx, eo);
      const double recall = report.recall_at_10;
      result.log.push_back({step + 1, loss_sum / double(loss_count), recall});
      log_info("step " + std::to_string(step + 1) + " loss " +
               std::to_string(loss_sum / double(loss_count)) + " val_recall@10 " +
               std::to_string(recall));
      loss_sum = 0;
      loss_count = 0;
      const std::pair<double, double> key{recall, report.mrr};
      if (key > best_key) {
        best_key = key;
        best = model;
        evals_without_gain = 0;
      } else if (config.patience > 0 && ++evals_without_gain >= config.patience) {
        result.early_stopped = true;
        break;
      }
    }
  }
  result.best_val_recall_at_10 = best_key.first;
  result.model = std::move(best);
  return result;
}

}  // namespace hsrec
