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

// Sequence encoder producing the query vector o from an interleaved
// text/item token sequence, plus hand-derived gradients for the whole
// pipeline (projection head -> mean pool -> MLP -> output softmax).
//
// The encoder is a stand-in backbone: mean pooling ignores token order.

#pragma once

#include <span>

#include "hsrec/model.hpp"
#include "hsrec/softmax.hpp"

namespace hsrec {

template <typename Scalar>
struct EncoderTrace {
  Vector<Scalar> mean;
  Vector<Scalar> hidden;
};

template <typename Scalar>
Vector<Scalar> encode(std::span<const TokenId> tokens, const Model<Scalar>& model,
                      const Matrix<Scalar>& projected,
                      EncoderTrace<Scalar>* trace = nullptr) {
  if (tokens.empty()) throw DataError("cannot encode an empty token sequence");
  Vector<Scalar> mean = Vector<Scalar>::Zero(model.dim());
  for (const TokenId& t : tokens) {
    model.space.check(t);
    if (t.is_text()) mean += model.text.row(t.index).transpose();
    else mean += projected.row(t.index).transpose();
  }
  mean /= static_cast<Scalar>(tokens.size());
  const auto& enc = model.encoder;
  Vector<Scalar> hidden = (enc.w1 * mean + enc.b1).array().tanh().matrix();
  Vector<Scalar> o = enc.w2 * hidden + enc.b2;
  if (trace) {
    trace->mean = std::move(mean);
    trace->hidden = std::move(hidden);
  }
  return o;
}

// Dense gradient buffers shaped like the model. `item_projected` collects
// gradients w.r.t. projected item rows; fold_projection() pushes them
// through the head into `item_raw` and `head`.
template <typename Scalar>
struct ModelGrad {
  Matrix<Scalar> text;
  Matrix<Scalar> item_projected;
  Matrix<Scalar> item_raw;
  ProjectionHead<Scalar> head;
  Matrix<Scalar> centroids;
  EncoderParams<Scalar> encoder;

  static ModelGrad zeros_like(const Model<Scalar>& m) {
    ModelGrad g;
    g.text = Matrix<Scalar>::Zero(m.text.rows(), m.text.cols());
    g.item_projected = Matrix<Scalar>::Zero(m.item_raw.rows(), m.dim());
    g.item_raw = Matrix<Scalar>::Zero(m.item_raw.rows(), m.item_raw.cols());
    g.head = ProjectionHead<Scalar>(m.head.in_dim(), m.head.out_dim());
    g.centroids = Matrix<Scalar>::Zero(m.centroids.rows(), m.centroids.cols());
    g.encoder = {Matrix<Scalar>::Zero(m.encoder.w1.rows(), m.encoder.w1.cols()),
                 Vector<Scalar>::Zero(m.encoder.b1.size()),
                 Matrix<Scalar>::Zero(m.encoder.w2.rows(), m.encoder.w2.cols()),
                 Vector<Scalar>::Zero(m.encoder.b2.size())};
    return g;
  }

  void set_zero() {
    text.setZero();
    item_projected.setZero();
    item_raw.setZero();
    head.weight.setZero();
    head.bias.setZero();
    centroids.setZero();
    encoder.w1.setZero();
    encoder.b1.setZero();
    encoder.w2.setZero();
    encoder.b2.setZero();
  }
};

template <typename Scalar>
void encode_backward(std::span<const TokenId> tokens, const Model<Scalar>& model,
                     const EncoderTrace<Scalar>& trace, const Vector<Scalar>& grad_o,
                     ModelGrad<Scalar>& grad) {
  const auto& enc = model.encoder;
  grad.encoder.w2.noalias() += grad_o * trace.hidden.transpose();
  grad.encoder.b2 += grad_o;
  const Vector<Scalar> grad_pre =
      ((enc.w2.transpose() * grad_o).array() * (Scalar(1) - trace.hidden.array().square()))
          .matrix();
  grad.encoder.w1.noalias() += grad_pre * trace.mean.transpose();
  grad.encoder.b1 += grad_pre;
  const Vector<Scalar> grad_in =
      (enc.w1.transpose() * grad_pre) / static_cast<Scalar>(tokens.size());
  for (const TokenId& t : tokens) {
    if (t.is_text()) grad.text.row(t.index) += grad_in.transpose();
    else grad.item_projected.row(t.index) += grad_in.transpose();
  }
}

// Scatters the rank-one output-layer gradients coef * o into the buffers.
template <typename Scalar>
void scatter_output_grad(const LossGrad<Scalar>& lg, const Vector<Scalar>& o,
                         const ClusterMap* map, const TokenSpace& space,
                         ModelGrad<Scalar>& grad) {
  for (const auto& [w, coef] : lg.token_coef) {
    if (w < space.n_text()) grad.text.row(w) += coef * o.transpose();
    else grad.item_projected.row(w - space.n_text()) += coef * o.transpose();
  }
  for (const auto& [c, coef] : lg.centroid_coef) {
    // text-token clusters share the E^V row
    if (map->is_text_cluster(c)) grad.text.row(c) += coef * o.transpose();
    else grad.centroids.row(map->centroid_row(c)) += coef * o.transpose();
  }
}

// -log P(target | tokens) and its gradient accumulated into `grad`
// (excluding the fold through the projection head).
template <typename Scalar>
double accumulate_example_grad(const Model<Scalar>& model, const Matrix<Scalar>& projected,
                               std::span<const TokenId> tokens, TokenId target,
                               ModelGrad<Scalar>& grad, CostCounter* cost = nullptr) {
  EncoderTrace<Scalar> trace;
  const Vector<Scalar> o = encode(tokens, model, projected, &trace);
  const auto layer = model.output(projected);
  const auto lg = nll_and_grad(o, target, layer, model.cluster_map(), model.mode, cost);
  scatter_output_grad(lg, o, model.cluster_map(), model.space, grad);
  encode_backward(tokens, model, trace, lg.grad_o, grad);
  return lg.loss;
}

template <typename Scalar>
void fold_projection(const Model<Scalar>& model, ModelGrad<Scalar>& grad) {
  grad.item_raw.noalias() += grad.item_projected * model.head.weight;
  grad.head.weight.noalias() += grad.item_projected.transpose() * model.item_raw;
  grad.head.bias += grad.item_projected.colwise().sum().transpose();
  grad.item_projected.setZero();
}

template <typename Scalar>
double example_loss(const Model<Scalar>& model, std::span<const TokenId> tokens,
                    TokenId target) {
  const Matrix<Scalar> projected = model.projected_items();
  const Vector<Scalar> o = encode(tokens, model, projected);
  const auto layer = model.output(projected);
  if (model.mode == SoftmaxMode::kFull) return -full_logprob(o, target, layer);
  return -two_level_logprob(o, target, layer, *model.cluster_map());
}

// Visits matching (parameter, gradient) blocks as flat vectors.
template <typename Scalar, typename Fn>
void for_each_parameter(Model<Scalar>& model, ModelGrad<Scalar>& grad, Fn&& fn) {
  auto flat = [](auto& m) {
    return Eigen::Map<Vector<Scalar>>(m.data(), m.size());
  };
  fn(flat(model.text), flat(grad.text));
  fn(flat(model.item_raw), flat(grad.item_raw));
  fn(flat(model.head.weight), flat(grad.head.weight));
  fn(flat(model.head.bias), flat(grad.head.bias));
  fn(flat(model.centroids), flat(grad.centroids));
  fn(flat(model.encoder.w1), flat(grad.encoder.w1));
  fn(flat(model.encoder.b1), flat(grad.encoder.b1));
  fn(flat(model.encoder.w2), flat(grad.encoder.w2));
  fn(flat(model.encoder.b2), flat(grad.encoder.b2));
}

}  // namespace hsrec
