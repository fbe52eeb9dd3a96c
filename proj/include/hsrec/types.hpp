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

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hsrec {

// Row-major so that one token's embedding is a contiguous row.
template <typename Scalar>
using Matrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Error categories map onto CLI exit codes (usage=1, data=2, numerical=3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

enum class TokenKind : std::uint8_t { kText = 0, kItem = 1 };

struct TokenId {
  TokenKind kind = TokenKind::kText;
  std::uint32_t index = 0;

  static constexpr TokenId text(std::uint32_t i) { return {TokenKind::kText, i}; }
  static constexpr TokenId item(std::uint32_t i) { return {TokenKind::kItem, i}; }

  bool is_item() const { return kind == TokenKind::kItem; }
  bool is_text() const { return kind == TokenKind::kText; }

  friend bool operator==(const TokenId&, const TokenId&) = default;
};

// The combined output space V ∪ I. Text tokens occupy ordinals [0, |V|),
// items occupy [|V|, |V|+|I|).
class TokenSpace {
 public:
  TokenSpace() = default;
  TokenSpace(std::uint32_t n_text, std::uint32_t n_items)
      : n_text_(n_text), n_items_(n_items) {}

  std::uint32_t n_text() const { return n_text_; }
  std::uint32_t n_items() const { return n_items_; }
  std::uint32_t size() const { return n_text_ + n_items_; }

  std::uint32_t ordinal(TokenId t) const {
    check(t);
    return t.is_text() ? t.index : n_text_ + t.index;
  }

  TokenId token(std::uint32_t ordinal) const {
    if (ordinal >= size()) {
      throw std::out_of_range("token ordinal " + std::to_string(ordinal) +
                              " outside [0, " + std::to_string(size()) + ")");
    }
    return ordinal < n_text_ ? TokenId::text(ordinal)
                             : TokenId::item(ordinal - n_text_);
  }

  bool is_item_ordinal(std::uint32_t ordinal) const {
    return ordinal >= n_text_ && ordinal < size();
  }

  void check(TokenId t) const {
    const std::uint32_t bound = t.is_text() ? n_text_ : n_items_;
    if (t.index >= bound) {
      throw std::out_of_range(std::string(t.is_text() ? "text" : "item") +
                              " token " + std::to_string(t.index) +
                              " outside table of " + std::to_string(bound));
    }
  }

  friend bool operator==(const TokenSpace&, const TokenSpace&) = default;

 private:
  std::uint32_t n_text_ = 0;
  std::uint32_t n_items_ = 0;
};

enum class SoftmaxMode : std::uint8_t { kFull = 0, kTwoLevel = 1 };

inline const char* to_string(SoftmaxMode m) {
  return m == SoftmaxMode::kFull ? "full" : "twolevel";
}

inline SoftmaxMode parse_softmax_mode(const std::string& s) {
  if (s == "full") return SoftmaxMode::kFull;
  if (s == "twolevel" || s == "two_level" || s == "two-level") {
    return SoftmaxMode::kTwoLevel;
  }
  throw UsageError("unknown softmax mode '" + s + "' (expected full|twolevel)");
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace hsrec
