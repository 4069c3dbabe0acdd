/*
 * Copyright 2026 The arcard Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "arcard/schema.hpp"
#include "arcard/store.hpp"

namespace arcard {

struct FactorizationSpec {
  uint32_t bits = 14;  // 0 disables factorization
};

// Bit slicing of one column's token space into digits, most significant
// first. The high digit carries whatever bits remain.
struct ColumnFactorization {
  uint32_t domain = 1;
  uint32_t bits = 0;
  uint32_t digits = 1;
  std::vector<uint32_t> sub_domains;

  static ColumnFactorization Make(uint32_t domain, uint32_t bits);

  uint32_t shift(uint32_t level) const { return bits * (digits - 1 - level); }
};

// Throws TokenOutOfRange when token >= domain.
std::vector<uint32_t> factorize(Token token, const ColumnFactorization& f);
// Throws SubtokenOutOfRange when a digit exceeds its sub-domain, and
// TokenOutOfRange when the digits spell a token outside the domain.
Token defactorize(std::span<const uint32_t> digits, const ColumnFactorization& f);

// A set of tokens as sorted, disjoint, non-adjacent inclusive intervals.
class TokenRegion {
 public:
  using Interval = std::pair<uint64_t, uint64_t>;

  TokenRegion() = default;
  static TokenRegion Range(uint64_t lo, uint64_t hi);  // empty if lo > hi
  static TokenRegion FromTokens(std::vector<uint64_t> tokens);
  static TokenRegion FromIntervals(std::vector<Interval> intervals);

  const std::vector<Interval>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  uint64_t size() const;
  bool contains(uint64_t t) const;
  bool intersects(uint64_t lo, uint64_t hi) const;
  // Whether [lo, hi] lies entirely inside the region.
  bool covers(uint64_t lo, uint64_t hi) const;
  TokenRegion intersect(const TokenRegion& other) const;

  bool operator==(const TokenRegion&) const = default;

 private:
  std::vector<Interval> intervals_;
};

// Tokens of `dict` satisfying `op literals`. NULL never qualifies.
// Throws BadLiteralType on a literal of the wrong type.
TokenRegion predicate_region(const Dictionary& dict, CompareOp op,
                             std::span<const Literal> literals);

// Allowed digit values at one level, as inclusive intervals.
struct DigitSet {
  std::vector<std::pair<uint32_t, uint32_t>> intervals;

  bool empty() const { return intervals.empty(); }
  bool contains(uint32_t d) const;
  uint64_t size() const;
};

// A token-space region rewritten over the digits of a factorized column.
// Digits are fixed high to low; `partial` is the token value contributed by
// the digits fixed so far (each digit already shifted into place).
//
// allowed() relaxes the region at one level: a digit is allowed if some
// completion lands in the region. Once covered() holds for the fixed prefix,
// every completion qualifies and the lower digits are wildcards.
class SubcolumnProgram {
 public:
  SubcolumnProgram(ColumnFactorization f, TokenRegion region);

  const ColumnFactorization& factorization() const { return f_; }
  const TokenRegion& region() const { return region_; }

  DigitSet allowed(uint32_t level, uint64_t partial) const;
  // `partial` includes the digit at `level`.
  bool covered(uint32_t level, uint64_t partial) const;
  // Runs the program over a full digit tuple.
  bool accepts(std::span<const uint32_t> digits) const;

 private:
  ColumnFactorization f_;
  TokenRegion region_;
};

SubcolumnProgram translate_predicate(const TokenRegion& region, const ColumnFactorization& f);

}  // namespace arcard
