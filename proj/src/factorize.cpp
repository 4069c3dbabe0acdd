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

#include "arcard/factorize.hpp"

#include <algorithm>
#include <bit>

namespace arcard {

ColumnFactorization ColumnFactorization::Make(uint32_t domain, uint32_t bits) {
  if (domain == 0) fail(ErrorCode::kInvalidArgument, "empty column domain");
  if (bits > 31) fail(ErrorCode::kConfigError, "factorization bits must be at most 31");
  ColumnFactorization f;
  f.domain = domain;
  f.bits = bits;
  const uint32_t width = static_cast<uint32_t>(std::bit_width(domain - 1));
  f.digits = bits == 0 ? 1 : std::max(1u, (width + bits - 1) / bits);
  if (f.digits == 1) {
    f.sub_domains = {domain};
    return f;
  }
  f.sub_domains.assign(f.digits, 1u << bits);
  f.sub_domains[0] = ((domain - 1) >> f.shift(0)) + 1;
  return f;
}

std::vector<uint32_t> factorize(Token token, const ColumnFactorization& f) {
  if (token >= f.domain) {
    fail(ErrorCode::kTokenOutOfRange,
         "token " + std::to_string(token) + " outside domain " + std::to_string(f.domain));
  }
  std::vector<uint32_t> out(f.digits);
  if (f.digits == 1) {
    out[0] = token;
    return out;
  }
  const uint32_t mask = (1u << f.bits) - 1;
  for (uint32_t level = 0; level < f.digits; ++level) {
    out[level] = (token >> f.shift(level)) & mask;
  }
  return out;
}

Token defactorize(std::span<const uint32_t> digits, const ColumnFactorization& f) {
  if (digits.size() != f.digits) fail(ErrorCode::kSubtokenOutOfRange, "wrong digit count");
  uint64_t token = 0;
  for (uint32_t level = 0; level < f.digits; ++level) {
    if (digits[level] >= f.sub_domains[level]) {
      fail(ErrorCode::kSubtokenOutOfRange, "digit " + std::to_string(digits[level]) +
                                               " outside sub-domain at level " +
                                               std::to_string(level));
    }
    token |= static_cast<uint64_t>(digits[level]) << f.shift(level);
  }
  if (token >= f.domain) {
    fail(ErrorCode::kTokenOutOfRange, "digits spell token " + std::to_string(token) +
                                          " outside domain " + std::to_string(f.domain));
  }
  return static_cast<Token>(token);
}

// ---------------------------------------------------------------------------
// TokenRegion

TokenRegion TokenRegion::Range(uint64_t lo, uint64_t hi) {
  TokenRegion r;
  if (lo <= hi) r.intervals_.emplace_back(lo, hi);
  return r;
}

TokenRegion TokenRegion::FromTokens(std::vector<uint64_t> tokens) {
  std::vector<Interval> intervals;
  intervals.reserve(tokens.size());
  for (uint64_t t : tokens) intervals.emplace_back(t, t);
  return FromIntervals(std::move(intervals));
}

TokenRegion TokenRegion::FromIntervals(std::vector<Interval> intervals) {
  std::erase_if(intervals, [](const Interval& i) { return i.first > i.second; });
  std::sort(intervals.begin(), intervals.end());
  TokenRegion r;
  for (const auto& i : intervals) {
    if (!r.intervals_.empty() && i.first <= r.intervals_.back().second + 1) {
      r.intervals_.back().second = std::max(r.intervals_.back().second, i.second);
    } else {
      r.intervals_.push_back(i);
    }
  }
  return r;
}

uint64_t TokenRegion::size() const {
  uint64_t n = 0;
  for (const auto& [lo, hi] : intervals_) n += hi - lo + 1;
  return n;
}

bool TokenRegion::contains(uint64_t t) const { return covers(t, t); }

bool TokenRegion::intersects(uint64_t lo, uint64_t hi) const {
  // First interval ending at or after lo.
  auto it = std::lower_bound(intervals_.begin(), intervals_.end(), lo,
                             [](const Interval& i, uint64_t v) { return i.second < v; });
  return it != intervals_.end() && it->first <= hi;
}

bool TokenRegion::covers(uint64_t lo, uint64_t hi) const {
  auto it = std::lower_bound(intervals_.begin(), intervals_.end(), lo,
                             [](const Interval& i, uint64_t v) { return i.second < v; });
  return it != intervals_.end() && it->first <= lo && hi <= it->second;
}

TokenRegion TokenRegion::intersect(const TokenRegion& other) const {
  TokenRegion out;
  size_t i = 0;
  size_t j = 0;
  while (i < intervals_.size() && j < other.intervals_.size()) {
    const auto& a = intervals_[i];
    const auto& b = other.intervals_[j];
    const uint64_t lo = std::max(a.first, b.first);
    const uint64_t hi = std::min(a.second, b.second);
    if (lo <= hi) out.intervals_.emplace_back(lo, hi);
    if (a.second < b.second) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

TokenRegion predicate_region(const Dictionary& dict, CompareOp op,
                             std::span<const Literal> literals) {
  const bool want_int = dict.type() == ValueType::kInteger;
  for (const auto& lit : literals) {
    if (std::holds_alternative<int64_t>(lit) != want_int) {
      fail(ErrorCode::kBadLiteralType, "literal type does not match column type");
    }
  }
  if (op != CompareOp::kIn && literals.size() != 1) {
    fail(ErrorCode::kBadLiteralType, "comparison takes exactly one literal");
  }
  const uint64_t n = dict.value_count();
  auto value = [](const Literal& lit) -> Value {
    return std::visit([](const auto& v) { return Value(v); }, lit);
  };
  switch (op) {
    case CompareOp::kLt:
      return TokenRegion::Range(1, dict.count_less(value(literals[0])));
    case CompareOp::kLe:
      return TokenRegion::Range(1, dict.count_less_equal(value(literals[0])));
    case CompareOp::kGt:
      return TokenRegion::Range(dict.count_less_equal(value(literals[0])) + 1ull, n);
    case CompareOp::kGe:
      return TokenRegion::Range(dict.count_less(value(literals[0])) + 1ull, n);
    case CompareOp::kEq:
    case CompareOp::kIn: {
      std::vector<uint64_t> tokens;
      for (const auto& lit : literals) {
        if (auto t = dict.find(value(lit))) tokens.push_back(*t);
      }
      return TokenRegion::FromTokens(std::move(tokens));
    }
  }
  fail(ErrorCode::kUnsupportedOperator, "unknown operator");
}

// ---------------------------------------------------------------------------
// Digit programs

bool DigitSet::contains(uint32_t d) const {
  for (const auto& [lo, hi] : intervals) {
    if (lo <= d && d <= hi) return true;
  }
  return false;
}

uint64_t DigitSet::size() const {
  uint64_t n = 0;
  for (const auto& [lo, hi] : intervals) n += hi - lo + 1ull;
  return n;
}

SubcolumnProgram::SubcolumnProgram(ColumnFactorization f, TokenRegion region)
    : f_(std::move(f)), region_(std::move(region)) {}

DigitSet SubcolumnProgram::allowed(uint32_t level, uint64_t partial) const {
  DigitSet out;
  const uint32_t shift = f_.shift(level);
  const uint64_t last = f_.domain - 1ull;
  if (partial > last) return out;
  const uint64_t end =
      std::min<uint64_t>(last, partial + (static_cast<uint64_t>(f_.sub_domains[level]) << shift) - 1);
  auto it = std::lower_bound(region_.intervals().begin(), region_.intervals().end(), partial,
                             [](const TokenRegion::Interval& i, uint64_t v) { return i.second < v; });
  for (; it != region_.intervals().end() && it->first <= end; ++it) {
    const auto lo = static_cast<uint32_t>((std::max(it->first, partial) - partial) >> shift);
    const auto hi = static_cast<uint32_t>((std::min(it->second, end) - partial) >> shift);
    if (!out.intervals.empty() && lo <= out.intervals.back().second + 1) {
      out.intervals.back().second = std::max(out.intervals.back().second, hi);
    } else {
      out.intervals.emplace_back(lo, hi);
    }
  }
  return out;
}

bool SubcolumnProgram::covered(uint32_t level, uint64_t partial) const {
  const uint64_t last = f_.domain - 1ull;
  if (partial > last) return false;
  const uint64_t hi = std::min<uint64_t>(last, partial + (1ull << f_.shift(level)) - 1);
  return region_.covers(partial, hi);
}

bool SubcolumnProgram::accepts(std::span<const uint32_t> digits) const {
  if (digits.size() != f_.digits) fail(ErrorCode::kSubtokenOutOfRange, "wrong digit count");
  uint64_t partial = 0;
  for (uint32_t level = 0; level < f_.digits; ++level) {
    if (!allowed(level, partial).contains(digits[level])) return false;
    partial += static_cast<uint64_t>(digits[level]) << f_.shift(level);
    if (covered(level, partial)) return true;
  }
  return false;
}

SubcolumnProgram translate_predicate(const TokenRegion& region, const ColumnFactorization& f) {
  return SubcolumnProgram(f, region.intersect(TokenRegion::Range(0, f.domain - 1ull)));
}

}  // namespace arcard
