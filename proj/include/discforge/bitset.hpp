#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace discforge {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t width) { return (width + kWordBits - 1) / kWordBits; }

using WordSpan = std::span<const Word>;

inline std::size_t popcount(WordSpan a) {
  std::size_t c = 0;
  for (Word w : a) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

/// Hamming distance of two equally sized word rows.
inline std::size_t xor_count(WordSpan a, WordSpan b) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < a.size(); ++i) c += static_cast<std::size_t>(std::popcount(a[i] ^ b[i]));
  return c;
}

/// Hamming distance, or `limit + 1` as soon as it exceeds `limit`.
inline std::size_t xor_count_capped(WordSpan a, WordSpan b, std::size_t limit) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    c += static_cast<std::size_t>(std::popcount(a[i] ^ b[i]));
    if (c > limit) return limit + 1;
  }
  return c;
}

inline std::size_t and_count(WordSpan a, WordSpan b) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < a.size(); ++i) c += static_cast<std::size_t>(std::popcount(a[i] & b[i]));
  return c;
}

inline bool words_equal(WordSpan a, WordSpan b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

std::uint64_t hash_words(WordSpan a);

/// Fixed-width set of ground elements 0..width-1.
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(std::size_t width) : width_(width), words_(words_for(width), 0) {}
  Bitset(std::size_t width, WordSpan words);
  Bitset(std::size_t width, std::initializer_list<std::size_t> elements);
  static Bitset from_elements(std::size_t width, std::span<const std::size_t> elements);
  static Bitset full(std::size_t width);

  std::size_t width() const noexcept { return width_; }
  bool test(std::size_t i) const { return (words_[i / kWordBits] >> (i % kWordBits)) & 1U; }
  void set(std::size_t i) { words_[i / kWordBits] |= Word{1} << (i % kWordBits); }
  void reset(std::size_t i) { words_[i / kWordBits] &= ~(Word{1} << (i % kWordBits)); }
  std::size_t count() const { return popcount(words_); }
  bool none() const;

  WordSpan words() const noexcept { return words_; }
  std::span<Word> mutable_words() noexcept { return words_; }

  std::vector<std::size_t> elements() const;

  Bitset& operator&=(const Bitset& o);
  Bitset& operator|=(const Bitset& o);
  Bitset& operator^=(const Bitset& o);
  /// Set difference: removes every element of `o`.
  Bitset& operator-=(const Bitset& o);

  friend Bitset operator&(Bitset a, const Bitset& b) { return a &= b; }
  friend Bitset operator|(Bitset a, const Bitset& b) { return a |= b; }
  friend Bitset operator^(Bitset a, const Bitset& b) { return a ^= b; }
  friend Bitset operator-(Bitset a, const Bitset& b) { return a -= b; }
  friend bool operator==(const Bitset& a, const Bitset& b) = default;

  bool is_subset_of(const Bitset& o) const;

 private:
  void check_width(const Bitset& o) const;

  std::size_t width_ = 0;
  std::vector<Word> words_;
};

struct BitsetHash {
  std::size_t operator()(const Bitset& b) const noexcept { return static_cast<std::size_t>(hash_words(b.words())); }
};

/// Interning table of equally sized word rows; ids are dense and assigned in
/// insertion order.
class RowTable {
 public:
  explicit RowTable(std::size_t row_words) : row_words_(row_words) {}

  /// Returns the row's id and whether it was newly inserted.
  std::pair<std::size_t, bool> insert(WordSpan row);
  std::optional<std::size_t> find(WordSpan row) const;
  std::size_t size() const noexcept { return next_.size(); }
  WordSpan row(std::size_t id) const { return {rows_.data() + id * row_words_, row_words_}; }

 private:
  std::size_t row_words_;
  std::vector<Word> rows_;
  std::vector<std::size_t> next_;
  std::unordered_map<std::uint64_t, std::size_t> head_;
};

/// Calls `f(i)` for every set bit of the row, in increasing order.
template <class F>
void for_each_bit(WordSpan row, F&& f) {
  for (std::size_t w = 0; w < row.size(); ++w) {
    Word x = row[w];
    while (x) {
      f(w * kWordBits + static_cast<std::size_t>(std::countr_zero(x)));
      x &= x - 1;
    }
  }
}

}  // namespace discforge
