#pragma once

// Finite set systems over the ground set [n] and the primitives every other
// module consumes: symmetric difference, projection (traces), shatter-function
// measurement and separation checks.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "discforge/bitset.hpp"

namespace discforge {

/// Ground set [n] plus an ordered list of ranges, stored as a contiguous
/// row-major matrix of words (one row per range).  Immutable once handed out
/// by the builders below; all mutators are for construction.
class SetSystem {
 public:
  SetSystem() = default;
  explicit SetSystem(std::size_t n);
  SetSystem(std::size_t n, const std::vector<Bitset>& ranges, bool dedupe = false);

  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return sizes_.size(); }
  bool empty() const noexcept { return sizes_.empty(); }
  std::size_t row_words() const noexcept { return row_words_; }
  /// A system projected onto an empty ground set.
  bool degenerate() const noexcept { return n_ == 0; }

  WordSpan range(std::size_t i) const { return {words_.data() + i * row_words_, row_words_}; }
  Bitset range_bitset(std::size_t i) const { return Bitset(n_, range(i)); }
  std::size_t range_size(std::size_t i) const { return sizes_[i]; }
  std::vector<std::size_t> range_elements(std::size_t i) const;

  void add_range(WordSpan row);
  void add_range(const Bitset& b);
  void add_range_elements(std::span<const std::size_t> elements);
  void reserve(std::size_t ranges) {
    words_.reserve(ranges * row_words_);
    sizes_.reserve(ranges);
  }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  void set_labels(std::vector<std::string> labels);

  /// Copy with duplicate ranges removed, keeping first occurrences in order.
  SetSystem deduped() const;
  bool has_duplicates() const;
  /// Index of a range equal to `row`, if any.
  std::optional<std::size_t> find(WordSpan row) const;

  /// Number of ranges containing each element.
  std::vector<std::size_t> degrees() const;
  std::size_t max_degree() const;

  friend bool operator==(const SetSystem& a, const SetSystem& b) {
    return a.n_ == b.n_ && a.words_ == b.words_ && a.sizes_ == b.sizes_;
  }

 private:
  std::size_t n_ = 0;
  std::size_t row_words_ = 0;
  std::vector<Word> words_;
  std::vector<std::size_t> sizes_;
  std::vector<std::string> labels_;
};

/// |a Δ b|.  Throws StructuralError on width mismatch.
std::size_t symmetric_difference_size(const Bitset& a, const Bitset& b);

/// Distinct traces S ∩ Y, reindexed onto [|Y|] in increasing element order.
/// An empty Y yields a degenerate n = 0 system holding the single empty trace.
SetSystem project(const SetSystem& sys, const Bitset& y);

/// Ranges of `sys` cut down to the `active` elements, without deduplication.
struct Restriction {
  SetSystem system;
  std::vector<std::size_t> source_range;  ///< restricted range -> original range index
  std::vector<std::size_t> elements;      ///< restricted element -> original element
};
Restriction restrict_to(const SetSystem& sys, const Bitset& active, bool drop_empty = true);

struct ShatterProfile {
  std::size_t m = 0;
  std::size_t total_projections = 0;
  /// by_size[k] = number of distinct traces of size <= k, for k = 0..m.
  std::vector<std::size_t> by_size;
  double fitted_d = 0.0;
  double fitted_d1 = 0.0;
  double fitted_d2 = 0.0;
};

/// Largest trace profile over `trials` random m-subsets.  Trial t draws its
/// subset from Rng(seed, t).  The single-call exponent estimates are
/// d = log(total)/log(m) and d2 = slope of log by_size[k] against log k.
ShatterProfile measure_shatter(const SetSystem& sys, std::size_t m, std::size_t trials, std::uint64_t seed);

struct ShatterFit {
  std::vector<ShatterProfile> ladder;
  double d = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Least-squares fit of log π(m) on log m over the ladder; d2 is taken from
/// the size histogram at the largest m and d1 = d - d2.
ShatterFit fit_shatter(const SetSystem& sys, const std::vector<std::size_t>& ladder, std::size_t trials,
                       std::uint64_t seed);

/// The m-ladder {16, 32, 64, ...} capped at n.
std::vector<std::size_t> default_shatter_ladder(std::size_t n);

/// True iff every pair of the listed ranges differs in more than `delta` elements.
bool is_delta_separated(const SetSystem& sys, const std::vector<std::size_t>& indices, double delta);

/// Ordinary least-squares slope of y on x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace discforge
