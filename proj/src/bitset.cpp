#include "discforge/bitset.hpp"

#include <string>

#include "discforge/error.hpp"

namespace discforge {

std::uint64_t hash_words(WordSpan a) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ a.size();
  for (Word w : a) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0x100000001b3ULL;
  }
  return h ^ (h >> 29);
}

namespace {
constexpr std::size_t kNone = static_cast<std::size_t>(-1);
}  // namespace

std::pair<std::size_t, bool> RowTable::insert(WordSpan row) {
  const std::uint64_t h = hash_words(row);
  auto [it, fresh] = head_.try_emplace(h, size());
  if (!fresh) {
    for (std::size_t id = it->second;; id = next_[id]) {
      if (words_equal(this->row(id), row)) return {id, false};
      if (next_[id] == kNone) {
        next_[id] = size();
        break;
      }
    }
  }
  rows_.insert(rows_.end(), row.begin(), row.end());
  next_.push_back(kNone);
  return {size() - 1, true};
}

std::optional<std::size_t> RowTable::find(WordSpan row) const {
  auto it = head_.find(hash_words(row));
  if (it == head_.end()) return std::nullopt;
  for (std::size_t id = it->second; id != kNone; id = next_[id])
    if (words_equal(this->row(id), row)) return id;
  return std::nullopt;
}

Bitset::Bitset(std::size_t width, WordSpan words) : width_(width), words_(words.begin(), words.end()) {
  if (words_.size() != words_for(width)) throw StructuralError("bitset word count does not match width");
}

Bitset::Bitset(std::size_t width, std::initializer_list<std::size_t> elements) : Bitset(width) {
  for (std::size_t e : elements) {
    if (e >= width) throw StructuralError("element " + std::to_string(e) + " outside width " + std::to_string(width));
    set(e);
  }
}

Bitset Bitset::from_elements(std::size_t width, std::span<const std::size_t> elements) {
  Bitset b(width);
  for (std::size_t e : elements) {
    if (e >= width) throw StructuralError("element " + std::to_string(e) + " outside width " + std::to_string(width));
    b.set(e);
  }
  return b;
}

Bitset Bitset::full(std::size_t width) {
  Bitset b(width);
  for (std::size_t i = 0; i < width; ++i) b.set(i);
  return b;
}

bool Bitset::none() const {
  for (Word w : words_)
    if (w) return false;
  return true;
}

std::vector<std::size_t> Bitset::elements() const {
  std::vector<std::size_t> out;
  out.reserve(count());
  for_each_bit(words_, [&](std::size_t i) { out.push_back(i); });
  return out;
}

void Bitset::check_width(const Bitset& o) const {
  if (o.width_ != width_)
    throw StructuralError("bitset width mismatch: " + std::to_string(width_) + " vs " + std::to_string(o.width_));
}

Bitset& Bitset::operator&=(const Bitset& o) {
  check_width(o);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
  return *this;
}

Bitset& Bitset::operator|=(const Bitset& o) {
  check_width(o);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
  return *this;
}

Bitset& Bitset::operator^=(const Bitset& o) {
  check_width(o);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
  return *this;
}

Bitset& Bitset::operator-=(const Bitset& o) {
  check_width(o);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
  return *this;
}

bool Bitset::is_subset_of(const Bitset& o) const {
  check_width(o);
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & ~o.words_[i]) return false;
  return true;
}

}  // namespace discforge
