#include "discforge/setsystem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "discforge/error.hpp"
#include "discforge/rng.hpp"

namespace discforge {

SetSystem::SetSystem(std::size_t n) : n_(n), row_words_(words_for(n)) {}

SetSystem::SetSystem(std::size_t n, const std::vector<Bitset>& ranges, bool dedupe) : SetSystem(n) {
  reserve(ranges.size());
  for (const auto& r : ranges) add_range(r);
  if (dedupe) *this = deduped();
}

std::vector<std::size_t> SetSystem::range_elements(std::size_t i) const {
  std::vector<std::size_t> out;
  out.reserve(sizes_[i]);
  for_each_bit(range(i), [&](std::size_t e) { out.push_back(e); });
  return out;
}

void SetSystem::add_range(WordSpan row) {
  if (row.size() != row_words_) throw StructuralError("range row has wrong word count for n=" + std::to_string(n_));
  if (n_ % kWordBits != 0 && row_words_ > 0 && (row.back() >> (n_ % kWordBits)) != 0)
    throw StructuralError("range has bits beyond ground set size " + std::to_string(n_));
  words_.insert(words_.end(), row.begin(), row.end());
  sizes_.push_back(popcount(row));
}

void SetSystem::add_range(const Bitset& b) {
  if (b.width() != n_)
    throw StructuralError("range width " + std::to_string(b.width()) + " differs from n=" + std::to_string(n_));
  add_range(b.words());
}

void SetSystem::add_range_elements(std::span<const std::size_t> elements) {
  add_range(Bitset::from_elements(n_, elements));
}

void SetSystem::set_labels(std::vector<std::string> labels) {
  if (!labels.empty() && labels.size() != size()) throw StructuralError("one label per range required");
  labels_ = std::move(labels);
}

SetSystem SetSystem::deduped() const {
  SetSystem out(n_);
  RowTable table(row_words_);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < size(); ++i) {
    if (table.insert(range(i)).second) {
      out.add_range(range(i));
      if (!labels_.empty()) labels.push_back(labels_[i]);
    }
  }
  out.labels_ = std::move(labels);
  return out;
}

bool SetSystem::has_duplicates() const {
  RowTable table(row_words_);
  for (std::size_t i = 0; i < size(); ++i)
    if (!table.insert(range(i)).second) return true;
  return false;
}

std::optional<std::size_t> SetSystem::find(WordSpan row) const {
  for (std::size_t i = 0; i < size(); ++i)
    if (words_equal(range(i), row)) return i;
  return std::nullopt;
}

std::vector<std::size_t> SetSystem::degrees() const {
  std::vector<std::size_t> deg(n_, 0);
  for (std::size_t i = 0; i < size(); ++i) for_each_bit(range(i), [&](std::size_t e) { ++deg[e]; });
  return deg;
}

std::size_t SetSystem::max_degree() const {
  auto deg = degrees();
  return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
}

std::size_t symmetric_difference_size(const Bitset& a, const Bitset& b) {
  if (a.width() != b.width())
    throw StructuralError("symmetric difference of bitsets with widths " + std::to_string(a.width()) + " and " +
                          std::to_string(b.width()));
  return xor_count(a.words(), b.words());
}

namespace {

// Maps ground elements of `y` onto their rank within `y`.
class Compressor {
 public:
  explicit Compressor(const Bitset& y) : y_(y.words().begin(), y.words().end()), base_(y_.size() + 1, 0) {
    for (std::size_t w = 0; w < y_.size(); ++w)
      base_[w + 1] = base_[w] + static_cast<std::size_t>(std::popcount(y_[w]));
  }

  std::size_t size() const { return base_.back(); }

  void compress(WordSpan row, std::span<Word> out) const {
    std::fill(out.begin(), out.end(), 0);
    for (std::size_t w = 0; w < y_.size(); ++w) {
      Word x = row[w] & y_[w];
      while (x) {
        const int b = std::countr_zero(x);
        const Word below = b == 0 ? 0 : (y_[w] & ((Word{1} << b) - 1));
        const std::size_t idx = base_[w] + static_cast<std::size_t>(std::popcount(below));
        out[idx / kWordBits] |= Word{1} << (idx % kWordBits);
        x &= x - 1;
      }
    }
  }

 private:
  std::vector<Word> y_;
  std::vector<std::size_t> base_;
};

}  // namespace

SetSystem project(const SetSystem& sys, const Bitset& y) {
  if (y.width() != sys.n())
    throw StructuralError("projection set width " + std::to_string(y.width()) + " differs from n=" +
                          std::to_string(sys.n()));
  Compressor comp(y);
  SetSystem out(comp.size());
  if (sys.empty()) return out;
  RowTable table(out.row_words());
  std::vector<Word> buf(out.row_words());
  for (std::size_t i = 0; i < sys.size(); ++i) {
    comp.compress(sys.range(i), buf);
    if (table.insert(buf).second) out.add_range(buf);
  }
  return out;
}

Restriction restrict_to(const SetSystem& sys, const Bitset& active, bool drop_empty) {
  if (active.width() != sys.n()) throw StructuralError("active set width differs from ground set size");
  Compressor comp(active);
  Restriction r{SetSystem(comp.size()), {}, active.elements()};
  std::vector<Word> buf(r.system.row_words());
  for (std::size_t i = 0; i < sys.size(); ++i) {
    comp.compress(sys.range(i), buf);
    if (drop_empty && popcount(buf) == 0) continue;
    r.system.add_range(buf);
    r.source_range.push_back(i);
  }
  return r;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t k = std::min(x.size(), y.size());
  if (k < 2) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

namespace {

ShatterProfile profile_of(const SetSystem& traces, std::size_t m) {
  ShatterProfile p;
  p.m = m;
  p.total_projections = traces.size();
  p.by_size.assign(m + 1, 0);
  for (std::size_t i = 0; i < traces.size(); ++i) ++p.by_size[traces.range_size(i)];
  for (std::size_t k = 1; k <= m; ++k) p.by_size[k] += p.by_size[k - 1];
  return p;
}

void fit_single(ShatterProfile& p) {
  p.fitted_d = p.m >= 2 && p.total_projections > 0
                   ? std::log(static_cast<double>(p.total_projections)) / std::log(static_cast<double>(p.m))
                   : 0.0;
  std::vector<double> lx, ly;
  for (std::size_t k = 1; k <= p.m; ++k) {
    if (p.by_size[k] == 0) continue;
    lx.push_back(std::log(static_cast<double>(k)));
    ly.push_back(std::log(static_cast<double>(p.by_size[k])));
  }
  p.fitted_d2 = least_squares_slope(lx, ly);
  p.fitted_d1 = p.fitted_d - p.fitted_d2;
}

}  // namespace

ShatterProfile measure_shatter(const SetSystem& sys, std::size_t m, std::size_t trials, std::uint64_t seed) {
  if (m < 1 || m > sys.n()) throw PreconditionError("measure_shatter needs 1 <= m <= n");
  if (trials < 1) throw PreconditionError("measure_shatter needs trials >= 1");
  ShatterProfile best;
  bool have = false;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(seed, t);
    auto idx = rng.sample_indices(sys.n(), m);
    Bitset y = Bitset::from_elements(sys.n(), idx);
    ShatterProfile p = profile_of(project(sys, y), m);
    if (!have || p.total_projections > best.total_projections) {
      best = std::move(p);
      have = true;
    }
  }
  fit_single(best);
  return best;
}

std::vector<std::size_t> default_shatter_ladder(std::size_t n) {
  std::vector<std::size_t> ladder;
  for (std::size_t m = 16; m <= n; m *= 2) ladder.push_back(m);
  if (ladder.empty() || ladder.back() != n) ladder.push_back(n);
  return ladder;
}

ShatterFit fit_shatter(const SetSystem& sys, const std::vector<std::size_t>& ladder, std::size_t trials,
                       std::uint64_t seed) {
  ShatterFit fit;
  std::vector<double> lx, ly;
  for (std::size_t m : ladder) {
    fit.ladder.push_back(measure_shatter(sys, m, trials, seed));
    if (m >= 2) {
      lx.push_back(std::log(static_cast<double>(m)));
      ly.push_back(std::log(static_cast<double>(fit.ladder.back().total_projections)));
    }
  }
  if (fit.ladder.empty()) return fit;
  fit.d = lx.size() >= 2 ? least_squares_slope(lx, ly) : fit.ladder.back().fitted_d;
  fit.d2 = fit.ladder.back().fitted_d2;
  fit.d1 = fit.d - fit.d2;
  return fit;
}

bool is_delta_separated(const SetSystem& sys, const std::vector<std::size_t>& indices, double delta) {
  for (std::size_t a = 0; a < indices.size(); ++a)
    for (std::size_t b = a + 1; b < indices.size(); ++b)
      if (static_cast<double>(xor_count(sys.range(indices[a]), sys.range(indices[b]))) <= delta) return false;
  return true;
}

}  // namespace discforge
