#include "discforge/packing.hpp"

#include <algorithm>
#include <cmath>

#include "discforge/error.hpp"
#include "discforge/rng.hpp"

namespace discforge {

SizeClass size_class_around(std::size_t l, double tolerance) {
  const double lo = std::ceil(static_cast<double>(l) * (1.0 - tolerance) - 1e-9);
  const double hi = std::floor(static_cast<double>(l) * (1.0 + tolerance) + 1e-9);
  return {static_cast<std::size_t>(std::max(0.0, lo)), static_cast<std::size_t>(std::max(0.0, hi))};
}

void SizeBucketIndex::add(std::size_t range_index) {
  buckets_[sys_->range_size(range_index)].push_back(members_.size());
  members_.push_back(range_index);
}

bool SizeBucketIndex::any_within(WordSpan row, std::size_t row_size, double threshold) const {
  if (threshold < 0) return false;
  const std::size_t limit = static_cast<std::size_t>(std::floor(threshold));
  const std::size_t lo = row_size > limit ? row_size - limit : 0;
  const std::size_t hi = std::min(buckets_.size() - 1, row_size + limit);
  for (std::size_t s = lo; s <= hi; ++s)
    for (std::size_t pos : buckets_[s])
      if (xor_count_capped(row, sys_->range(members_[pos]), limit) <= limit) return true;
  return false;
}

SizeBucketIndex::Hit SizeBucketIndex::nearest(WordSpan row, std::size_t row_size) const {
  if (members_.empty()) throw StructuralError("nearest neighbour query on an empty family");
  Hit best{0, static_cast<std::size_t>(-1)};
  const std::size_t top = buckets_.size() - 1;
  auto scan = [&](std::size_t s) {
    for (std::size_t pos : buckets_[s]) {
      const std::size_t d = xor_count_capped(row, sys_->range(members_[pos]), best.distance);
      if (d < best.distance || (d == best.distance && pos < best.position)) best = {pos, d};
    }
  };
  for (std::size_t r = 0; r <= top && r <= best.distance; ++r) {
    if (row_size >= r) scan(row_size - r);
    if (r > 0 && row_size + r <= top) scan(row_size + r);
  }
  return best;
}

std::vector<std::size_t> greedy_separated(const SetSystem& sys, const std::vector<std::size_t>& order,
                                          double threshold, std::optional<SizeClass> size_class) {
  SizeBucketIndex family(sys);
  for (std::size_t idx : order) {
    const std::size_t s = sys.range_size(idx);
    if (size_class && !size_class->contains(s)) continue;
    if (!family.any_within(sys.range(idx), s, threshold)) family.add(idx);
  }
  return family.members();
}

Packing greedy_packing(const SetSystem& sys, std::size_t delta, std::uint64_t order_seed,
                       std::optional<SizeClass> size_class) {
  if (delta > sys.n())
    throw PreconditionError("packing separation " + std::to_string(delta) + " exceeds n=" + std::to_string(sys.n()));
  Rng rng(order_seed);
  Packing p{delta, greedy_separated(sys, rng.permutation(sys.size()), static_cast<double>(delta), size_class),
            size_class};
  return p;
}

bool is_maximal_packing(const SetSystem& sys, const Packing& packing) {
  const double delta = static_cast<double>(packing.delta);
  if (!is_delta_separated(sys, packing.members, delta)) return false;
  std::vector<char> member(sys.size(), 0);
  for (std::size_t m : packing.members) member[m] = 1;
  for (std::size_t i = 0; i < sys.size(); ++i) {
    if (member[i]) continue;
    if (packing.size_class && !packing.size_class->contains(sys.range_size(i))) continue;
    bool blocked = false;
    for (std::size_t m : packing.members)
      if (static_cast<double>(xor_count(sys.range(i), sys.range(m))) <= delta) {
        blocked = true;
        break;
      }
    if (!blocked) return false;
  }
  return true;
}

WeightedUDGraph build_ud_graph(const SetSystem& vertices, std::optional<std::vector<std::size_t>> weights) {
  WeightedUDGraph g;
  g.vertices = vertices;
  g.weights = weights ? std::move(*weights) : std::vector<std::size_t>(vertices.size(), 1);
  if (g.weights.size() != vertices.size()) throw StructuralError("one weight per vertex required");
  RowTable table(vertices.row_words());
  for (std::size_t i = 0; i < vertices.size(); ++i)
    if (!table.insert(vertices.range(i)).second)
      throw StructuralError("unit-distance graph needs distinct vertices; vertex " + std::to_string(i) +
                            " repeats an earlier one");
  std::vector<Word> buf(vertices.row_words());
  for (std::size_t u = 0; u < vertices.size(); ++u) {
    auto row = vertices.range(u);
    std::copy(row.begin(), row.end(), buf.begin());
    for (std::size_t e = 0; e < vertices.n(); ++e) {
      const Word bit = Word{1} << (e % kWordBits);
      buf[e / kWordBits] ^= bit;
      if (auto v = table.find(buf); v && *v > u) {
        const std::size_t w = std::min(g.weights[u], g.weights[*v]);
        g.edges.push_back({u, *v, w});
        g.total_edge_weight += w;
      }
      buf[e / kWordBits] ^= bit;
    }
  }
  return g;
}

SetSystem select_ranges(const SetSystem& sys, const std::vector<std::size_t>& indices) {
  SetSystem out(sys.n());
  out.reserve(indices.size());
  for (std::size_t i : indices) out.add_range(sys.range(i));
  return out;
}

namespace {

double packing_ratio(std::size_t M, std::size_t n, std::size_t delta, std::size_t l, double d1, double d2) {
  const double nd = static_cast<double>(n) / static_cast<double>(delta);
  const double ld = static_cast<double>(l) / static_cast<double>(delta);
  return static_cast<double>(M) / (std::pow(nd, d1) * std::pow(ld, d2));
}

}  // namespace

PackingExperiment packing_experiment(const SetSystem& sys, std::size_t delta, std::size_t l, double p,
                                     std::uint64_t seed, double d_assumed, double d1, double d2) {
  if (delta == 0) throw PreconditionError("packing experiment needs delta >= 1");
  if (!(p > 0.0) || p > 1.0) throw PreconditionError("sampling probability must lie in (0, 1]");
  PackingExperiment ex;
  ex.d_assumed = d_assumed;
  ex.c = 1.01 * std::exp(1.0);
  const Packing pl = greedy_packing(sys, delta, seed, size_class_around(l));
  const std::size_t M = pl.members.size();

  Rng rng(seed, 1);
  Bitset a(sys.n());
  for (std::size_t e = 0; e < sys.n(); ++e)
    if (p >= 1.0 || rng.bernoulli(p)) a.set(e);
  ex.sample_size = a.count();

  const SetSystem members = select_ranges(sys, pl.members);
  const Restriction traces = restrict_to(members, a, /*drop_empty=*/false);
  RowTable table(traces.system.row_words());
  std::vector<std::size_t> weight;
  SetSystem h(traces.system.n());
  for (std::size_t i = 0; i < traces.system.size(); ++i) {
    auto [id, fresh] = table.insert(traces.system.range(i));
    if (fresh) {
      h.add_range(traces.system.range(i));
      weight.push_back(0);
    }
    ++weight[id];
  }
  const WeightedUDGraph g = build_ud_graph(h, weight);

  const double bad_threshold = ex.c * static_cast<double>(l) * p;
  std::size_t y = 0;
  for (std::size_t i = 0; i < traces.system.size(); ++i)
    if (static_cast<double>(traces.system.range_size(i)) > bad_threshold) ++y;

  ex.record = PackingRecord{"", sys.n(), seed, delta, l, M, packing_ratio(M, sys.n(), delta, l, d1, d2),
                            g.total_edge_weight, g.edges.size(), h.size(), y};
  ex.weight_bound_holds = static_cast<double>(g.total_edge_weight) <= 2.0 * d_assumed * static_cast<double>(M);
  ex.edge_bound_holds = static_cast<double>(g.edges.size()) <= d_assumed * static_cast<double>(h.size());
  return ex;
}

BoundReport check_size_sensitive_bound(const SetSystem& sys, double d1, double d2,
                                       const std::vector<std::size_t>& deltas, const std::vector<std::size_t>& ls,
                                       const std::vector<std::uint64_t>& seeds) {
  BoundReport rep{sys.n(), d1, d2, {}, 0.0};
  for (std::size_t delta : deltas)
    for (std::size_t l : ls) {
      if (l < delta) continue;
      for (std::uint64_t seed : seeds) {
        const Packing pk = greedy_packing(sys, delta, seed, size_class_around(l));
        BoundCell cell{delta, l, seed, pk.members.size(),
                       packing_ratio(pk.members.size(), sys.n(), delta, l, d1, d2)};
        rep.max_ratio = std::max(rep.max_ratio, cell.ratio);
        rep.cells.push_back(cell);
      }
    }
  return rep;
}

double ratio_growth(const std::vector<BoundReport>& ladder) {
  if (ladder.size() < 2 || ladder.front().max_ratio <= 0) return 0.0;
  return ladder.back().max_ratio / ladder.front().max_ratio;
}

}  // namespace discforge
