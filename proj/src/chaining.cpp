#include "discforge/chaining.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "json.hpp"

#include "discforge/error.hpp"
#include "discforge/packing.hpp"
#include "discforge/rng.hpp"

namespace discforge {

namespace {

double level_radius(std::size_t n, std::size_t j) { return std::ldexp(static_cast<double>(n), -static_cast<int>(j)); }

// n / 2^(j-1); defined for j = 0 as 2n.
double link_bound(std::size_t n, std::size_t j) { return std::ldexp(static_cast<double>(n), 1 - static_cast<int>(j)); }

}  // namespace

std::size_t dyadic_levels(std::size_t n) {
  std::size_t k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return std::max<std::size_t>(k, 1);
}

std::size_t size_class(std::size_t size, std::size_t n, std::size_t k) {
  std::size_t i = 1;
  while (i < k && static_cast<double>(size) <= level_radius(n, i)) ++i;
  return i;
}

ChainDecomposition build_families(const SetSystem& sys, std::uint64_t seed) {
  if (sys.has_duplicates()) throw PreconditionError("chaining needs a deduplicated set system");
  ChainDecomposition dec;
  dec.n = sys.n();
  dec.k = dyadic_levels(sys.n());
  dec.seed = seed;
  dec.families.resize(dec.k + 1);
  dec.families[dec.k].resize(sys.size());
  for (std::size_t r = 0; r < sys.size(); ++r) dec.families[dec.k][r] = r;
  for (std::size_t j = dec.k - 1; j >= 1; --j) {
    Rng rng(seed, j);
    dec.families[j] = greedy_separated(sys, rng.permutation(sys.size()), level_radius(sys.n(), j));
  }
  return dec;
}

void attach_chains(ChainDecomposition& dec, const SetSystem& sys) {
  const std::size_t n = dec.n;
  const std::size_t k = dec.k;
  if (dec.families.size() != k + 1) throw StructuralError("families must be built before chains");

  // Per level, bucket index over the family and lazily memoised links down to the next level.
  std::vector<SizeBucketIndex> index;
  index.reserve(k + 1);
  for (std::size_t j = 0; j <= k; ++j) {
    index.emplace_back(sys);
    if (j >= 1 && j < k)
      for (std::size_t r : dec.families[j]) index[j].add(r);
  }
  std::vector<std::unordered_map<std::size_t, std::size_t>> memo(k + 1);  // level j: owner range -> owner at j-1

  auto link = [&](std::size_t j, std::size_t owner) -> std::size_t {
    auto it = memo[j].find(owner);
    if (it != memo[j].end()) return it->second;
    std::size_t target = kEmptyOwner;
    std::size_t dist = sys.range_size(owner);
    if (j >= 2) {
      const auto hit = index[j - 1].nearest(sys.range(owner), sys.range_size(owner));
      target = dec.families[j - 1][hit.position];
      dist = hit.distance;
    }
    if (static_cast<double>(dist) > link_bound(n, j))
      throw StructuralError("maximality violation: no member of level " + std::to_string(j - 1) + " within " +
                            std::to_string(link_bound(n, j)) + " of a level " + std::to_string(j) + " set");
    memo[j].emplace(owner, target);
    return target;
  };

  struct CellBuilder {
    DiffCell cell;
    RowTable table;
    std::unordered_map<std::size_t, std::size_t> by_owner;
    explicit CellBuilder(std::size_t n) : table(words_for(n)) { cell.distinct = SetSystem(n); }
    std::size_t intern(const Bitset& b) {
      auto [id, fresh] = table.insert(b.words());
      if (fresh) {
        cell.distinct.add_range(b);
        cell.multiplicity.push_back(0);
      }
      ++cell.multiplicity[id];
      return id;
    }
  };
  std::map<CellKey, CellBuilder> cells;
  auto cell_for = [&](CellKey key) -> CellBuilder& {
    auto it = cells.find(key);
    if (it == cells.end()) it = cells.emplace(key, CellBuilder(n)).first;
    return it->second;
  };
  auto as_bitset = [&](std::size_t owner) { return owner == kEmptyOwner ? Bitset(n) : sys.range_bitset(owner); };

  dec.size_class_of.assign(sys.size(), 0);
  dec.chains.assign(sys.size(), {});
  for (std::size_t r = 0; r < sys.size(); ++r) {
    const std::size_t i = size_class(sys.range_size(r), n, k);
    dec.size_class_of[r] = i;
    auto& chain = dec.chains[r];
    std::size_t owner = r;
    for (std::size_t j = k; j >= i; --j) {
      const std::size_t below = link(j, owner);
      CellBuilder& cb = cell_for({i, j});
      auto found = cb.by_owner.find(owner);
      std::size_t pair;
      if (found != cb.by_owner.end()) {
        pair = found->second;
      } else {
        const Bitset upper = as_bitset(owner);
        const Bitset lower = as_bitset(below);
        DiffPair dp{cb.intern(upper - lower), cb.intern(lower - upper), owner};
        pair = cb.cell.pairs.size();
        cb.cell.pairs.push_back(dp);
        cb.by_owner.emplace(owner, pair);
      }
      chain.push_back({j, owner, pair});
      owner = below;
    }
    // base level i-1: the remaining F_(i-1)^i against the empty root
    CellBuilder& cb = cell_for({i, i - 1});
    auto found = cb.by_owner.find(owner);
    std::size_t pair;
    if (found != cb.by_owner.end()) {
      pair = found->second;
    } else {
      DiffPair dp{cb.intern(as_bitset(owner)), cb.intern(Bitset(n)), owner};
      pair = cb.cell.pairs.size();
      cb.cell.pairs.push_back(dp);
      cb.by_owner.emplace(owner, pair);
    }
    chain.push_back({i - 1, owner, pair});
  }
  dec.diff_sets.clear();
  for (auto& [key, cb] : cells) dec.diff_sets.emplace(key, std::move(cb.cell));
}

ChainDecomposition decompose(const SetSystem& sys, std::uint64_t seed) {
  ChainDecomposition dec = build_families(sys, seed);
  attach_chains(dec, sys);
  return dec;
}

AuxSystem auxiliary_system(const ChainDecomposition& dec) {
  AuxSystem aux;
  aux.system = SetSystem(dec.n);
  for (const auto& [key, cell] : dec.diff_sets) {
    auto& ids = aux.aux_index[key];
    ids.assign(cell.distinct.size(), kEmptyOwner);
    for (std::size_t id = 0; id < cell.distinct.size(); ++id) {
      if (cell.distinct.range_size(id) == 0) continue;
      ids[id] = aux.system.size();
      aux.system.add_range(cell.distinct.range(id));
      aux.cell_of.push_back(key);
      aux.multiplicity.push_back(cell.multiplicity[id]);
    }
  }
  return aux;
}

Bitset reconstruct(const ChainDecomposition& dec, std::size_t r) {
  Bitset cur(dec.n);
  const auto& chain = dec.chains.at(r);
  const std::size_t i = dec.size_class_of[r];
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const DiffCell& cell = dec.diff_sets.at({i, it->level});
    const DiffPair& dp = cell.pairs[it->pair];
    cur |= cell.distinct.range_bitset(dp.a);
    cur -= cell.distinct.range_bitset(dp.b);
  }
  return cur;
}

double chain_signed_sum(const ChainDecomposition& dec, std::size_t r, const std::vector<double>& chi) {
  const std::size_t i = dec.size_class_of[r];
  double total = 0.0;
  auto sum_of = [&](WordSpan row) {
    double s = 0.0;
    for_each_bit(row, [&](std::size_t e) { s += chi[e]; });
    return s;
  };
  for (const auto& step : dec.chains.at(r)) {
    const DiffCell& cell = dec.diff_sets.at({i, step.level});
    const DiffPair& dp = cell.pairs[step.pair];
    total += sum_of(cell.distinct.range(dp.a)) - sum_of(cell.distinct.range(dp.b));
  }
  return total;
}

ChainAudit audit_decomposition(const ChainDecomposition& dec, const SetSystem& sys) {
  ChainAudit audit;
  const std::size_t n = dec.n;
  for (std::size_t j = 1; j < dec.k; ++j)
    audit.families_separated =
        audit.families_separated && is_delta_separated(sys, dec.families[j], level_radius(n, j));

  auto owner_row = [&](std::size_t owner) { return owner == kEmptyOwner ? Bitset(n) : sys.range_bitset(owner); };
  for (std::size_t r = 0; r < sys.size(); ++r) {
    const Bitset s = sys.range_bitset(r);
    audit.reconstruction_exact = audit.reconstruction_exact && reconstruct(dec, r) == s;
    const auto& chain = dec.chains[r];
    for (std::size_t c = 0; c < chain.size(); ++c) {
      const ChainStep& st = chain[c];
      const Bitset f = owner_row(st.owner);
      const double scale = link_bound(n, st.level);
      audit.max_property1 = std::max(audit.max_property1, static_cast<double>(symmetric_difference_size(s, f)) / scale);
      audit.max_property2 = std::max(audit.max_property2, static_cast<double>(f.count()) / scale);
      audit.max_property2_class =
          std::max(audit.max_property2_class, static_cast<double>(f.count()) / link_bound(n, dec.size_class_of[r]));
      if (c + 1 < chain.size()) {
        const Bitset g = owner_row(chain[c + 1].owner);
        if (static_cast<double>(symmetric_difference_size(f, g)) > scale) audit.links_within_bound = false;
      }
    }
  }
  for (const auto& [key, cell] : dec.diff_sets) {
    const double scale = link_bound(n, key.j);
    for (std::size_t id = 0; id < cell.distinct.size(); ++id)
      audit.max_aux_ratio = std::max(audit.max_aux_ratio, static_cast<double>(cell.distinct.range_size(id)) / scale);
  }
  return audit;
}

double cell_bound_constant(const ChainDecomposition& dec, double d, double d2) {
  double c = 0.0;
  for (const auto& [key, cell] : dec.diff_sets) {
    const double bound = std::pow(2.0, static_cast<double>(key.j) * d) /
                         std::pow(2.0, (static_cast<double>(key.i) - 1.0) * d2);
    c = std::max(c, static_cast<double>(cell.pairs.size()) / bound);
  }
  return c;
}

std::string decomposition_summary_json(const ChainDecomposition& dec, const ChainAudit& audit) {
  nlohmann::ordered_json j;
  j["n"] = dec.n;
  j["k"] = dec.k;
  j["seed"] = dec.seed;
  nlohmann::ordered_json fam = nlohmann::ordered_json::array();
  for (std::size_t lv = 0; lv < dec.families.size(); ++lv) fam.push_back(lv == 0 ? 1 : dec.families[lv].size());
  j["family_sizes"] = fam;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& [key, cell] : dec.diff_sets) {
    std::size_t max_aux = 0;
    for (std::size_t id = 0; id < cell.distinct.size(); ++id)
      max_aux = std::max(max_aux, cell.distinct.range_size(id));
    cells.push_back({{"i", key.i},
                     {"j", key.j},
                     {"F_count", cell.pairs.size()},
                     {"M_count", 2 * cell.pairs.size()},
                     {"distinct_sets", cell.distinct.size()},
                     {"max_aux_size", max_aux}});
  }
  j["cells"] = cells;
  j["reconstruction_ok"] = audit.reconstruction_exact;
  j["families_separated"] = audit.families_separated;
  j["links_within_bound"] = audit.links_within_bound;
  j["max_property1"] = audit.max_property1;
  j["max_property2"] = audit.max_property2;
  j["max_property2_class"] = audit.max_property2_class;
  j["max_aux_ratio"] = audit.max_aux_ratio;
  return j.dump(2);
}

}  // namespace discforge
