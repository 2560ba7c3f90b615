#include <algorithm>
#include <cmath>

#include "discforge/chaining.hpp"
#include "discforge/geomgen.hpp"
#include "discforge/partialcolor.hpp"
#include "discforge/rng.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace discforge;
using testing::system_of;

namespace {

Bitset row_of(const SetSystem& sys, std::size_t owner) {
  return owner == kEmptyOwner ? Bitset(sys.n()) : sys.range_bitset(owner);
}

// Independent fold: walk the chain from the bottom with the owners' bitsets only.
Bitset fold_from_owners(const ChainDecomposition& dec, const SetSystem& sys, std::size_t r) {
  const auto& chain = dec.chains[r];
  Bitset cur(sys.n());
  for (std::size_t c = chain.size(); c-- > 0;) {
    Bitset f = row_of(sys, chain[c].owner);
    Bitset below = c + 1 < chain.size() ? row_of(sys, chain[c + 1].owner) : Bitset(sys.n());
    cur = (cur | (f - below)) - (below - f);
  }
  return cur;
}

void check_structure(const SetSystem& sys, const ChainDecomposition& dec) {
  const std::size_t n = sys.n();
  REQUIRE(dec.k == dyadic_levels(n));
  // F_k is every range
  std::vector<std::size_t> all(sys.size());
  for (std::size_t r = 0; r < sys.size(); ++r) all[r] = r;
  std::vector<std::size_t> top = dec.families[dec.k];
  std::sort(top.begin(), top.end());
  CHECK(top == all);
  for (std::size_t j = 1; j < dec.k; ++j) {
    double sep = std::ldexp(static_cast<double>(n), -static_cast<int>(j));
    const auto& fam = dec.families[j];
    for (std::size_t a = 0; a < fam.size(); ++a)
      for (std::size_t b = a + 1; b < fam.size(); ++b)
        CHECK(static_cast<double>(symmetric_difference_size(sys.range_bitset(fam[a]), sys.range_bitset(fam[b]))) >
              sep);
  }
  for (std::size_t r = 0; r < sys.size(); ++r) {
    const std::size_t i = dec.size_class_of[r];
    const auto& chain = dec.chains[r];
    REQUIRE(chain.size() == dec.k - i + 2);
    CHECK(chain.front().level == dec.k);
    CHECK(chain.front().owner == r);
    CHECK(chain.back().level == i - 1);
    for (std::size_t c = 0; c < chain.size(); ++c) {
      const ChainStep& st = chain[c];
      CHECK(st.level == dec.k - c);
      if (st.level == 0) {
        CHECK(st.owner == kEmptyOwner);
      } else {
        const auto& fam = dec.families[st.level];
        CHECK(std::find(fam.begin(), fam.end(), st.owner) != fam.end());
      }
      if (c + 1 < chain.size()) {
        double bound = std::ldexp(static_cast<double>(n), 1 - static_cast<int>(st.level));
        CHECK(static_cast<double>(symmetric_difference_size(row_of(sys, st.owner),
                                                            row_of(sys, chain[c + 1].owner))) <= bound);
      }
    }
    CHECK(reconstruct(dec, r) == sys.range_bitset(r));
    CHECK(fold_from_owners(dec, sys, r) == sys.range_bitset(r));
  }
}

}  // namespace

TEST_SUITE("chaining") {
  TEST_CASE("levels and size classes") {
    CHECK(dyadic_levels(1) == 1);
    CHECK(dyadic_levels(2) == 1);
    CHECK(dyadic_levels(64) == 6);
    CHECK(dyadic_levels(65) == 7);
    CHECK(size_class(64, 64, 6) == 1);
    CHECK(size_class(32, 64, 6) == 2);
    CHECK(size_class(33, 64, 6) == 1);
    CHECK(size_class(1, 64, 6) == 6);
    CHECK(size_class(0, 64, 6) == 6);
  }

  TEST_CASE("structure on every generator") {
    for (auto kind : {InstanceKind::Intervals1d, InstanceKind::Halfplanes2d, InstanceKind::Halfspaces3d,
                      InstanceKind::Rects2d}) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        SetSystem sys = generate({kind, kind == InstanceKind::Intervals1d ? 64u : 20u, seed});
        ChainDecomposition dec = decompose(sys, seed);
        check_structure(sys, dec);
        ChainAudit audit = audit_decomposition(dec, sys);
        CHECK(audit.reconstruction_exact);
        CHECK(audit.families_separated);
        CHECK(audit.links_within_bound);
        CHECK(audit.max_property1 <= kChainConstant);
        CHECK(audit.max_aux_ratio <= 2.0);
        CHECK(audit.max_property2_class <= kChainConstant + 1.0);
      }
    }
  }

  TEST_CASE("telescoping identity for random colorings") {
    Rng rng(17);
    for (auto kind : {InstanceKind::Intervals1d, InstanceKind::Halfplanes2d, InstanceKind::Rects2d}) {
      SetSystem sys = generate({kind, 32, 4});
      ChainDecomposition dec = decompose(sys, 4);
      for (int t = 0; t < 5; ++t) {
        std::vector<int> signs(sys.n());
        for (auto& s : signs) s = rng.bernoulli(0.5) ? 1 : -1;
        std::vector<double> chi(signs.begin(), signs.end());
        std::vector<long long> direct = signed_sums(sys, signs);
        for (std::size_t r = 0; r < sys.size(); ++r)
          CHECK(chain_signed_sum(dec, r, chi) == static_cast<double>(direct[r]));
      }
    }
  }

  TEST_CASE("difference cells") {
    SetSystem sys = generate({InstanceKind::Halfplanes2d, 24, 1});
    ChainDecomposition dec = decompose(sys, 1);
    for (const auto& [key, cell] : dec.diff_sets) {
      CHECK(key.j + 1 >= key.i);
      CHECK(cell.multiplicity.size() == cell.distinct.size());
      CHECK_FALSE(cell.distinct.has_duplicates());
      double bound = std::ldexp(static_cast<double>(sys.n()), 1 - static_cast<int>(key.j));
      for (std::size_t q = 0; q < cell.distinct.size(); ++q) CHECK(cell.distinct.range_size(q) <= bound);
    }
    // A = F_j \ F_(j-1) and B = F_(j-1) \ F_j for every non-base link
    for (std::size_t r = 0; r < sys.size(); ++r) {
      const auto& chain = dec.chains[r];
      const std::size_t i = dec.size_class_of[r];
      for (std::size_t c = 0; c + 1 < chain.size(); ++c) {
        const DiffCell& cell = dec.diff_sets.at({i, chain[c].level});
        const DiffPair& dp = cell.pairs[chain[c].pair];
        Bitset f = row_of(sys, chain[c].owner), g = row_of(sys, chain[c + 1].owner);
        CHECK(cell.distinct.range_bitset(dp.a) == f - g);
        CHECK(cell.distinct.range_bitset(dp.b) == g - f);
      }
    }
  }

  TEST_CASE("auxiliary system") {
    SetSystem sys = generate({InstanceKind::Intervals1d, 32, 0});
    ChainDecomposition dec = decompose(sys, 2);
    AuxSystem aux = auxiliary_system(dec);
    CHECK(aux.cell_of.size() == aux.system.size());
    CHECK(aux.multiplicity.size() == aux.system.size());
    for (std::size_t q = 0; q < aux.system.size(); ++q) CHECK(aux.system.range_size(q) > 0);
    for (const auto& [key, cell] : dec.diff_sets) {
      const auto& idx = aux.aux_index.at(key);
      REQUIRE(idx.size() == cell.distinct.size());
      for (std::size_t id = 0; id < idx.size(); ++id) {
        if (cell.distinct.range_size(id) == 0) {
          CHECK(idx[id] == kEmptyOwner);
        } else {
          CHECK(aux.system.range_bitset(idx[id]) == cell.distinct.range_bitset(id));
          CHECK(aux.cell_of[idx[id]] == key);
        }
      }
    }

    // A lone class-1 range is in every family: every link is an identity
    // except the step from level 1 down to the empty root.
    SetSystem sparse = system_of(16, {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}});
    ChainDecomposition d1 = decompose(sparse, 0);
    AuxSystem a1 = auxiliary_system(d1);
    CHECK(a1.system.size() == 1);
    CHECK(a1.cell_of[0] == CellKey{1, 1});
    CHECK(a1.system.range_bitset(0) == sparse.range_bitset(0));
  }

  TEST_CASE("cell bound constant is finite") {
    SetSystem sys = generate({InstanceKind::Halfplanes2d, 24, 0});
    double c = cell_bound_constant(decompose(sys, 0), 2.0, 1.0);
    CHECK(c > 0.0);
    CHECK(std::isfinite(c));
  }

  TEST_CASE("decomposition is deterministic") {
    SetSystem sys = generate({InstanceKind::Rects2d, 16, 3});
    ChainDecomposition a = decompose(sys, 8), b = decompose(sys, 8);
    CHECK(a.families == b.families);
    CHECK(decomposition_summary_json(a, audit_decomposition(a, sys)) ==
          decomposition_summary_json(b, audit_decomposition(b, sys)));
  }
}
