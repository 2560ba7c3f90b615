#pragma once

// Closest-neighbour chain decomposition.
//
// For j = k..1 (k = ceil(log2 n)) the family F_j is a greedy maximal
// n/2^j-separated subfamily of the ranges; F_k is every range and the level-0
// family is the single empty set.  A range S of size class i
// (n/2^i <= |S| <= n/2^(i-1), i capped to [1, k]) follows its truncated chain
//   S = F_k^i -> F_(k-1)^i -> ... -> F_(i-1)^i,
// each link being the nearest member of the next family.  Level j >= i
// contributes A_j^i = F_j^i \ F_(j-1)^i and B_j^i = F_(j-1)^i \ F_j^i; the base
// level i-1 contributes A = F_(i-1)^i, B = ∅ (the link down to the empty root).
// Hence S = fold over j of ((prev ∪ A_j) \ B_j) starting from ∅, and for any
// coloring χ(S) = Σ_j (χ(A_j^i) - χ(B_j^i)).

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "discforge/setsystem.hpp"

namespace discforge {

inline constexpr std::size_t kEmptyOwner = static_cast<std::size_t>(-1);
/// Property 1–2 constant.
inline constexpr double kChainConstant = 4.0;

struct CellKey {
  std::size_t i = 0;  ///< size class of the owning ranges
  std::size_t j = 0;  ///< level
  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct DiffPair {
  std::size_t a = 0;      ///< id of A_j^i in the cell's distinct sets
  std::size_t b = 0;      ///< id of B_j^i in the cell's distinct sets
  std::size_t owner = 0;  ///< range index of F_j^i, kEmptyOwner for the empty root
};

struct DiffCell {
  std::vector<DiffPair> pairs;  ///< one per distinct F_j^i, so |M_j^i| = 2·pairs.size()
  SetSystem distinct;           ///< distinct bitsets among the cell's A and B sets
  std::vector<std::size_t> multiplicity;
};

struct ChainStep {
  std::size_t level = 0;
  std::size_t owner = 0;  ///< range index of F_level^i, kEmptyOwner for ∅
  std::size_t pair = 0;   ///< index into diff_sets[{i, level}].pairs
};

struct ChainDecomposition {
  std::size_t n = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  /// families[j] lists range indices; families[0] is empty and stands for {∅}.
  std::vector<std::vector<std::size_t>> families;
  std::vector<std::size_t> size_class_of;
  /// Per range, steps for levels k down to i-1.
  std::vector<std::vector<ChainStep>> chains;
  std::map<CellKey, DiffCell> diff_sets;
};

/// ceil(log2 n), at least 1.
std::size_t dyadic_levels(std::size_t n);
/// Class i of a range of the given size: the largest i in [1, k] with size <= n/2^(i-1).
std::size_t size_class(std::size_t size, std::size_t n, std::size_t k);

/// Greedy families for every level; level j scans in Rng(seed, j) order.
/// Requires a deduplicated system.
ChainDecomposition build_families(const SetSystem& sys, std::uint64_t seed);

/// Attaches truncated chains and fills the difference cells.  Throws
/// StructuralError if a link exceeds n/2^(j-1), which maximality forbids.
void attach_chains(ChainDecomposition& dec, const SetSystem& sys);

ChainDecomposition decompose(const SetSystem& sys, std::uint64_t seed);

/// The flattened cells: every distinct nonempty A/B set of every cell.
struct AuxSystem {
  SetSystem system;
  std::vector<CellKey> cell_of;
  std::vector<std::size_t> multiplicity;
  /// aux_index[{i,j}][id] = aux range of the cell's distinct set `id`, or kEmptyOwner if empty.
  std::map<CellKey, std::vector<std::size_t>> aux_index;
};
AuxSystem auxiliary_system(const ChainDecomposition& dec);

/// Folds the chain of range `r` back into a bitset.
Bitset reconstruct(const ChainDecomposition& dec, std::size_t r);

/// Σ_j (χ(A_j) - χ(B_j)) along the chain of range `r` for a ±1 (or fractional) coloring.
double chain_signed_sum(const ChainDecomposition& dec, std::size_t r, const std::vector<double>& chi);

struct ChainAudit {
  bool families_separated = true;
  bool links_within_bound = true;
  bool reconstruction_exact = true;
  double max_property1 = 0.0;  ///< max |S Δ F_j^i| / (n/2^(j-1))
  double max_property2 = 0.0;  ///< max |F_j^i| / (n/2^(j-1))
  /// max |F_j^i| / (n/2^(i-1)); the bound the triangle inequality actually gives
  /// once the top links (|F_k^i| = |S|) are counted.
  double max_property2_class = 0.0;
  double max_aux_ratio = 0.0;  ///< max |aux set| / (n/2^(j-1)) over cells
  bool properties_hold(double c = kChainConstant) const {
    return max_property1 <= c && max_property2 <= c && max_aux_ratio <= c;
  }
};
ChainAudit audit_decomposition(const ChainDecomposition& dec, const SetSystem& sys);

/// max over cells of |F_j^i| · 2^((i-1)d2) / 2^(jd).
double cell_bound_constant(const ChainDecomposition& dec, double d, double d2);

/// JSON summary: per-cell |F_j^i|, |M_j^i|, max aux size and the audit flag.
std::string decomposition_summary_json(const ChainDecomposition& dec, const ChainAudit& audit);

}  // namespace discforge
