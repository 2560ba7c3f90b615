#pragma once

// δ-packings (inclusion-maximal δ-separated subfamilies), weighted
// unit-distance graphs over traces, and the empirical checks of the
// size-sensitive packing bound.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "discforge/setsystem.hpp"

namespace discforge {

/// Inclusive range of admissible range cardinalities.
struct SizeClass {
  std::size_t lo = 0;
  std::size_t hi = 0;
  bool contains(std::size_t s) const { return lo <= s && s <= hi; }
};

/// Sizes within ±tolerance·l of l: [ceil(l(1-tol)), floor(l(1+tol))].
SizeClass size_class_around(std::size_t l, double tolerance = 0.1);

struct Packing {
  std::size_t delta = 0;
  std::vector<std::size_t> members;  ///< indices into the system's ranges, in scan order
  std::optional<SizeClass> size_class;
};

/// Family members bucketed by cardinality.  Since |a Δ b| >= ||a| - |b||,
/// separation and nearest-neighbour queries only visit nearby buckets.
class SizeBucketIndex {
 public:
  SizeBucketIndex(const SetSystem& sys) : sys_(&sys), buckets_(sys.n() + 1) {}

  /// Adds range `range_index`; its family position is the insertion count.
  void add(std::size_t range_index);
  std::size_t size() const noexcept { return members_.size(); }
  const std::vector<std::size_t>& members() const noexcept { return members_; }

  /// True iff some member lies at distance <= threshold from `row`.
  bool any_within(WordSpan row, std::size_t row_size, double threshold) const;

  struct Hit {
    std::size_t position = 0;  ///< family position (insertion order)
    std::size_t distance = 0;
  };
  /// Closest member, ties broken by lowest family position.  Family must be nonempty.
  Hit nearest(WordSpan row, std::size_t row_size) const;

 private:
  const SetSystem* sys_;
  std::vector<std::vector<std::size_t>> buckets_;  // size -> family positions
  std::vector<std::size_t> members_;               // family position -> range index
};

/// Scans `order` and keeps each range whose distance to every kept range
/// exceeds `threshold` (and whose size is in `size_class`, if given).  The
/// result is maximal among the scanned candidates.
std::vector<std::size_t> greedy_separated(const SetSystem& sys, const std::vector<std::size_t>& order,
                                          double threshold, std::optional<SizeClass> size_class = std::nullopt);

/// Greedy maximal δ-separated subfamily, scanning ranges in Rng(order_seed)
/// permutation order.  Requires 0 <= delta <= n.
Packing greedy_packing(const SetSystem& sys, std::size_t delta, std::uint64_t order_seed,
                       std::optional<SizeClass> size_class = std::nullopt);

/// Exhaustive check: separated, and no eligible non-member can be added.
bool is_maximal_packing(const SetSystem& sys, const Packing& packing);

struct UDEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  std::size_t weight = 0;
};

/// Unit-distance graph: vertices are distinct bitsets, edges join vertices at
/// symmetric difference exactly 1, w(e) = min(w(u), w(v)).
struct WeightedUDGraph {
  SetSystem vertices;
  std::vector<std::size_t> weights;
  std::vector<UDEdge> edges;
  std::size_t total_edge_weight = 0;
};

/// Throws StructuralError on duplicate vertices or a weight count mismatch.
/// Weights default to 1.
WeightedUDGraph build_ud_graph(const SetSystem& vertices,
                               std::optional<std::vector<std::size_t>> weights = std::nullopt);

/// Copy of the listed ranges as a standalone system.
SetSystem select_ranges(const SetSystem& sys, const std::vector<std::size_t>& indices);

/// One row of the packing CSV/JSON report.
struct PackingRecord {
  std::string kind;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t delta = 0;
  std::size_t l = 0;
  std::size_t M = 0;
  double ratio = 0.0;
  std::size_t W = 0;
  std::size_t edge_count = 0;
  std::size_t vertex_count = 0;
  std::size_t Y = 0;
};

struct PackingExperiment {
  PackingRecord record;
  std::size_t sample_size = 0;    ///< |A|
  double c = 0.0;                 ///< bad-set threshold constant
  double d_assumed = 0.0;
  bool weight_bound_holds = false;  ///< W <= 2·d·M
  bool edge_bound_holds = false;    ///< |E(UD(H))| <= d·|V(H)|
};

/// Builds P_l = greedy δ-packing within the ±10% class of l (order seed
/// `seed`), samples A elementwise with probability p from Rng(seed, 1),
/// weighs the traces H = P_l|_A and measures W, Y and the two inequalities.
/// `ratio` uses M / ((n/δ)^d1 (l/δ)^d2).
PackingExperiment packing_experiment(const SetSystem& sys, std::size_t delta, std::size_t l, double p,
                                     std::uint64_t seed, double d_assumed, double d1 = 1.0, double d2 = 1.0);

struct BoundCell {
  std::size_t delta = 0;
  std::size_t l = 0;
  std::uint64_t seed = 0;
  std::size_t M = 0;
  double ratio = 0.0;
};

struct BoundReport {
  std::size_t n = 0;
  double d1 = 0.0;
  double d2 = 0.0;
  std::vector<BoundCell> cells;
  double max_ratio = 0.0;
};

/// M = |greedy packing within the class of l| for every (δ, l, seed) cell
/// with l >= δ, and r = M / ((n/δ)^d1 (l/δ)^d2).
BoundReport check_size_sensitive_bound(const SetSystem& sys, double d1, double d2,
                                       const std::vector<std::size_t>& deltas, const std::vector<std::size_t>& ls,
                                       const std::vector<std::uint64_t>& seeds);

/// max_ratio of the last report divided by that of the first.
double ratio_growth(const std::vector<BoundReport>& ladder);

}  // namespace discforge
