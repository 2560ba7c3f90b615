#pragma once

// Constructive partial coloring by a constrained Gaussian random walk in the
// cube [-1, 1]^n, and its recursion to a full ±1 coloring.
//
// Each step draws an isotropic Gaussian, projects it onto the orthogonal
// complement of the active constraints (elementary directions of frozen
// coordinates, incidence vectors of saturated ranges) and moves by
// step_gamma times that direction.  The move is truncated so that no
// coordinate leaves [-1, 1] and no range's signed drift leaves [-Δ_S, Δ_S]:
// a coordinate that reaches ±1 freezes there, a range whose drift reaches
// Δ_S - constraint_slack saturates for the rest of the walk.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "discforge/error.hpp"
#include "discforge/setsystem.hpp"

namespace discforge {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct WalkParams {
  double step_gamma = 0.02;
  double freeze_eps = 0.16;
  double constraint_slack = 0.1;
  std::size_t max_steps = 0;  ///< 0 means 64 / step_gamma^2
  std::size_t max_restarts = 20;
  std::uint64_t seed = 0;
  bool record_trace = false;

  std::size_t effective_max_steps() const;
  /// step_gamma in (0, freeze_eps/8], freeze_eps in (0, 0.5), slack >= 0, restarts >= 1.
  void validate() const;
};

/// Per-range bounds Δ_S aligned with a system's ranges.  +inf means unconstrained.
struct Budget {
  std::vector<double> per_set;
};

struct EntropyCheck {
  double sum = 0.0;
  double limit = 0.0;  ///< n / 16
  bool ok = false;
};

/// Σ_S exp(-Δ_S^2 / (16|S|)) against n/16.  Empty ranges add 1 when Δ_S = 0, else 0.
EntropyCheck check_entropy_condition(const SetSystem& sys, const Budget& budget);
double entropy_term(std::size_t size, double delta);

struct ColorState {
  std::vector<double> chi;
  std::vector<char> frozen;
  std::vector<std::size_t> active_map;  ///< walk coordinate -> original ground element

  std::size_t frozen_count() const;
};

struct WalkTraceRow {
  std::size_t step = 0;
  std::size_t frozen_count = 0;
  std::size_t active_constraints = 0;
  double max_drift = 0.0;
};

struct WalkStats {
  std::size_t steps = 0;           ///< steps of the successful attempt
  std::size_t attempts = 0;        ///< attempts used, including the successful one
  std::size_t saturated = 0;
  double max_orthogonality_error = 0.0;  ///< spot checks every 64 steps
  double max_budget_excess = 0.0;        ///< max over ranges of |drift| - Δ_S
  std::vector<WalkTraceRow> trace;
};

struct PartialColoring {
  ColorState state;
  WalkStats stats;
};

/// Thrown when every restart ends before half of the coordinates freeze.
class WalkFailure : public RuntimeFailure {
 public:
  WalkFailure(const std::string& what, ColorState best, WalkStats stats)
      : RuntimeFailure(what), best_(std::move(best)), stats_(std::move(stats)) {}
  const ColorState& best() const noexcept { return best_; }
  const WalkStats& stats() const noexcept { return stats_; }

 private:
  ColorState best_;
  WalkStats stats_;
};

/// On success at least ceil(n/2) coordinates sit at ±1 and every range keeps
/// |Σ_{i∈S} (χ_i - start_i)| <= Δ_S.  Attempt a draws from Rng(seed, a).
/// Throws PreconditionError when the entropy condition fails.
PartialColoring partial_color(const SetSystem& sys, const Budget& budget, const std::optional<ColorState>& start,
                              const WalkParams& params);

/// Constraints of one round of the full coloring, over the active elements
/// (reindexed to 0..|active|-1).
struct RoundProblem {
  SetSystem system;
  Budget budget;
};
using RoundBuilder = std::function<RoundProblem(std::size_t round, const Bitset& active)>;

struct RoundTrace {
  std::size_t round = 0;
  std::size_t active = 0;
  std::size_t frozen = 0;
  std::size_t constraints = 0;
  double entropy_sum = 0.0;
  std::size_t steps = 0;
  std::size_t attempts = 0;
};

struct FullColoring {
  std::vector<int> signs;
  std::vector<RoundTrace> rounds;
  /// Per range of the input system: Σ over rounds of the budget it received
  /// (filled by the SetSystem overload only).
  std::vector<double> budget_total;
};

/// Thrown when a round's partial coloring fails.
class RoundFailure : public RuntimeFailure {
 public:
  RoundFailure(const std::string& what, std::size_t round, std::vector<RoundTrace> trace)
      : RuntimeFailure(what), round_(round), trace_(std::move(trace)) {}
  std::size_t round() const noexcept { return round_; }
  const std::vector<RoundTrace>& trace() const noexcept { return trace_; }

 private:
  std::size_t round_;
  std::vector<RoundTrace> trace_;
};

/// Repeats partial coloring on the still-fractional elements until every
/// element is ±1.  Round r walks with seed mix(params.seed, r).
FullColoring full_coloring(std::size_t n, const RoundBuilder& builder, const WalkParams& params);

/// Convenience form: round r restricts `sys` to the active elements (empty
/// restrictions dropped) and asks `schedule` for their budgets.
using BudgetSchedule = std::function<Budget(std::size_t round, const Restriction& restricted)>;
FullColoring full_coloring(const SetSystem& sys, const BudgetSchedule& schedule, const WalkParams& params);

/// Σ_{i∈S} χ_i for every range.
std::vector<double> signed_sums(const SetSystem& sys, const std::vector<double>& chi);
std::vector<long long> signed_sums(const SetSystem& sys, const std::vector<int>& signs);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace discforge
