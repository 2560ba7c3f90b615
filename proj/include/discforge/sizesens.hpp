#pragma once

// Size-sensitive coloring: per-cell budgets over the chaining decomposition,
// the round-by-round coloring pipeline, and the bounded-degree variant.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "discforge/chaining.hpp"
#include "discforge/partialcolor.hpp"
#include "discforge/setsystem.hpp"

namespace discforge {

struct ScheduleParams {
  double A = 2.0;
  double B = 1.0;
  double d = 2.0;
  double d1 = 1.0;
  double d2 = 1.0;
  std::size_t n = 0;
  std::size_t k = 0;  ///< ceil(log2 n)

  static ScheduleParams make(std::size_t n, double d1, double d2, double A = 2.0, double B = 1.0);
  /// d = d1 + d2 within 1e-9, d > 1, A and B positive, k = ceil(log2 n).
  void validate() const;
};

/// j0 = (log2 n + d2(i-1))/d - B
double schedule_j0(const ScheduleParams& sp, std::size_t i);
/// h = max(k/2 - |i - k/2|, 2)
double schedule_h(const ScheduleParams& sp, std::size_t i);
/// Δ_j^i = A/(1+|j-j0|)^2 · n^(1/2 - 1/(2d)) / 2^((i-1)d2/(2d)) · sqrt(1 + 2 ln h)
double budget_for_cell(const ScheduleParams& sp, std::size_t i, std::size_t j);

struct BudgetBuild {
  Budget budget;
  double A_final = 0.0;
  std::size_t scale_steps = 0;
  EntropyCheck entropy;
};

/// Budgets every aux range by its cell.  `fixed_sum` is the entropy mass of
/// extra constraints the caller adds (one per zero-budget set).  Scales A by
/// 1.25 up to 16 times until the entropy condition holds over `n_active`
/// elements; throws PreconditionError if it never does.  Non-binding sets
/// (see binding_budget) add nothing to the sum.
BudgetBuild build_budget(const AuxSystem& aux, const ScheduleParams& sp, double fixed_sum = 0.0,
                         std::optional<std::size_t> n_active = std::nullopt);

/// False when Δ >= 2|S|: the drift of S in one walk never exceeds 2|S|, so the
/// set constrains nothing and is left out of the walk and the entropy sum.
bool binding_budget(double delta, std::size_t size);

/// sqrt(1 + 2 ln(1 + ln min(s, n/s)))
double size_factor(double s, double n);
/// s^(d2/2d) · n^((d1-1)/2d) · f(s, n), times ln n when d1 = 1.
double size_envelope(double s, double n, double d1, double d2);
/// t^(1/2 - 1/(2d)) · sqrt(ln ln t) · ln n, with ln ln t floored at ln ln 3.
double beck_fiala_envelope(double t, double n, double d);

struct RangeDisc {
  std::size_t range = 0;
  std::size_t size = 0;
  std::size_t size_class = 0;
  long long disc = 0;  ///< |χ(S)|
  double envelope = 0.0;
  double ratio = 0.0;
};

struct DiscrepancyReport {
  std::vector<RangeDisc> per_range;
  std::map<std::size_t, long long> max_by_size_class;
  double envelope_constant_fit = 0.0;  ///< max ratio over nonempty ranges
  long long max_disc = 0;
  double A_final = 0.0;  ///< largest A used by any round
  std::size_t rounds_used = 0;
  bool telescoping_exact = true;
  std::size_t telescoping_failures = 0;
};

struct RoundBudgetInfo {
  std::size_t round = 0;
  std::size_t active = 0;
  std::size_t aux_ranges = 0;
  std::size_t zero_budget_sets = 0;
  std::size_t vacuous = 0;  ///< aux sets left out because Δ >= 2|S|
  double A_final = 0.0;
  double entropy_sum = 0.0;
  /// Every restricted range above the zero-budget cap was given Δ = 0.
  bool zero_budget_enforced = true;
};

struct PipelineOptions {
  /// Re-decompose the surviving elements each round (default) or restrict
  /// the first round's auxiliary system.
  bool redecompose = true;
  /// Ranges whose restricted size exceeds this get Δ = 0 in that round.
  std::optional<std::size_t> zero_budget_above;
};

struct SizeSensitiveColoring {
  std::vector<int> signs;
  DiscrepancyReport report;
  std::vector<RoundTrace> rounds;
  std::vector<RoundBudgetInfo> budgets;
  ChainDecomposition decomposition;  ///< first-round decomposition of the full system
};

/// Colors a deduplicated system; `seed` drives the decompositions, params.seed the walk.
SizeSensitiveColoring color_size_sensitive(const SetSystem& sys, const ScheduleParams& sp, const WalkParams& params,
                                           std::uint64_t seed, const PipelineOptions& options = {});

DiscrepancyReport discrepancy_report(const SetSystem& sys, const ChainDecomposition& dec,
                                     const std::vector<int>& signs, const ScheduleParams& sp);

struct BeckFialaColoring {
  SizeSensitiveColoring coloring;
  std::size_t t = 0;
  std::size_t cap = 0;        ///< 32t
  std::size_t big_count = 0;  ///< #{S : |S| > 32t}
  long long big_max_disc = 0;
  long long max_disc = 0;
  double envelope = 0.0;
  double fitted_constant = 0.0;  ///< max_disc / envelope
};

/// Requires every element degree <= t (PreconditionError naming the element).
BeckFialaColoring color_beck_fiala(const SetSystem& sys, std::size_t t, const ScheduleParams& sp,
                                   const WalkParams& params, std::uint64_t seed);

/// CSV `range_id,size,i_class,disc,envelope,ratio`.
std::string discrepancy_csv(const DiscrepancyReport& report);
/// {max_disc, fitted_constant, A_final, rounds_used, ...}
std::string discrepancy_summary_json(const DiscrepancyReport& report);

}  // namespace discforge
