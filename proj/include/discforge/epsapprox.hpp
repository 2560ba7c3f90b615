#pragma once

// (ν,α)-samples by repeated halving with low-discrepancy colorings, and
// exhaustive audits for samples and relative (ε,δ)-approximations.

#include <cstdint>
#include <string>
#include <vector>

#include "discforge/partialcolor.hpp"
#include "discforge/setsystem.hpp"
#include "discforge/sizesens.hpp"

namespace discforge {

/// |r - s| / (r + s + ν)
double d_nu(double r, double s, double nu);

struct Halving {
  Bitset next;   ///< the larger color class (ties: the +1 class)
  Bitset other;
  long long full_set_disc = 0;  ///< |χ(active)|
  std::size_t rounds = 0;
  double A_final = 0.0;
};

/// Colors `sys` restricted to `active` (plus the full active set as a range
/// when absent) and splits `active` by sign.  `sp` supplies d1, d2, A and B;
/// n and k are taken from |active|.
Halving halve_once(const SetSystem& sys, const Bitset& active, const ScheduleParams& sp, const WalkParams& params,
                   std::uint64_t seed);

struct SampleAudit {
  double worst = 0.0;
  std::size_t worst_range = 0;
};

/// max over ranges of d_ν(X̄(S), Z̄(S)), X̄ over the whole ground set.
/// An empty Z gives Z̄ = 0 for every range.
SampleAudit audit_sample(const SetSystem& sys, const Bitset& z, double nu);

struct FormulaSizes {
  /// (ln ln x)^p read as a power of the iterated log, p = 2d/(d+1), x = 1/(νa)
  double power_of_loglog = 0.0;
  /// ln((ln x)^p), the power read inside the outer log
  double power_inside_log = 0.0;
};
FormulaSizes formula_sizes(double nu, double alpha, double d, double d1, std::size_t n);

struct SampleOptions {
  double safety = 0.9;
  std::size_t max_iterations = 64;
};

struct SampleCertificate {
  std::size_t n = 0;
  Bitset z;
  double nu = 0.0;
  double alpha = 0.0;
  std::size_t iterations = 0;
  std::vector<std::size_t> per_iter_sizes;  ///< |X_0| = n, |X_1|, ..., |X_iterations|
  std::vector<long long> full_set_disc;     ///< per accepted halving
  std::vector<Bitset> chain;                ///< X_0 ⊇ X_1 ⊇ ...
  double worst_d_nu = 0.0;
  std::size_t worst_range = 0;
  bool degenerate = false;  ///< the first halving already failed the audit
  FormulaSizes formula;
};

SampleCertificate build_sample(const SetSystem& sys, double nu, double alpha, const ScheduleParams& sp,
                               const WalkParams& params, std::uint64_t seed, const SampleOptions& options = {});

struct RelApproxParams {
  double eps = 0.1;
  double delta_rel = 0.5;
  void validate() const;
};

struct RelApproxVerdict {
  bool ok = true;
  std::size_t worst_range = 0;
  /// Largest |Z̄ - X̄| / (δ X̄) over ranges with X̄ >= ε (<= 1 passes).
  double worst_multiplicative = 0.0;
  /// Largest |Z̄ - X̄| / (δ ε) over ranges with X̄ < ε (<= 1 passes).
  double worst_additive = 0.0;
};

RelApproxVerdict verify_relative_approx(const SetSystem& sys, const Bitset& z, const RelApproxParams& p);

struct BaselineReport {
  std::size_t size = 0;
  std::vector<double> worst;  ///< per seed
  double median = 0.0;
};

BaselineReport random_baseline(const SetSystem& sys, std::size_t size, double nu,
                               const std::vector<std::uint64_t>& seeds);

struct EquivalencePoint {
  double c1 = 0.0;
  double c2 = 0.0;
  double eps = 0.0;
  double delta_rel = 0.0;
  bool passes = false;
};

/// Checks the sample as a relative (c1·ν, c2·α)-approximation for c1, c2 in {0.5, 1, 2};
/// points outside the open unit square are skipped.
std::vector<EquivalencePoint> equivalence_grid(const SetSystem& sys, const SampleCertificate& cert);

std::string certificate_json(const SampleCertificate& cert);
/// One element index per line.
std::string sample_elements_text(const Bitset& z);

}  // namespace discforge
