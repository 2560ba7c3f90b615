#include "discforge/partialcolor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "discforge/rng.hpp"

namespace discforge {

std::size_t WalkParams::effective_max_steps() const {
  if (max_steps) return max_steps;
  return static_cast<std::size_t>(std::ceil(64.0 / (step_gamma * step_gamma)));
}

void WalkParams::validate() const {
  if (!(step_gamma > 0.0)) throw PreconditionError("step_gamma must be positive");
  if (!(freeze_eps > 0.0 && freeze_eps < 0.5)) throw PreconditionError("freeze_eps must lie in (0, 0.5)");
  if (step_gamma > freeze_eps / 8.0 + 1e-15) {
    std::ostringstream os;
    os << "step_gamma " << step_gamma << " exceeds freeze_eps/8 = " << freeze_eps / 8.0;
    throw PreconditionError(os.str());
  }
  if (!(constraint_slack >= 0.0)) throw PreconditionError("constraint_slack must be non-negative");
  if (max_restarts == 0) throw PreconditionError("max_restarts must be at least 1");
}

double entropy_term(std::size_t size, double delta) {
  if (std::isinf(delta)) return 0.0;
  if (size == 0) return delta > 0.0 ? 0.0 : 1.0;
  return std::exp(-delta * delta / (16.0 * static_cast<double>(size)));
}

EntropyCheck check_entropy_condition(const SetSystem& sys, const Budget& budget) {
  if (budget.per_set.size() != sys.size())
    throw StructuralError("budget has " + std::to_string(budget.per_set.size()) + " entries for " +
                          std::to_string(sys.size()) + " ranges");
  EntropyCheck out;
  for (std::size_t s = 0; s < sys.size(); ++s) {
    double d = budget.per_set[s];
    if (d < 0.0 || std::isnan(d)) throw PreconditionError("budget entries must be non-negative");
    out.sum += entropy_term(sys.range_size(s), d);
  }
  out.limit = static_cast<double>(sys.n()) / 16.0;
  out.ok = out.sum <= out.limit;
  return out;
}

std::size_t ColorState::frozen_count() const {
  return static_cast<std::size_t>(std::count(frozen.begin(), frozen.end(), char{1}));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (salt + 1));
  return splitmix64(s);
}

namespace {

constexpr double kBoundaryTol = 1e-12;

struct Constraint {
  std::vector<std::size_t> elements;
  double delta = 0.0;
  double drift = 0.0;
  bool saturated = false;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Orthonormal basis of the blocked directions.  Frozen coordinates that no
// dense vector touches are kept implicitly ("pure") and zeroed on projection.
class Basis {
 public:
  explicit Basis(std::size_t n) : n_(n), pure_(n, 0) {}

  void project(std::vector<double>& g) const {
    double before = norm2(g);
    pass(g);
    // Second pass when cancellation was heavy ("twice is enough").
    if (norm2(g) < 0.25 * before) pass(g);
  }

  // Adds a range's incidence vector; returns false if already in the span.
  bool add_range(const std::vector<std::size_t>& elements) {
    std::vector<double> v(n_, 0.0);
    for (std::size_t e : elements)
      if (!pure_[e]) v[e] = 1.0;
    return insert(std::move(v), static_cast<double>(elements.size()));
  }

  void freeze(std::size_t f) {
    bool touched = false;
    for (const auto& q : dense_)
      if (q[f] != 0.0) {
        touched = true;
        break;
      }
    if (!touched) {
      pure_[f] = 1;
      return;
    }
    std::vector<double> v(n_, 0.0);
    v[f] = 1.0;
    insert(std::move(v), 1.0);
  }

  std::size_t rank() const {
    return dense_.size() + static_cast<std::size_t>(std::count(pure_.begin(), pure_.end(), char{1}));
  }

 private:
  static double norm2(const std::vector<double>& g) { return dot(g, g); }

  void pass(std::vector<double>& g) const {
    for (std::size_t i = 0; i < n_; ++i)
      if (pure_[i]) g[i] = 0.0;
    for (const auto& q : dense_) {
      double c = dot(q, g);
      if (c == 0.0) continue;
      for (std::size_t i = 0; i < n_; ++i) g[i] -= c * q[i];
    }
    for (std::size_t i = 0; i < n_; ++i)
      if (pure_[i]) g[i] = 0.0;
  }

  bool insert(std::vector<double> v, double original_norm2) {
    pass(v);
    pass(v);
    double nv = std::sqrt(norm2(v));
    if (nv <= 1e-9 * std::sqrt(original_norm2)) return false;
    for (double& x : v) x /= nv;
    dense_.push_back(std::move(v));
    return true;
  }

  std::size_t n_;
  std::vector<char> pure_;
  std::vector<std::vector<double>> dense_;
};

struct Attempt {
  ColorState state;
  WalkStats stats;
  bool success = false;
  std::string reason;
};

Attempt run_walk(const std::vector<Constraint>& initial, const ColorState& start, std::size_t target,
                 const WalkParams& params, std::uint64_t attempt) {
  const std::size_t n = start.chi.size();
  Rng rng(params.seed, attempt);
  std::vector<Constraint> cons = initial;
  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t c = 0; c < cons.size(); ++c)
    for (std::size_t e : cons[c].elements) incident[e].push_back(c);

  Attempt out;
  out.state = start;
  auto& x = out.state.chi;
  auto& frozen = out.state.frozen;
  Basis basis(n);
  std::size_t frozen_count = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (frozen[i]) {
      basis.freeze(i);
      ++frozen_count;
    }
  std::size_t saturated = 0;
  auto saturate_check = [&](std::size_t c) {
    Constraint& k = cons[c];
    if (k.saturated || std::abs(k.drift) < k.delta - params.constraint_slack) return;
    k.saturated = true;
    ++saturated;
    basis.add_range(k.elements);
  };
  for (std::size_t c = 0; c < cons.size(); ++c) saturate_check(c);

  const std::size_t max_steps = params.effective_max_steps();
  std::vector<double> g(n), s(n), dots(cons.size());
  std::size_t step = 0;
  for (; step < max_steps && frozen_count < target; ++step) {
    for (std::size_t i = 0; i < n; ++i) g[i] = frozen[i] ? 0.0 : rng.gaussian();
    basis.project(g);
    double gn = std::sqrt(dot(g, g));
    if (gn < 1e-10) {
      out.reason = "walk stuck: constraint space has full rank";
      break;
    }
    if (step % 64 == 0) {
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (frozen[i]) worst = std::max(worst, std::abs(g[i]) / gn);
      for (const auto& k : cons) {
        if (!k.saturated) continue;
        double ip = 0.0;
        for (std::size_t e : k.elements) ip += g[e];
        worst = std::max(worst, std::abs(ip) / (gn * std::sqrt(static_cast<double>(k.elements.size()))));
      }
      out.stats.max_orthogonality_error = std::max(out.stats.max_orthogonality_error, worst);
    }
    for (std::size_t i = 0; i < n; ++i) s[i] = params.step_gamma * g[i];

    // Longest fraction of the step that keeps coordinates in the cube and
    // unsaturated drifts inside their budgets.
    double t = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (frozen[i] || s[i] == 0.0) continue;
      double room = s[i] > 0.0 ? (1.0 - x[i]) / s[i] : (-1.0 - x[i]) / s[i];
      t = std::min(t, std::max(room, 0.0));
    }
    for (std::size_t c = 0; c < cons.size(); ++c) {
      // Saturated drifts stay put up to rounding; they are refreshed on freezes.
      dots[c] = 0.0;
      if (cons[c].saturated) continue;
      double d = 0.0;
      for (std::size_t e : cons[c].elements) d += s[e];
      dots[c] = d;
      if (d == 0.0) continue;
      double room = d > 0.0 ? (cons[c].delta - cons[c].drift) / d : (-cons[c].delta - cons[c].drift) / d;
      t = std::min(t, std::max(room, 0.0));
    }
    for (std::size_t i = 0; i < n; ++i)
      if (!frozen[i]) x[i] += t * s[i];
    for (std::size_t c = 0; c < cons.size(); ++c) cons[c].drift += t * dots[c];

    for (std::size_t i = 0; i < n; ++i) {
      if (frozen[i] || std::abs(x[i]) < 1.0 - kBoundaryTol) continue;
      double target_value = x[i] > 0.0 ? 1.0 : -1.0;
      double moved = target_value - x[i];
      x[i] = target_value;
      for (std::size_t c : incident[i]) cons[c].drift += moved;
      frozen[i] = 1;
      ++frozen_count;
      basis.freeze(i);
    }
    for (std::size_t c = 0; c < cons.size(); ++c) saturate_check(c);

    if (params.record_trace) {
      double md = 0.0;
      for (const auto& k : cons) md = std::max(md, std::abs(k.drift));
      out.stats.trace.push_back({step + 1, frozen_count, saturated, md});
    }
  }
  out.stats.steps = step;
  out.stats.saturated = saturated;
  for (std::size_t c = 0; c < cons.size(); ++c) {
    double drift = 0.0;
    for (std::size_t e : cons[c].elements) drift += x[e] - start.chi[e];
    out.stats.max_budget_excess = std::max(out.stats.max_budget_excess, std::abs(drift) - cons[c].delta);
  }
  out.success = frozen_count >= target;
  if (!out.success && out.reason.empty()) out.reason = "max_steps reached";
  return out;
}

}  // namespace

PartialColoring partial_color(const SetSystem& sys, const Budget& budget, const std::optional<ColorState>& start,
                              const WalkParams& params) {
  params.validate();
  EntropyCheck ec = check_entropy_condition(sys, budget);
  if (!ec.ok) {
    std::ostringstream os;
    os << "entropy condition violated: sum " << ec.sum << " > n/16 = " << ec.limit;
    throw PreconditionError(os.str());
  }
  const std::size_t n = sys.n();
  ColorState init;
  if (start) {
    init = *start;
    if (init.chi.size() != n) throw StructuralError("start state has wrong length");
    if (init.frozen.size() != n) init.frozen.assign(n, 0);
    if (init.active_map.size() != n) {
      init.active_map.resize(n);
      for (std::size_t i = 0; i < n; ++i) init.active_map[i] = i;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double v = init.chi[i];
      if (!(v >= -1.0 - 1e-9 && v <= 1.0 + 1e-9)) throw PreconditionError("start coordinate outside [-1, 1]");
      init.chi[i] = std::clamp(v, -1.0, 1.0);
      if (std::abs(init.chi[i]) >= 1.0 - kBoundaryTol) {
        init.chi[i] = init.chi[i] > 0 ? 1.0 : -1.0;
        init.frozen[i] = 1;
      }
    }
  } else {
    init.chi.assign(n, 0.0);
    init.frozen.assign(n, 0);
    init.active_map.resize(n);
    for (std::size_t i = 0; i < n; ++i) init.active_map[i] = i;
  }

  // One constraint per distinct incidence vector, at its smallest budget.
  // Ranges that can never reach their budget are left out.
  std::vector<Constraint> cons;
  RowTable table(sys.row_words());
  for (std::size_t r = 0; r < sys.size(); ++r) {
    double d = budget.per_set[r];
    std::size_t sz = sys.range_size(r);
    if (sz == 0 || std::isinf(d)) continue;
    if (d - params.constraint_slack > 2.0 * static_cast<double>(sz)) continue;
    auto [id, fresh] = table.insert(sys.range(r));
    if (fresh) {
      Constraint k;
      k.elements = sys.range_elements(r);
      k.delta = d;
      cons.push_back(std::move(k));
    } else {
      cons[id].delta = std::min(cons[id].delta, d);
    }
  }

  const std::size_t target = (n + 1) / 2;
  Attempt best;
  bool have_best = false;
  WalkStats totals;
  for (std::size_t a = 0; a < params.max_restarts; ++a) {
    Attempt at = run_walk(cons, init, target, params, a);
    totals.max_orthogonality_error = std::max(totals.max_orthogonality_error, at.stats.max_orthogonality_error);
    if (at.success) {
      at.stats.attempts = a + 1;
      at.stats.max_orthogonality_error = totals.max_orthogonality_error;
      return {std::move(at.state), std::move(at.stats)};
    }
    if (!have_best || at.state.frozen_count() > best.state.frozen_count()) {
      best = std::move(at);
      have_best = true;
    }
  }
  best.stats.attempts = params.max_restarts;
  std::ostringstream os;
  os << "partial coloring failed after " << params.max_restarts << " attempts (" << best.reason << "); best froze "
     << best.state.frozen_count() << " of " << n << ", needed " << target;
  throw WalkFailure(os.str(), std::move(best.state), std::move(best.stats));
}

FullColoring full_coloring(std::size_t n, const RoundBuilder& builder, const WalkParams& params) {
  params.validate();
  FullColoring out;
  std::vector<double> chi(n, 0.0);
  Bitset active = Bitset::full(n);
  std::size_t round = 0;
  const std::size_t round_cap = 64 + 2 * static_cast<std::size_t>(std::ceil(std::log2(std::max<std::size_t>(n, 2))));
  while (!active.none()) {
    if (round >= round_cap) throw RoundFailure("full coloring did not converge", round, out.rounds);
    std::vector<std::size_t> elems = active.elements();
    RoundProblem prob = builder(round, active);
    if (prob.system.n() != elems.size())
      throw StructuralError("round builder returned a system over " + std::to_string(prob.system.n()) +
                            " elements, expected " + std::to_string(elems.size()));
    RoundTrace tr;
    tr.round = round;
    tr.active = elems.size();
    tr.constraints = prob.system.size();
    tr.entropy_sum = check_entropy_condition(prob.system, prob.budget).sum;

    ColorState start;
    start.chi.resize(elems.size());
    start.frozen.assign(elems.size(), 0);
    start.active_map = elems;
    for (std::size_t i = 0; i < elems.size(); ++i) start.chi[i] = chi[elems[i]];
    WalkParams p = params;
    p.seed = mix_seed(params.seed, round);
    PartialColoring pc;
    try {
      pc = partial_color(prob.system, prob.budget, start, p);
    } catch (const Error& e) {
      out.rounds.push_back(tr);
      throw RoundFailure("round " + std::to_string(round) + ": " + e.what(), round, out.rounds);
    }
    for (std::size_t i = 0; i < elems.size(); ++i) {
      chi[elems[i]] = pc.state.chi[i];
      if (pc.state.frozen[i]) active.reset(elems[i]);
    }
    tr.frozen = pc.state.frozen_count();
    tr.steps = pc.stats.steps;
    tr.attempts = pc.stats.attempts;
    out.rounds.push_back(tr);
    ++round;
  }
  out.signs.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.signs[i] = chi[i] >= 0.0 ? 1 : -1;
  return out;
}

FullColoring full_coloring(const SetSystem& sys, const BudgetSchedule& schedule, const WalkParams& params) {
  std::vector<double> totals(sys.size(), 0.0);
  RoundBuilder builder = [&](std::size_t round, const Bitset& active) {
    Restriction res = restrict_to(sys, active, true);
    Budget b = schedule(round, res);
    if (b.per_set.size() != res.system.size())
      throw StructuralError("budget schedule returned " + std::to_string(b.per_set.size()) + " entries for " +
                            std::to_string(res.system.size()) + " ranges");
    for (std::size_t q = 0; q < res.source_range.size(); ++q) totals[res.source_range[q]] += b.per_set[q];
    return RoundProblem{std::move(res.system), std::move(b)};
  };
  FullColoring out = full_coloring(sys.n(), builder, params);
  out.budget_total = std::move(totals);
  return out;
}

std::vector<double> signed_sums(const SetSystem& sys, const std::vector<double>& chi) {
  std::vector<double> out(sys.size(), 0.0);
  for (std::size_t r = 0; r < sys.size(); ++r) {
    double s = 0.0;
    for_each_bit(sys.range(r), [&](std::size_t e) { s += chi[e]; });
    out[r] = s;
  }
  return out;
}

std::vector<long long> signed_sums(const SetSystem& sys, const std::vector<int>& signs) {
  std::vector<long long> out(sys.size(), 0);
  for (std::size_t r = 0; r < sys.size(); ++r) {
    long long s = 0;
    for_each_bit(sys.range(r), [&](std::size_t e) { s += signs[e]; });
    out[r] = s;
  }
  return out;
}

}  // namespace discforge
