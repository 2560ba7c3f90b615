#include "discforge/sizesens.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "discforge/report.hpp"

namespace discforge {

ScheduleParams ScheduleParams::make(std::size_t n, double d1, double d2, double A, double B) {
  ScheduleParams sp;
  sp.A = A;
  sp.B = B;
  sp.d1 = d1;
  sp.d2 = d2;
  sp.d = d1 + d2;
  sp.n = n;
  sp.k = dyadic_levels(n);
  return sp;
}

void ScheduleParams::validate() const {
  if (std::abs(d - (d1 + d2)) > 1e-9) throw PreconditionError("schedule needs d = d1 + d2");
  if (!(d > 1.0)) throw PreconditionError("schedule needs d > 1");
  if (!(A > 0.0) || !(B > 0.0)) throw PreconditionError("schedule constants A and B must be positive");
  if (n == 0) throw PreconditionError("schedule needs n >= 1");
  if (k != dyadic_levels(n)) throw PreconditionError("schedule needs k = ceil(log2 n)");
}

double schedule_j0(const ScheduleParams& sp, std::size_t i) {
  return (std::log2(static_cast<double>(sp.n)) + sp.d2 * static_cast<double>(i - 1)) / sp.d - sp.B;
}

double schedule_h(const ScheduleParams& sp, std::size_t i) {
  double half = static_cast<double>(sp.k) / 2.0;
  return std::max(half - std::abs(static_cast<double>(i) - half), 2.0);
}

double budget_for_cell(const ScheduleParams& sp, std::size_t i, std::size_t j) {
  if (i < 1 || i > sp.k || j + 1 < i || j > sp.k)
    throw PreconditionError("cell (" + std::to_string(i) + ", " + std::to_string(j) + ") outside the schedule");
  const double n = static_cast<double>(sp.n);
  double dist = std::abs(static_cast<double>(j) - schedule_j0(sp, i));
  double decay = 1.0 / ((1.0 + dist) * (1.0 + dist));
  double scale = std::pow(n, 0.5 - 1.0 / (2.0 * sp.d)) /
                 std::pow(2.0, static_cast<double>(i - 1) * sp.d2 / (2.0 * sp.d));
  return sp.A * decay * scale * std::sqrt(1.0 + 2.0 * std::log(schedule_h(sp, i)));
}

BudgetBuild build_budget(const AuxSystem& aux, const ScheduleParams& sp, double fixed_sum,
                         std::optional<std::size_t> n_active) {
  sp.validate();
  const std::size_t m = aux.system.size();
  std::vector<double> base(m);
  for (std::size_t r = 0; r < m; ++r) {
    const CellKey& c = aux.cell_of[r];
    // Cells of a restricted round may sit on a coarser ladder than the original n.
    std::size_t i = std::min(c.i, sp.k);
    std::size_t j = std::min(c.j, sp.k);
    base[r] = budget_for_cell(sp, i, std::max(j, i - 1)) / sp.A;
  }
  const double limit = static_cast<double>(n_active.value_or(aux.system.n())) / 16.0;
  BudgetBuild out;
  double A = sp.A;
  for (std::size_t step = 0;; ++step) {
    double sum = fixed_sum;
    for (std::size_t r = 0; r < m; ++r) {
      double delta = A * base[r];
      std::size_t sz = aux.system.range_size(r);
      if (!binding_budget(delta, sz)) continue;
      sum += entropy_term(sz, delta);
    }
    if (sum <= limit) {
      out.A_final = A;
      out.scale_steps = step;
      out.entropy = {sum, limit, true};
      break;
    }
    if (step == 16) {
      std::ostringstream os;
      os << "entropy condition unreachable: sum " << sum << " > " << limit << " at A = " << A;
      throw PreconditionError(os.str());
    }
    A *= 1.25;
  }
  out.budget.per_set.resize(m);
  for (std::size_t r = 0; r < m; ++r) out.budget.per_set[r] = out.A_final * base[r];
  return out;
}

bool binding_budget(double delta, std::size_t size) { return delta < 2.0 * static_cast<double>(size); }

double size_factor(double s, double n) {
  double m = std::min(s, n / s);
  return std::sqrt(1.0 + 2.0 * std::log(1.0 + std::log(std::max(m, 1.0))));
}

double size_envelope(double s, double n, double d1, double d2) {
  if (s <= 0.0) return 0.0;
  double d = d1 + d2;
  double v = std::pow(s, d2 / (2.0 * d)) * std::pow(n, (d1 - 1.0) / (2.0 * d)) * size_factor(s, n);
  if (std::abs(d1 - 1.0) < 1e-9) v *= std::log(n);
  return v;
}

double beck_fiala_envelope(double t, double n, double d) {
  double lnln = std::max(std::log(std::log(t)), std::log(std::log(3.0)));
  return std::pow(t, 0.5 - 1.0 / (2.0 * d)) * std::sqrt(lnln) * std::log(n);
}

SizeSensitiveColoring color_size_sensitive(const SetSystem& sys, const ScheduleParams& sp, const WalkParams& params,
                                           std::uint64_t seed, const PipelineOptions& options) {
  sp.validate();
  params.validate();
  if (sp.n != sys.n()) throw PreconditionError("schedule n differs from the ground set size");
  if (sys.has_duplicates()) throw PreconditionError("size-sensitive coloring needs a deduplicated system");

  SizeSensitiveColoring out;
  out.decomposition = decompose(sys, mix_seed(seed, 0));
  const AuxSystem full_aux = auxiliary_system(out.decomposition);
  AuxSystem first_aux;  // round 0's aux system, reused in single-decomposition mode
  const std::size_t cap = options.zero_budget_above.value_or(static_cast<std::size_t>(-1));

  RoundBuilder builder = [&](std::size_t round, const Bitset& active) {
    Restriction res = restrict_to(sys, active, true);
    const std::size_t n_r = res.system.n();
    RoundBudgetInfo info;
    info.round = round;
    info.active = n_r;

    SetSystem zero(n_r);
    SetSystem small(n_r);
    {
      RowTable seen(res.system.row_words());
      for (std::size_t q = 0; q < res.system.size(); ++q) {
        if (!seen.insert(res.system.range(q)).second) continue;
        if (res.system.range_size(q) > cap)
          zero.add_range(res.system.range(q));
        else
          small.add_range(res.system.range(q));
      }
    }
    info.zero_budget_sets = zero.size();

    AuxSystem aux;
    if (round == 0 && !options.zero_budget_above) {
      aux = full_aux;
    } else if (options.redecompose || round == 0) {
      aux = auxiliary_system(decompose(small, mix_seed(seed, round)));
    } else {
      // Single decomposition: cut the first round's aux sets down to the survivors.
      Restriction ar = restrict_to(first_aux.system, active, true);
      aux.system = std::move(ar.system);
      for (std::size_t q : ar.source_range) {
        aux.cell_of.push_back(first_aux.cell_of[q]);
        aux.multiplicity.push_back(first_aux.multiplicity[q]);
      }
    }
    if (round == 0 && !options.redecompose) first_aux = aux;
    BudgetBuild bb = build_budget(aux, sp, static_cast<double>(zero.size()), n_r);
    info.aux_ranges = aux.system.size();
    info.A_final = bb.A_final;
    info.entropy_sum = bb.entropy.sum;

    RoundProblem prob{SetSystem(n_r), {}};
    prob.system.reserve(aux.system.size() + zero.size());
    for (std::size_t r = 0; r < aux.system.size(); ++r) {
      double delta = bb.budget.per_set[r];
      if (!binding_budget(delta, aux.system.range_size(r))) {
        ++info.vacuous;
        continue;
      }
      prob.system.add_range(aux.system.range(r));
      prob.budget.per_set.push_back(delta);
    }
    for (std::size_t r = 0; r < zero.size(); ++r) {
      prob.system.add_range(zero.range(r));
      prob.budget.per_set.push_back(0.0);
    }
    for (std::size_t r = 0; r < prob.system.size(); ++r)
      if (prob.system.range_size(r) > cap && prob.budget.per_set[r] != 0.0) info.zero_budget_enforced = false;
    out.budgets.push_back(info);
    return prob;
  };

  FullColoring fc = full_coloring(sys.n(), builder, params);
  out.signs = std::move(fc.signs);
  out.rounds = std::move(fc.rounds);
  out.report = discrepancy_report(sys, out.decomposition, out.signs, sp);
  out.report.rounds_used = out.rounds.size();
  for (const auto& b : out.budgets) out.report.A_final = std::max(out.report.A_final, b.A_final);
  return out;
}

DiscrepancyReport discrepancy_report(const SetSystem& sys, const ChainDecomposition& dec,
                                     const std::vector<int>& signs, const ScheduleParams& sp) {
  DiscrepancyReport rep;
  std::vector<double> chi(signs.begin(), signs.end());
  std::vector<long long> direct = signed_sums(sys, signs);
  const double n = static_cast<double>(sys.n());
  for (std::size_t r = 0; r < sys.size(); ++r) {
    double chained = chain_signed_sum(dec, r, chi);
    if (chained != static_cast<double>(direct[r])) {
      rep.telescoping_exact = false;
      ++rep.telescoping_failures;
    }
    RangeDisc rd;
    rd.range = r;
    rd.size = sys.range_size(r);
    rd.size_class = dec.size_class_of[r];
    rd.disc = std::llabs(direct[r]);
    rd.envelope = size_envelope(static_cast<double>(rd.size), n, sp.d1, sp.d2);
    rd.ratio = rd.envelope > 0.0 ? static_cast<double>(rd.disc) / rd.envelope : 0.0;
    rep.max_disc = std::max(rep.max_disc, rd.disc);
    auto& slot = rep.max_by_size_class[rd.size_class];
    slot = std::max(slot, rd.disc);
    rep.envelope_constant_fit = std::max(rep.envelope_constant_fit, rd.ratio);
    rep.per_range.push_back(rd);
  }
  return rep;
}

BeckFialaColoring color_beck_fiala(const SetSystem& sys, std::size_t t, const ScheduleParams& sp,
                                   const WalkParams& params, std::uint64_t seed) {
  if (t == 0) throw PreconditionError("degree bound t must be positive");
  std::vector<std::size_t> deg = sys.degrees();
  for (std::size_t e = 0; e < deg.size(); ++e)
    if (deg[e] > t)
      throw PreconditionError("element " + std::to_string(e) + " has degree " + std::to_string(deg[e]) + " > t = " +
                              std::to_string(t));
  BeckFialaColoring out;
  out.t = t;
  out.cap = 32 * t;
  for (std::size_t r = 0; r < sys.size(); ++r)
    if (sys.range_size(r) > out.cap) ++out.big_count;
  PipelineOptions opt;
  opt.zero_budget_above = out.cap;
  out.coloring = color_size_sensitive(sys, sp, params, seed, opt);
  for (const auto& rd : out.coloring.report.per_range)
    if (rd.size > out.cap) out.big_max_disc = std::max(out.big_max_disc, rd.disc);
  out.max_disc = out.coloring.report.max_disc;
  out.envelope = beck_fiala_envelope(static_cast<double>(t), static_cast<double>(sys.n()), sp.d);
  out.fitted_constant = static_cast<double>(out.max_disc) / out.envelope;
  return out;
}

std::string discrepancy_csv(const DiscrepancyReport& report) {
  std::ostringstream os;
  CsvWriter w(os, {"range_id", "size", "i_class", "disc", "envelope", "ratio"});
  for (const auto& rd : report.per_range) {
    w.cell(rd.range).cell(rd.size).cell(rd.size_class).cell(rd.disc).cell(rd.envelope).cell(rd.ratio);
    w.end_row();
  }
  return os.str();
}

std::string discrepancy_summary_json(const DiscrepancyReport& report) {
  Json j;
  j["max_disc"] = report.max_disc;
  j["fitted_constant"] = report.envelope_constant_fit;
  j["A_final"] = report.A_final;
  j["rounds_used"] = report.rounds_used;
  j["telescoping_exact"] = report.telescoping_exact;
  Json by = Json::object();
  for (const auto& [i, v] : report.max_by_size_class) by[std::to_string(i)] = v;
  j["max_by_size_class"] = by;
  return j.dump(2) + "\n";
}

}  // namespace discforge
