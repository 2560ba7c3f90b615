#include "discforge/acceptance.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "discforge/chaining.hpp"
#include "discforge/epsapprox.hpp"
#include "discforge/geomgen.hpp"
#include "discforge/packing.hpp"
#include "discforge/partialcolor.hpp"
#include "discforge/rng.hpp"
#include "discforge/sizesens.hpp"

namespace discforge {

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

SetSystem instance(InstanceKind kind, std::size_t n, std::uint64_t seed,
                   std::optional<std::size_t> degree_cap = std::nullopt) {
  InstanceSpec spec;
  spec.kind = kind;
  spec.n = n;
  spec.seed = seed;
  spec.degree_cap = degree_cap;
  return generate(spec).deduped();
}

// Rough distinct-range counts, used to refuse cells that cannot be held in memory.
double estimated_ranges(InstanceKind kind, std::size_t n) {
  double m = static_cast<double>(n);
  switch (kind) {
    case InstanceKind::Intervals1d: return m * (m + 1) / 2 + 1;
    case InstanceKind::Halfplanes2d: return m * (m - 1) + 2;
    case InstanceKind::Halfspaces3d: return 0.31 * m * m * m;
    case InstanceKind::Rects2d: return 0.008 * m * m * m * m;
    case InstanceKind::FromFile: return 0;
  }
  return 0;
}
constexpr double kRangeCap = 2.0e6;

CriterionResult c1_unit_distance() {
  CriterionResult r;
  Json cells = Json::array();
  bool ok = true;
  std::size_t graphs = 0;
  double worst = 0.0;
  for (InstanceKind kind : {InstanceKind::Intervals1d, InstanceKind::Halfplanes2d}) {
    const std::size_t n = 128;
    const double d = 2.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      SetSystem sys = instance(kind, n, seed);
      Json cell;
      cell["kind"] = to_string(kind);
      cell["seed"] = seed;
      WeightedUDGraph full = build_ud_graph(sys);
      cell["full"] = {{"V", sys.size()}, {"E", full.edges.size()}};
      bool cell_ok = full.edges.size() <= d * sys.size();
      worst = std::max(worst, static_cast<double>(full.edges.size()) / static_cast<double>(sys.size()));
      ++graphs;
      Json packs = Json::array();
      for (std::size_t delta : {n / 16, n / 8, n / 4}) {
        Packing p = greedy_packing(sys, delta, seed);
        SetSystem vs = select_ranges(sys, p.members);
        WeightedUDGraph g = build_ud_graph(vs);
        cell_ok = cell_ok && g.edges.size() <= d * vs.size();
        if (vs.size()) worst = std::max(worst, static_cast<double>(g.edges.size()) / static_cast<double>(vs.size()));
        ++graphs;
        packs.push_back({{"delta", delta}, {"V", vs.size()}, {"E", g.edges.size()}});
      }
      cell["packings"] = packs;
      cell["ok"] = cell_ok;
      ok = ok && cell_ok;
      cells.push_back(cell);
    }
  }
  r.pass = ok;
  r.detail = std::to_string(graphs) + " graphs, max |E|/|V| = " + fixed(worst) + " (bound 2)";
  r.data = {{"cells", cells}, {"max_edge_ratio", worst}};
  return r;
}

CriterionResult c2_weighted_edges() {
  CriterionResult r;
  const std::size_t n = 256, delta = 32, l = 64;
  const double d = 2.0;
  const double p = std::min(1.0, 36.0 * d * 1.0 / static_cast<double>(delta));
  SetSystem sys = instance(InstanceKind::Intervals1d, n, 0);
  Json runs = Json::array();
  bool ok = true;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    PackingExperiment e = packing_experiment(sys, delta, l, p, seed, d);
    bool run_ok = e.record.W <= 2 * static_cast<std::size_t>(d) * e.record.M;
    ok = ok && run_ok;
    if (e.record.M) worst = std::max(worst, static_cast<double>(e.record.W) / static_cast<double>(e.record.M));
    runs.push_back({{"seed", seed}, {"M", e.record.M}, {"W", e.record.W}, {"Y", e.record.Y}, {"ok", run_ok}});
  }
  r.pass = ok;
  r.detail = "50 runs, p = " + fixed(p, 3) + ", max W/M = " + fixed(worst) + " (bound 4)";
  r.data = {{"p", p}, {"runs", runs}, {"max_W_over_M", worst}};
  return r;
}

CriterionResult c3_packing_bound() {
  CriterionResult r;
  Json kinds = Json::object();
  bool ok = true;
  std::ostringstream det;
  for (InstanceKind kind : {InstanceKind::Intervals1d, InstanceKind::Halfplanes2d}) {
    std::map<std::size_t, double> max_ratio;
    Json ladder = Json::array();
    for (std::size_t n : {128, 256, 512}) {
      double mr = 0.0;
      Json seeds = Json::array();
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SetSystem sys = instance(kind, n, seed);
        BoundReport br = check_size_sensitive_bound(sys, 1.0, 1.0, {n / 8}, {n / 4}, {seed});
        mr = std::max(mr, br.max_ratio);
        seeds.push_back({{"seed", seed}, {"M", br.cells.empty() ? 0 : br.cells[0].M}, {"ratio", br.max_ratio}});
      }
      max_ratio[n] = mr;
      ladder.push_back({{"n", n}, {"max_ratio", mr}, {"seeds", seeds}});
    }
    double growth = max_ratio[128] > 0 ? max_ratio[512] / max_ratio[128] : INFINITY;
    bool kind_ok = growth <= 2.0;
    ok = ok && kind_ok;
    kinds[to_string(kind)] = {{"ladder", ladder}, {"growth_512_over_128", growth}, {"ok", kind_ok}};
    det << to_string(kind) << " growth " << fixed(growth, 3) << "; ";
  }
  r.pass = ok;
  r.detail = det.str() + "bound 2";
  r.data = kinds;
  return r;
}

CriterionResult c4_chaining() {
  CriterionResult r;
  Json cells = Json::array();
  bool ok = true;
  std::size_t checked = 0, skipped = 0, failing = 0;
  double p1 = 0.0, p2 = 0.0, p2_class = 0.0;
  std::vector<std::string> skipped_cells;
  for (InstanceKind kind :
       {InstanceKind::Intervals1d, InstanceKind::Halfplanes2d, InstanceKind::Halfspaces3d, InstanceKind::Rects2d}) {
    for (std::size_t n : {64, 256}) {
      if (estimated_ranges(kind, n) > kRangeCap) {
        ++skipped;
        std::string name = to_string(kind) + " n=" + std::to_string(n);
        skipped_cells.push_back(name);
        cells.push_back({{"kind", to_string(kind)},
                         {"n", n},
                         {"skipped", true},
                         {"estimated_ranges", estimated_ranges(kind, n)}});
        ok = false;
        continue;
      }
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SetSystem sys = instance(kind, n, seed);
        ChainDecomposition dec = decompose(sys, seed);
        ChainAudit audit = audit_decomposition(dec, sys);
        bool tele = true;
        for (std::uint64_t c = 0; c < 3; ++c) {
          Rng rng(seed, 1000 + c);
          std::vector<int> signs(n);
          for (auto& s : signs) s = rng.bernoulli(0.5) ? 1 : -1;
          std::vector<double> chi(signs.begin(), signs.end());
          std::vector<long long> direct = signed_sums(sys, signs);
          for (std::size_t q = 0; q < sys.size(); ++q)
            if (chain_signed_sum(dec, q, chi) != static_cast<double>(direct[q])) tele = false;
        }
        bool cell_ok = tele && audit.reconstruction_exact && audit.families_separated && audit.links_within_bound &&
                       audit.properties_hold(kChainConstant);
        ok = ok && cell_ok;
        ++checked;
        failing += !cell_ok;
        p1 = std::max(p1, audit.max_property1);
        p2 = std::max(p2, audit.max_property2);
        p2_class = std::max(p2_class, audit.max_property2_class);
        cells.push_back({{"kind", to_string(kind)},
                         {"n", n},
                         {"seed", seed},
                         {"ranges", sys.size()},
                         {"telescoping_exact", tele},
                         {"reconstruction_exact", audit.reconstruction_exact},
                         {"max_property1", audit.max_property1},
                         {"max_property2", audit.max_property2},
                         {"max_property2_class", audit.max_property2_class},
                         {"max_aux_ratio", audit.max_aux_ratio},
                         {"ok", cell_ok}});
      }
    }
  }
  r.pass = ok;
  std::ostringstream det;
  det << checked << " instances checked, " << failing << " failing; max |S xor F|/(n/2^(j-1)) "
      << fixed(p1, 3) << ", max |F|/(n/2^(j-1)) " << fixed(p2, 3) << ", max |F|/(n/2^(i-1)) "
      << fixed(p2_class, 3);
  if (skipped) {
    det << "; not run (estimated range count above " << kRangeCap << "):";
    for (const auto& s : skipped_cells) det << " " << s;
  }
  r.detail = det.str();
  r.data = {{"cells", cells}};
  return r;
}

CriterionResult c5_lovett_meka() {
  CriterionResult r;
  const std::size_t n = 128;
  std::size_t successes = 0;
  bool contracts = true;
  Json runs = Json::array();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    SetSystem sys(n);
    for (int s = 0; s < 8; ++s) {
      Bitset b(n);
      for (std::size_t e = 0; e < n; ++e)
        if (rng.bernoulli(0.5)) b.set(e);
      sys.add_range(b);
    }
    Budget budget;
    for (std::size_t s = 0; s < sys.size(); ++s)
      budget.per_set.push_back(4.0 * std::sqrt(static_cast<double>(sys.range_size(s))));
    WalkParams wp;
    wp.seed = seed;
    wp.max_restarts = 20;
    Json run = {{"seed", seed}};
    try {
      PartialColoring pc = partial_color(sys, budget, std::nullopt, wp);
      ++successes;
      std::size_t frozen = 0;
      for (double x : pc.state.chi)
        if (std::abs(x) == 1.0) ++frozen;
      double excess = -INFINITY;
      std::vector<double> sums = signed_sums(sys, pc.state.chi);
      for (std::size_t s = 0; s < sys.size(); ++s)
        excess = std::max(excess, std::abs(sums[s]) - budget.per_set[s]);
      bool run_ok = 2 * frozen >= n && excess <= wp.constraint_slack;
      contracts = contracts && run_ok;
      run["success"] = true;
      run["attempts"] = pc.stats.attempts;
      run["frozen"] = frozen;
      run["max_excess"] = excess;
      run["ok"] = run_ok;
    } catch (const WalkFailure& e) {
      run["success"] = false;
    }
    runs.push_back(run);
  }
  r.pass = successes >= 45 && contracts;
  r.detail = std::to_string(successes) + "/50 succeeded (need 45), contracts " + (contracts ? "held" : "violated");
  r.data = {{"successes", successes}, {"runs", runs}};
  return r;
}

CriterionResult c6_envelope() {
  CriterionResult r;
  std::map<std::size_t, double> fit;
  Json ladder = Json::array();
  bool ok = true;
  std::string failure;
  for (std::size_t n : {128, 512}) {
    SetSystem sys = instance(InstanceKind::Intervals1d, n, 0);
    ScheduleParams sp = ScheduleParams::make(n, 1.0, 1.0);
    double f = 0.0;
    Json seeds = Json::array();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      WalkParams wp;
      wp.seed = seed;
      try {
        SizeSensitiveColoring c = color_size_sensitive(sys, sp, wp, seed);
        f = std::max(f, c.report.envelope_constant_fit);
        bool tele = c.report.telescoping_exact;
        ok = ok && tele;
        seeds.push_back({{"seed", seed},
                         {"max_disc", c.report.max_disc},
                         {"fit", c.report.envelope_constant_fit},
                         {"A_final", c.report.A_final},
                         {"rounds", c.report.rounds_used},
                         {"telescoping_exact", tele}});
      } catch (const Error& e) {
        ok = false;
        failure = e.what();
        seeds.push_back({{"seed", seed}, {"error", e.what()}});
      }
    }
    fit[n] = f;
    ladder.push_back({{"n", n}, {"fit", f}, {"seeds", seeds}});
  }
  double growth = fit[128] > 0 ? fit[512] / fit[128] : INFINITY;
  r.pass = ok && growth <= 2.0;
  r.detail = "fit n=128 " + fixed(fit[128]) + ", n=512 " + fixed(fit[512]) + ", growth " + fixed(growth, 3) +
             " (bound 2)" + (failure.empty() ? "" : "; error: " + failure);
  r.data = {{"ladder", ladder}, {"growth", growth}};
  return r;
}

CriterionResult c7_beck_fiala() {
  CriterionResult r;
  const std::size_t n = 512;
  std::map<std::size_t, double> fit;
  bool counts_ok = true, runs_ok = true;
  std::string failure;
  Json cells = Json::array();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SetSystem full = instance(InstanceKind::Halfplanes2d, n, seed);
    for (std::size_t t : {8, 16, 32}) {
      SetSystem sys = trim_to_degree(full, t, seed).deduped();
      std::size_t big = 0;
      for (std::size_t q = 0; q < sys.size(); ++q)
        if (sys.range_size(q) > 32 * t) ++big;
      bool count_ok = 32 * big < n;
      counts_ok = counts_ok && count_ok;
      Json cell = {{"seed", seed}, {"t", t}, {"ranges", sys.size()}, {"big", big}, {"count_ok", count_ok}};
      ScheduleParams sp = ScheduleParams::make(n, 1.0, 1.0);
      WalkParams wp;
      wp.seed = seed;
      try {
        BeckFialaColoring bf = color_beck_fiala(sys, t, sp, wp, seed);
        bool enforced = true;
        for (const auto& b : bf.coloring.budgets) enforced = enforced && b.zero_budget_enforced;
        runs_ok = runs_ok && enforced;
        fit[t] = std::max(fit[t], bf.fitted_constant);
        cell["max_disc"] = bf.max_disc;
        cell["fitted_constant"] = bf.fitted_constant;
        cell["big_max_disc"] = bf.big_max_disc;
        cell["zero_budget_enforced"] = enforced;
      } catch (const Error& e) {
        runs_ok = false;
        failure = e.what();
        cell["error"] = e.what();
      }
      cells.push_back(cell);
    }
  }
  double top = 0.0;
  for (auto& [t, f] : fit) top = std::max(top, f);
  double growth = fit[8] > 0 ? top / fit[8] : INFINITY;
  r.pass = counts_ok && runs_ok && growth <= 2.0;
  r.detail = std::string("counts ") + (counts_ok ? "ok" : "violated") + "; fit t=8 " + fixed(fit[8]) + ", t=16 " +
             fixed(fit[16]) + ", t=32 " + fixed(fit[32]) + ", growth " + fixed(growth, 3) + " (bound 2)" +
             (failure.empty() ? "" : "; error: " + failure);
  r.data = {{"cells", cells}, {"growth", growth}};
  return r;
}

SampleCertificate criterion_sample(const SetSystem& sys) {
  ScheduleParams sp = ScheduleParams::make(sys.n(), 1.0, 1.0);
  WalkParams wp;
  wp.seed = 0;
  return build_sample(sys, 0.05, 0.25, sp, wp, 0);
}

// Second audit path: element lists instead of word intersections.
double recount_worst(const SetSystem& sys, const Bitset& z, double nu) {
  std::vector<char> in(sys.n(), 0);
  for (std::size_t e : z.elements()) in[e] = 1;
  double zs = static_cast<double>(z.count()), n = static_cast<double>(sys.n()), worst = 0.0;
  for (std::size_t q = 0; q < sys.size(); ++q) {
    std::size_t hit = 0, all = 0;
    for (std::size_t e : sys.range_elements(q)) {
      ++all;
      hit += in[e];
    }
    double xb = static_cast<double>(all) / n, zb = zs > 0 ? static_cast<double>(hit) / zs : 0.0;
    worst = std::max(worst, std::abs(xb - zb) / (xb + zb + nu));
  }
  return worst;
}

CriterionResult c8_sample() {
  CriterionResult r;
  SetSystem sys = instance(InstanceKind::Halfplanes2d, 512, 0);
  SampleCertificate cert = criterion_sample(sys);
  double recount = recount_worst(sys, cert.z, cert.nu);
  bool monotone = true;
  for (std::size_t i = 1; i < cert.chain.size(); ++i) monotone = monotone && cert.chain[i].is_subset_of(cert.chain[i - 1]);
  std::size_t zsize = cert.z.count();
  bool audit_ok = recount < 0.25 && recount == cert.worst_d_nu;
  bool size_ok = 4 * zsize <= sys.n();
  r.pass = audit_ok && size_ok && monotone;
  r.detail = "|Z| = " + std::to_string(zsize) + " (need <= 128), iterations " + std::to_string(cert.iterations) +
             ", worst d_nu " + fixed(recount) + " (need < 0.25), chain " + (monotone ? "monotone" : "broken");
  r.data = Json::parse(certificate_json(cert));
  r.data["recount_worst_d_nu"] = recount;
  r.data["monotone"] = monotone;
  return r;
}

CriterionResult c9_metric() {
  CriterionResult r;
  Rng rng(9);
  double worst_violation = -INFINITY;
  for (int t = 0; t < 1000; ++t) {
    double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
    double nu = 1e-3 + rng.uniform();
    worst_violation = std::max(worst_violation, d_nu(a, c, nu) - d_nu(a, b, nu) - d_nu(b, c, nu));
  }
  bool tri_ok = worst_violation <= 1e-12;
  SetSystem sys = instance(InstanceKind::Halfplanes2d, 512, 0);
  SampleCertificate cert = criterion_sample(sys);
  Json grid = Json::array();
  std::size_t passing = 0;
  for (const auto& pt : equivalence_grid(sys, cert)) {
    passing += pt.passes;
    grid.push_back({{"c1", pt.c1}, {"c2", pt.c2}, {"eps", pt.eps}, {"delta_rel", pt.delta_rel}, {"passes", pt.passes}});
  }
  bool cert_passes = cert.worst_d_nu < cert.alpha;
  r.pass = tri_ok && cert_passes && passing > 0;
  r.detail = "max triangle excess " + format_number(worst_violation) + "; certificate |Z| = " +
             std::to_string(cert.z.count()) + " passes " + std::to_string(passing) + "/" +
             std::to_string(grid.size()) + " grid points";
  r.data = {{"max_triangle_excess", worst_violation}, {"grid", grid}, {"Z_size", cert.z.count()}};
  return r;
}

using Runner = std::function<CriterionResult()>;

const std::map<int, std::pair<std::string, Runner>>& registry() {
  static const std::map<int, std::pair<std::string, Runner>> reg = {
      {1, {"unit-distance edge bound |E| <= d|V|", c1_unit_distance}},
      {2, {"weighted edge bound W <= 2dM", c2_weighted_edges}},
      {3, {"size-sensitive packing ratio growth", c3_packing_bound}},
      {4, {"chaining telescoping identity and properties", c4_chaining}},
      {5, {"partial coloring contract", c5_lovett_meka}},
      {6, {"size-sensitive envelope growth", c6_envelope}},
      {7, {"bounded-degree coloring", c7_beck_fiala}},
      {8, {"(nu,alpha)-sample certificate", c8_sample}},
      {9, {"d_nu metric and relative-approximation equivalence", c9_metric}},
  };
  return reg;
}

}  // namespace

std::vector<int> criterion_ids() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}; }

std::string criterion_title(int id) {
  if (id == 10) return "determinism of suite artifacts";
  auto it = registry().find(id);
  if (it == registry().end()) throw PreconditionError("unknown criterion " + std::to_string(id));
  return it->second.first;
}

CriterionResult run_criterion(int id) {
  auto it = registry().find(id);
  if (it == registry().end()) throw PreconditionError("criterion " + std::to_string(id) + " is not a data criterion");
  auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = it->second.second();
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
    r.data = {{"error", e.what()}};
  }
  r.id = id;
  r.title = it->second.first;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

namespace {

std::vector<CriterionResult> run_many(const std::vector<int>& ids, std::size_t jobs) {
  std::vector<CriterionResult> out(ids.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < ids.size();) out[i] = run_criterion(ids[i]);
  };
  std::size_t threads = std::max<std::size_t>(1, std::min(jobs, ids.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace

std::vector<CriterionResult> run_suite(const SuiteOptions& options) {
  std::vector<int> selected = options.only.empty() ? criterion_ids() : options.only;
  std::vector<int> data_ids;
  bool want_determinism = false;
  for (int id : selected) {
    if (id == 10)
      want_determinism = true;
    else if (registry().count(id))
      data_ids.push_back(id);
    else
      throw PreconditionError("unknown criterion " + std::to_string(id));
  }
  std::vector<CriterionResult> results = run_many(data_ids, options.jobs);

  if (want_determinism) {
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult det;
    det.id = 10;
    det.title = criterion_title(10);
    std::vector<int> rerun_ids = data_ids;
    if (rerun_ids.empty())
      for (const auto& [id, entry] : registry()) rerun_ids.push_back(id);
    std::vector<CriterionResult> first = data_ids.empty() ? run_many(rerun_ids, options.jobs) : results;
    std::vector<CriterionResult> second = run_many(rerun_ids, options.jobs);
    std::vector<int> differing;
    Json cells = Json::array();
    for (std::size_t i = 0; i < rerun_ids.size(); ++i) {
      bool same = first[i].data.dump() == second[i].data.dump();
      if (!same) differing.push_back(rerun_ids[i]);
      cells.push_back({{"criterion", rerun_ids[i]}, {"identical", same}});
    }
    det.pass = differing.empty();
    std::ostringstream os;
    os << rerun_ids.size() << " cells rerun";
    if (!differing.empty()) {
      os << "; differing:";
      for (int id : differing) os << " " << id;
    }
    det.detail = os.str();
    det.data = {{"cells", cells}};
    det.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results.push_back(det);
  }

  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    std::ostringstream table;
    CsvWriter w(table, {"criterion", "verdict", "title"});
    for (const auto& r : results) {
      Json doc = {{"criterion", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}, {"data", r.data}};
      write_text(*options.out_dir / ("suite_c" + std::to_string(r.id) + ".json"), doc.dump(2) + "\n");
      w.cell(static_cast<long long>(r.id)).cell(std::string(r.pass ? "PASS" : "FAIL")).cell(r.title);
      w.end_row();
    }
    write_text(*options.out_dir / "suite_table.csv", table.str());
  }
  return results;
}

std::string result_line(const CriterionResult& r) {
  char head[64];
  std::snprintf(head, sizeof head, "criterion %2d  %s  ", r.id, r.pass ? "PASS" : "FAIL");
  return std::string(head) + r.title + "  (" + fixed(r.seconds, 1) + " s)  " + r.detail;
}

}  // namespace discforge
