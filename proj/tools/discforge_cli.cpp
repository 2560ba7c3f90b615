// discforge command-line driver.
//
// Every subcommand builds (or loads) one instance, runs one pipeline stage and
// writes `<command>_<kind>_n<n>_seed<seed>.<ext>` artifacts into --out.
// Exit codes: 0 ok, 1 suite had failing criteria, 2 parse, 3 precondition,
// 4 runtime failure.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "discforge/acceptance.hpp"
#include "discforge/chaining.hpp"
#include "discforge/epsapprox.hpp"
#include "discforge/error.hpp"
#include "discforge/geomgen.hpp"
#include "discforge/packing.hpp"
#include "discforge/report.hpp"
#include "discforge/setsystem.hpp"
#include "discforge/sizesens.hpp"

namespace fs = std::filesystem;
using namespace discforge;

namespace {

constexpr int kExitSuiteFailed = 1;
constexpr int kExitParse = 2;
constexpr int kExitPrecondition = 3;
constexpr int kExitRuntime = 4;

struct RunConfig {
  std::string command;
  std::string kind = "intervals-1d";
  std::size_t n = 64;
  std::uint64_t seed = 0;
  std::string input;
  std::optional<std::size_t> delta;
  std::optional<std::size_t> l;
  std::optional<double> p;
  std::optional<std::size_t> t;
  double nu = 0.05;
  double alpha = 0.25;
  double eps = 0.1;
  double delta_rel = 0.5;
  double A = 2.0;
  double B = 1.0;
  std::optional<double> d1;
  std::optional<double> d2;
  double gamma = 0.02;
  double freeze_eps = 0.16;
  double slack = 0.1;
  std::size_t max_restarts = 20;
  bool single_decomposition = false;
  bool trace = false;
  std::size_t trials = 8;
  std::string sample_path;
  std::vector<int> criteria;
  std::size_t jobs = 1;
  std::string out = ".";
  std::string format = "both";

  InstanceSpec instance() const {
    InstanceSpec s;
    s.kind = parse_instance_kind(kind);
    s.n = n;
    s.seed = seed;
    if (!input.empty()) s.path = input;
    return s;
  }
  bool csv() const { return format == "csv" || format == "both"; }
  bool json() const { return format == "json" || format == "both"; }
};

// Known size-sensitive constants (d1, d2) of the generators.
std::pair<double, double> default_constants(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::Halfspaces3d: return {1.0, 2.0};
    case InstanceKind::Rects2d: return {2.0, 2.0};
    default: return {1.0, 1.0};
  }
}

class Driver {
 public:
  explicit Driver(const RunConfig& cfg) : cfg_(cfg) {}

  int run() {
    fs::create_directories(cfg_.out);
    const auto t0 = std::chrono::steady_clock::now();
    int rc = 0;
    if (cfg_.command == "suite") {
      rc = suite();
    } else {
      load_instance();
      if (cfg_.command == "gen") gen();
      else if (cfg_.command == "shatter") shatter();
      else if (cfg_.command == "pack") pack();
      else if (cfg_.command == "chain") chain();
      else if (cfg_.command == "color") color();
      else if (cfg_.command == "beckfiala") beckfiala();
      else if (cfg_.command == "sample") sample();
      else if (cfg_.command == "verify") verify();
    }
    write_meta(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return rc;
  }

 private:
  std::string base(const std::string& ext) const {
    return (fs::path(cfg_.out) / artifact_name(cfg_.command, cfg_.kind, n_, cfg_.seed, ext)).string();
  }

  void load_instance() {
    InstanceSpec spec = cfg_.instance();
    if (cfg_.command == "beckfiala") {
      if (!cfg_.t) throw PreconditionError("beckfiala needs --t");
      // Generated instances are trimmed to degree t; a loaded file must already comply.
      if (spec.kind != InstanceKind::FromFile) spec.degree_cap = cfg_.t;
    }
    inst_ = generate_instance(spec);
    n_ = inst_.system.n();
    auto [d1, d2] = default_constants(spec.kind);
    d1_ = cfg_.d1.value_or(d1);
    d2_ = cfg_.d2.value_or(d2);
  }

  ScheduleParams schedule() const { return ScheduleParams::make(n_, d1_, d2_, cfg_.A, cfg_.B); }

  WalkParams walk() const {
    WalkParams wp;
    wp.step_gamma = cfg_.gamma;
    wp.freeze_eps = cfg_.freeze_eps;
    wp.constraint_slack = cfg_.slack;
    wp.max_restarts = cfg_.max_restarts;
    wp.seed = cfg_.seed;
    wp.validate();
    return wp;
  }

  void emit_json(const Json& j) const {
    if (cfg_.json()) write_text(base("json"), j.dump(2) + "\n");
  }
  void emit_csv(const std::string& text) const {
    if (cfg_.csv()) write_text(base("csv"), text);
  }

  void gen() {
    const SetSystem& sys = inst_.system;
    save(sys, base("sys"));
    if (inst_.points.dim > 0) save_points(inst_.points, base("points"));
    emit_json({{"kind", cfg_.kind}, {"n", n_}, {"seed", cfg_.seed}, {"ranges", sys.size()},
               {"max_degree", sys.max_degree()}});
    std::cout << "gen " << cfg_.kind << " n=" << n_ << " ranges=" << sys.size() << "\n";
  }

  void shatter() {
    ShatterFit fit = fit_shatter(inst_.system, default_shatter_ladder(n_), cfg_.trials, cfg_.seed);
    std::ostringstream csv;
    CsvWriter w(csv, {"m", "total_projections", "fitted_d", "fitted_d1", "fitted_d2"});
    Json ladder = Json::array();
    for (const auto& p : fit.ladder) {
      w.cell(p.m).cell(p.total_projections).cell(p.fitted_d).cell(p.fitted_d1).cell(p.fitted_d2);
      w.end_row();
      ladder.push_back({{"m", p.m}, {"total_projections", p.total_projections}, {"by_size", p.by_size}});
    }
    emit_csv(csv.str());
    emit_json({{"kind", cfg_.kind}, {"n", n_}, {"seed", cfg_.seed}, {"trials", cfg_.trials}, {"d", fit.d},
               {"d1", fit.d1}, {"d2", fit.d2}, {"ladder", ladder}});
    std::cout << "shatter d=" << format_number(fit.d) << " d1=" << format_number(fit.d1)
              << " d2=" << format_number(fit.d2) << "\n";
  }

  void pack() {
    const SetSystem sys = inst_.system.deduped();
    std::size_t delta = cfg_.delta.value_or(std::max<std::size_t>(1, n_ / 8));
    std::size_t l = cfg_.l.value_or(std::max<std::size_t>(1, n_ / 4));
    double d = d1_ + d2_;
    double p = cfg_.p.value_or(std::min(1.0, 36.0 * d / static_cast<double>(delta)));
    PackingExperiment e = packing_experiment(sys, delta, l, p, cfg_.seed, d, d1_, d2_);
    e.record.kind = cfg_.kind;
    const PackingRecord& r = e.record;
    std::ostringstream csv;
    CsvWriter w(csv, {"kind", "n", "seed", "delta", "l", "M", "ratio", "W", "edge_count", "vertex_count", "Y"});
    w.cell(r.kind).cell(r.n).cell(static_cast<std::size_t>(r.seed)).cell(r.delta).cell(r.l).cell(r.M).cell(r.ratio);
    w.cell(r.W).cell(r.edge_count).cell(r.vertex_count).cell(r.Y);
    w.end_row();
    emit_csv(csv.str());
    emit_json({{"kind", r.kind}, {"n", r.n}, {"seed", r.seed}, {"delta", r.delta}, {"l", r.l}, {"p", p},
               {"M", r.M}, {"ratio", r.ratio}, {"W", r.W}, {"edge_count", r.edge_count},
               {"vertex_count", r.vertex_count}, {"Y", r.Y}, {"sample_size", e.sample_size},
               {"weight_bound_holds", e.weight_bound_holds}, {"edge_bound_holds", e.edge_bound_holds}});
    std::cout << "pack M=" << r.M << " W=" << r.W << " ratio=" << format_number(r.ratio)
              << " weight_bound=" << (e.weight_bound_holds ? "holds" : "violated") << "\n";
  }

  void chain() {
    const SetSystem sys = inst_.system.deduped();
    ChainDecomposition dec = decompose(sys, cfg_.seed);
    ChainAudit audit = audit_decomposition(dec, sys);
    std::ostringstream csv;
    CsvWriter w(csv, {"i", "j", "pairs", "distinct_sets", "max_set_size"});
    for (const auto& [key, cell] : dec.diff_sets) {
      std::size_t mx = 0;
      for (std::size_t q = 0; q < cell.distinct.size(); ++q) mx = std::max(mx, cell.distinct.range_size(q));
      w.cell(key.i).cell(key.j).cell(cell.pairs.size()).cell(cell.distinct.size()).cell(mx);
      w.end_row();
    }
    emit_csv(csv.str());
    if (cfg_.json()) write_text(base("json"), decomposition_summary_json(dec, audit));
    std::cout << "chain k=" << dec.k << " cells=" << dec.diff_sets.size()
              << " reconstruction=" << (audit.reconstruction_exact ? "exact" : "broken")
              << " properties=" << (audit.properties_hold() ? "hold" : "violated") << "\n";
  }

  void color() {
    const SetSystem sys = inst_.system.deduped();
    PipelineOptions opt;
    opt.redecompose = !cfg_.single_decomposition;
    SizeSensitiveColoring c = color_size_sensitive(sys, schedule(), walk(), cfg_.seed, opt);
    emit_csv(discrepancy_csv(c.report));
    if (cfg_.json()) write_text(base("json"), discrepancy_summary_json(c.report));
    write_signs(c.signs);
    std::cout << "color max_disc=" << c.report.max_disc << " fitted_constant="
              << format_number(c.report.envelope_constant_fit) << " A_final=" << format_number(c.report.A_final)
              << " rounds=" << c.report.rounds_used << "\n";
  }

  void beckfiala() {
    const SetSystem sys = inst_.system.deduped();
    BeckFialaColoring bf = color_beck_fiala(sys, *cfg_.t, schedule(), walk(), cfg_.seed);
    emit_csv(discrepancy_csv(bf.coloring.report));
    Json j = Json::parse(discrepancy_summary_json(bf.coloring.report));
    j["t"] = bf.t;
    j["big_count"] = bf.big_count;
    j["big_max_disc"] = bf.big_max_disc;
    j["beck_fiala_envelope"] = bf.envelope;
    j["beck_fiala_fitted_constant"] = bf.fitted_constant;
    emit_json(j);
    write_signs(bf.coloring.signs);
    std::cout << "beckfiala t=" << bf.t << " max_disc=" << bf.max_disc
              << " fitted_constant=" << format_number(bf.fitted_constant) << " big=" << bf.big_count << "\n";
  }

  void write_signs(const std::vector<int>& signs) const {
    std::ostringstream os;
    for (int s : signs) os << s << '\n';
    write_text(base("signs"), os.str());
  }

  SampleCertificate make_sample() const {
    const SetSystem sys = inst_.system.deduped();
    return build_sample(sys, cfg_.nu, cfg_.alpha, schedule(), walk(), cfg_.seed);
  }

  void sample() {
    SampleCertificate cert = make_sample();
    std::ostringstream csv;
    CsvWriter w(csv, {"iteration", "size"});
    for (std::size_t i = 0; i < cert.per_iter_sizes.size(); ++i) {
      w.cell(i).cell(cert.per_iter_sizes[i]);
      w.end_row();
    }
    emit_csv(csv.str());
    if (cfg_.json()) write_text(base("json"), certificate_json(cert));
    write_text(base("sample"), sample_elements_text(cert.z));
    std::cout << "sample |Z|=" << cert.z.count() << " iterations=" << cert.iterations
              << " worst_d_nu=" << format_number(cert.worst_d_nu) << "\n";
  }

  Bitset read_sample(const std::string& path) const {
    std::istringstream in(read_text(path));
    Bitset z(n_);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      std::size_t e = 0;
      auto res = std::from_chars(line.data(), line.data() + line.size(), e);
      if (res.ec != std::errc() || res.ptr != line.data() + line.size()) throw ParseError("bad element index", lineno);
      if (e >= n_) throw ParseError("element index " + line + " outside the ground set", lineno);
      z.set(e);
    }
    return z;
  }

  void verify() {
    const SetSystem sys = inst_.system.deduped();
    Bitset z = cfg_.sample_path.empty() ? make_sample().z : read_sample(cfg_.sample_path);
    RelApproxVerdict v = verify_relative_approx(sys, z, {cfg_.eps, cfg_.delta_rel});
    std::ostringstream csv;
    CsvWriter w(csv, {"eps", "delta_rel", "Z_size", "ok", "worst_range", "worst_multiplicative", "worst_additive"});
    w.cell(cfg_.eps).cell(cfg_.delta_rel).cell(z.count()).cell(std::string(v.ok ? "true" : "false"));
    w.cell(v.worst_range).cell(v.worst_multiplicative).cell(v.worst_additive);
    w.end_row();
    emit_csv(csv.str());
    emit_json({{"eps", cfg_.eps}, {"delta_rel", cfg_.delta_rel}, {"Z_size", z.count()}, {"ok", v.ok},
               {"worst_range", v.worst_range}, {"worst_multiplicative", v.worst_multiplicative},
               {"worst_additive", v.worst_additive}});
    std::cout << "verify " << (v.ok ? "pass" : "fail") << " worst_range=" << v.worst_range << "\n";
  }

  int suite() {
    SuiteOptions opt;
    opt.jobs = cfg_.jobs;
    opt.out_dir = fs::path(cfg_.out);
    opt.only = cfg_.criteria;
    auto results = run_suite(opt);
    bool all = true;
    for (const auto& r : results) {
      std::cout << result_line(r) << "\n";
      all = all && r.pass;
    }
    suite_seconds_ = Json::object();
    for (const auto& r : results) suite_seconds_[std::to_string(r.id)] = r.seconds;
    return all ? 0 : kExitSuiteFailed;
  }

  void write_meta(double elapsed) const {
    std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    Json meta = {{"command", cfg_.command}, {"finished_utc", stamp}, {"elapsed_seconds", elapsed}};
    if (!suite_seconds_.is_null()) meta["criterion_seconds"] = suite_seconds_;
    std::string name = cfg_.command == "suite" ? "suite_meta.json" : artifact_name(cfg_.command, cfg_.kind, n_,
                                                                                    cfg_.seed, "meta.json");
    write_text(fs::path(cfg_.out) / name, meta.dump(2) + "\n");
  }

  const RunConfig& cfg_;
  Instance inst_;
  std::size_t n_ = 0;
  double d1_ = 1.0, d2_ = 1.0;
  Json suite_seconds_;
};

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"discforge: size-sensitive discrepancy experiments"};
  app.set_config("--config", "", "flat key=value file; flags override it");
  app.require_subcommand(1);

  app.add_option("--kind", cfg.kind, "intervals-1d | halfplanes-2d | halfspaces-3d | rects-2d | from-file");
  app.add_option("--n", cfg.n, "ground set size");
  auto* seed_opt = app.add_option("--seed", cfg.seed, "global seed (fallback: DISCFORGE_SEED)");
  app.add_option("--input", cfg.input, "set system file for --kind from-file");
  app.add_option("--delta", cfg.delta, "packing separation");
  app.add_option("--l", cfg.l, "packing range size");
  app.add_option("--p", cfg.p, "element sampling probability for pack");
  app.add_option("--t", cfg.t, "degree bound for beckfiala");
  app.add_option("--nu", cfg.nu, "sample parameter nu");
  app.add_option("--alpha", cfg.alpha, "sample parameter alpha");
  app.add_option("--eps", cfg.eps, "relative approximation eps");
  app.add_option("--delta-rel", cfg.delta_rel, "relative approximation delta");
  app.add_option("--A", cfg.A, "budget constant A");
  app.add_option("--B", cfg.B, "budget constant B");
  app.add_option("--d1", cfg.d1, "size-sensitive constant d1 (default: the generator's)");
  app.add_option("--d2", cfg.d2, "size-sensitive constant d2 (default: the generator's)");
  app.add_option("--gamma", cfg.gamma, "walk step size");
  app.add_option("--freeze-eps", cfg.freeze_eps, "walk freeze band");
  app.add_option("--slack", cfg.slack, "walk constraint slack");
  app.add_option("--max-restarts", cfg.max_restarts, "walk restarts per partial coloring");
  app.add_flag("--single-decomposition", cfg.single_decomposition, "decompose once instead of every round");
  app.add_option("--trials", cfg.trials, "shatter trials per m");
  app.add_option("--sample", cfg.sample_path, "element-index file for verify");
  app.add_option("--criteria", cfg.criteria, "suite: criteria to run (default all)");
  app.add_option("--jobs", cfg.jobs, "suite worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", cfg.out, "output directory");
  app.add_option("--format", cfg.format, "csv | json | both")->check(CLI::IsMember({"csv", "json", "both"}));

  const std::pair<const char*, const char*> commands[] = {
      {"gen", "write a generated set system"},
      {"shatter", "fit shatter-function exponents"},
      {"pack", "greedy packing and weighted unit-distance graph"},
      {"chain", "chaining decomposition and audit"},
      {"color", "size-sensitive coloring"},
      {"beckfiala", "coloring under a degree bound t"},
      {"sample", "relative (nu, alpha)-sample by halving"},
      {"verify", "check a sample as a relative approximation"},
      {"suite", "run the acceptance criteria"}};
  for (const auto& [name, desc] : commands) app.add_subcommand(name, desc)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitParse;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  if (seed_opt->count() == 0) {
    if (const char* env = std::getenv("DISCFORGE_SEED")) {
      try {
        std::size_t used = 0;
        cfg.seed = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
      } catch (const std::exception&) {
        std::cerr << "error: DISCFORGE_SEED is not a number\n";
        return kExitParse;
      }
    }
  }

  try {
    Driver driver(cfg);
    return driver.run();
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const StructuralError& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const Error& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return kExitRuntime;
  }
}
