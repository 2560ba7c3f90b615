#include <cmath>

#include "discforge/error.hpp"
#include "discforge/geomgen.hpp"
#include "discforge/report.hpp"
#include "discforge/sizesens.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"

using namespace discforge;
using testing::system_of;

TEST_SUITE("sizesens") {
  TEST_CASE("schedule parameters") {
    ScheduleParams sp = ScheduleParams::make(256, 1, 1);
    CHECK(sp.k == 8);
    CHECK(sp.d == 2.0);
    CHECK_NOTHROW(sp.validate());
    sp.d = 3.0;
    CHECK_THROWS_AS(sp.validate(), PreconditionError);
    CHECK_THROWS_AS(ScheduleParams::make(256, 0.5, 0.5).validate(), PreconditionError);
    CHECK_THROWS_AS(ScheduleParams::make(256, 1, 1, -1.0).validate(), PreconditionError);
  }

  TEST_CASE("budget at the peak of the schedule") {
    ScheduleParams sp = ScheduleParams::make(256, 1, 1, 2.0, 1.0);
    // j0 = (8 + 3)/2 - 1 = 4.5; hand value A·n^(1/4)/2^(3/4)·sqrt(1 + 2 ln 4)
    CHECK(schedule_j0(sp, 4) == doctest::Approx(4.5));
    CHECK(schedule_h(sp, 4) == 4.0);
    const double peak = 2.0 * 4.0 / std::pow(2.0, 0.75) * std::sqrt(1.0 + 2.0 * std::log(4.0));
    CHECK(peak == doctest::Approx(9.24).epsilon(1e-3));
    // off-peak cells decay as 1/(1 + |j - j0|)^2
    CHECK(budget_for_cell(sp, 4, 4) == doctest::Approx(peak / 2.25));
    CHECK(budget_for_cell(sp, 4, 5) == doctest::Approx(peak / 2.25));
    CHECK(budget_for_cell(sp, 4, 7) == doctest::Approx(peak / 12.25));

    ScheduleParams b2 = ScheduleParams::make(256, 1, 1, 2.0, 1.5);  // j0 = 4 exactly
    CHECK(budget_for_cell(b2, 4, 4) == doctest::Approx(peak));
    CHECK(budget_for_cell(b2, 4, 5) == doctest::Approx(peak / 4.0));
    CHECK(budget_for_cell(b2, 4, 3) == doctest::Approx(peak / 4.0));
  }

  TEST_CASE("h guard and mirror symmetry") {
    ScheduleParams sp = ScheduleParams::make(256, 1, 1);
    CHECK(schedule_h(sp, 8) == 2.0);
    CHECK(std::isfinite(budget_for_cell(sp, 8, 8)));
    for (std::size_t i = 1; i < sp.k; ++i) CHECK(schedule_h(sp, i) == schedule_h(sp, sp.k - i));
    CHECK_THROWS_AS(budget_for_cell(sp, 0, 1), PreconditionError);
    CHECK_THROWS_AS(budget_for_cell(sp, 4, 2), PreconditionError);
    CHECK_THROWS_AS(budget_for_cell(sp, 4, 9), PreconditionError);
  }

  TEST_CASE("envelopes") {
    CHECK(size_factor(16, 256) == doctest::Approx(std::sqrt(1 + 2 * std::log(1 + std::log(16.0)))));
    CHECK(size_factor(200, 256) == doctest::Approx(std::sqrt(1 + 2 * std::log(1 + std::log(256.0 / 200)))));
    // d1 = 1: s^(1/4) f ln n, the n-power is exactly 1
    CHECK(size_envelope(16, 256, 1, 1) == doctest::Approx(2.0 * size_factor(16, 256) * std::log(256.0)));
    CHECK(size_envelope(64, 256, 1, 2) ==
          doctest::Approx(std::pow(64.0, 1.0 / 3.0) * size_factor(64, 256) * std::log(256.0)));
    CHECK(size_envelope(64, 256, 2, 2) ==
          doctest::Approx(std::pow(64.0, 0.25) * std::pow(256.0, 0.125) * size_factor(64, 256)));
    CHECK(size_envelope(0, 256, 1, 1) == 0.0);
    CHECK(beck_fiala_envelope(16, 512, 2) ==
          doctest::Approx(2.0 * std::sqrt(std::log(std::log(16.0))) * std::log(512.0)));
    CHECK(beck_fiala_envelope(2, 512, 2) == doctest::Approx(beck_fiala_envelope(3, 512, 2) / std::pow(1.5, 0.25)));
  }

  TEST_CASE("budget building") {
    ScheduleParams sp = ScheduleParams::make(64, 1, 1);
    AuxSystem empty;
    empty.system = SetSystem(64);
    BudgetBuild e = build_budget(empty, sp);
    CHECK(e.entropy.sum == 0.0);
    CHECK(e.A_final == sp.A);

    SetSystem iv = generate({InstanceKind::Intervals1d, 256, 0});
    ScheduleParams s256 = ScheduleParams::make(256, 1, 1);
    AuxSystem aux = auxiliary_system(decompose(iv, 0));
    BudgetBuild bb = build_budget(aux, s256);
    CHECK(bb.entropy.ok);
    // the scaler stops at the first feasible A
    REQUIRE(bb.scale_steps > 0);
    ScheduleParams below = s256;
    below.A = 2.0 * std::pow(1.25, static_cast<double>(bb.scale_steps - 1));
    BudgetBuild first = build_budget(aux, below);
    CHECK(first.scale_steps == 1);
    CHECK(bb.A_final == doctest::Approx(2.0 * std::pow(1.25, static_cast<double>(bb.scale_steps))));
    for (std::size_t r = 0; r < aux.system.size(); ++r) {
      const CellKey& c = aux.cell_of[r];
      CHECK(bb.budget.per_set[r] == doctest::Approx(budget_for_cell(s256, c.i, c.j) * bb.A_final / 2.0));
    }
    // independent entropy sum over the binding sets
    double sum = 0.0;
    for (std::size_t r = 0; r < aux.system.size(); ++r) {
      double d = bb.budget.per_set[r];
      double s = static_cast<double>(aux.system.range_size(r));
      if (d < 2 * s) sum += std::exp(-d * d / (16 * s));
    }
    CHECK(bb.entropy.sum == doctest::Approx(sum));
    CHECK(sum <= 16.0);

    CHECK(binding_budget(3.9, 2));
    CHECK_FALSE(binding_budget(4.0, 2));
  }

  TEST_CASE("toy system telescopes") {
    SetSystem sys = system_of(4, {{0, 1}, {1, 2, 3}, {3}});
    SizeSensitiveColoring c = color_size_sensitive(sys, ScheduleParams::make(4, 1, 1, 8.0), WalkParams{}, 1);
    REQUIRE(c.signs.size() == 4);
    for (int s : c.signs) CHECK((s == 1 || s == -1));
    CHECK(c.report.telescoping_exact);
    std::vector<long long> direct = signed_sums(sys, c.signs);
    for (const auto& rd : c.report.per_range) CHECK(rd.disc == std::llabs(direct[rd.range]));
  }

  TEST_CASE("pipeline on intervals") {
    SetSystem sys = generate({InstanceKind::Intervals1d, 128, 0});
    ScheduleParams sp = ScheduleParams::make(128, 1, 1);
    WalkParams wp;
    wp.seed = 2;
    for (bool redecompose : {true, false}) {
      PipelineOptions opt;
      opt.redecompose = redecompose;
      SizeSensitiveColoring c = color_size_sensitive(sys, sp, wp, 2, opt);
      CHECK(c.report.telescoping_exact);
      CHECK(c.report.telescoping_failures == 0);
      CHECK(c.report.rounds_used == c.rounds.size());
      CHECK(c.budgets.size() == c.rounds.size());
      std::vector<long long> direct = signed_sums(sys, c.signs);
      long long mx = 0;
      for (std::size_t r = 0; r < sys.size(); ++r) {
        const RangeDisc& rd = c.report.per_range[r];
        CHECK(rd.disc == std::llabs(direct[r]));
        CHECK(rd.envelope == doctest::Approx(size_envelope(static_cast<double>(rd.size), 128, 1, 1)));
        mx = std::max(mx, rd.disc);
      }
      CHECK(c.report.max_disc == mx);
      // small discrepancy compared to a random coloring's sqrt(n) scale on the full set
      CHECK(c.report.max_disc < 40);
    }
    // same inputs, same output
    SizeSensitiveColoring a = color_size_sensitive(sys, sp, wp, 4), b = color_size_sensitive(sys, sp, wp, 4);
    CHECK(a.signs == b.signs);
    CHECK(discrepancy_csv(a.report) == discrepancy_csv(b.report));
  }

  TEST_CASE("pipeline preconditions") {
    SetSystem dup = system_of(8, {{1}, {1}});
    CHECK_THROWS_AS(color_size_sensitive(dup, ScheduleParams::make(8, 1, 1), WalkParams{}, 0), PreconditionError);
    SetSystem ok = system_of(8, {{1}});
    CHECK_THROWS_AS(color_size_sensitive(ok, ScheduleParams::make(16, 1, 1), WalkParams{}, 0), PreconditionError);
  }

  TEST_CASE("Beck-Fiala zero budgets") {
    SetSystem hp = generate({InstanceKind::Halfplanes2d, 256, 1});
    SetSystem sys = trim_to_degree(hp, 2, 1).deduped();
    ScheduleParams sp = ScheduleParams::make(256, 1, 1);
    BeckFialaColoring bf = color_beck_fiala(sys, 2, sp, WalkParams{}, 3);
    CHECK(bf.cap == 64);
    std::size_t big = 0;
    for (std::size_t r = 0; r < sys.size(); ++r) big += sys.range_size(r) > 64;
    CHECK(bf.big_count == big);
    CHECK(32 * bf.big_count <= 256);  // Σ|S| <= n t
    for (const auto& info : bf.coloring.budgets) CHECK(info.zero_budget_enforced);
    CHECK(bf.fitted_constant == doctest::Approx(static_cast<double>(bf.max_disc) / bf.envelope));
    CHECK(bf.coloring.report.telescoping_exact);

    CHECK_THROWS_AS(color_beck_fiala(hp, 2, sp, WalkParams{}, 3), PreconditionError);
    CHECK_THROWS_AS(color_beck_fiala(sys, 0, sp, WalkParams{}, 3), PreconditionError);
  }

  TEST_CASE("summary json and csv") {
    SetSystem sys = generate({InstanceKind::Intervals1d, 32, 0});
    SizeSensitiveColoring c = color_size_sensitive(sys, ScheduleParams::make(32, 1, 1), WalkParams{}, 0);
    auto j = nlohmann::json::parse(discrepancy_summary_json(c.report));
    CHECK(j["max_disc"].get<long long>() == c.report.max_disc);
    CHECK(j["telescoping_exact"].get<bool>());
    CsvTable t = parse_csv(discrepancy_csv(c.report));
    CHECK(t.header == std::vector<std::string>{"range_id", "size", "i_class", "disc", "envelope", "ratio"});
    CHECK(t.rows.size() == sys.size());
  }
}
