#include <cmath>

#include "discforge/error.hpp"
#include "discforge/geomgen.hpp"
#include "discforge/partialcolor.hpp"
#include "discforge/rng.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace discforge;
using testing::system_of;

namespace {

Budget uniform(const SetSystem& sys, double delta) { return {std::vector<double>(sys.size(), delta)}; }

void check_outcome(const SetSystem& sys, const Budget& b, const PartialColoring& pc,
                   const std::vector<double>& start) {
  const std::size_t n = sys.n();
  std::size_t at_boundary = 0;
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(std::abs(pc.state.chi[i]) <= 1.0);
    if (std::abs(pc.state.chi[i]) == 1.0) ++at_boundary;
    if (pc.state.frozen[i]) CHECK(std::abs(pc.state.chi[i]) == 1.0);
  }
  CHECK(pc.state.frozen_count() >= (n + 1) / 2);
  CHECK(at_boundary >= pc.state.frozen_count());
  for (std::size_t r = 0; r < sys.size(); ++r) {
    double drift = 0.0;
    for (std::size_t e : sys.range_elements(r)) drift += pc.state.chi[e] - start[e];
    CHECK(std::abs(drift) <= b.per_set[r] + 1e-9);
  }
  CHECK(pc.stats.max_orthogonality_error <= 1e-8);
}

}  // namespace

TEST_SUITE("partialcolor") {
  TEST_CASE("entropy condition examples") {
    SetSystem sys(256);
    for (std::size_t q = 0; q < 16; ++q) {
      Bitset b(256);
      for (std::size_t e = 0; e < 64; ++e) b.set((q * 16 + e) % 256);
      sys.add_range(b);
    }
    EntropyCheck c = check_entropy_condition(sys, uniform(sys, 32.0));
    CHECK(c.sum == doctest::Approx(16.0 * std::exp(-1.0)));
    CHECK(c.sum == doctest::Approx(5.886).epsilon(1e-3));
    CHECK(c.limit == 16.0);
    CHECK(c.ok);

    EntropyCheck z = check_entropy_condition(sys, uniform(sys, 0.0));
    CHECK(z.sum == 16.0);
    CHECK(z.ok);
    SetSystem more = sys;
    more.add_range(Bitset(256, {0}));
    CHECK_FALSE(check_entropy_condition(more, uniform(more, 0.0)).ok);

    CHECK(entropy_term(0, 0.0) == 1.0);
    CHECK(entropy_term(0, 1.0) == 0.0);
    CHECK(entropy_term(10, kUnbounded) == 0.0);
  }

  TEST_CASE("parameter validation") {
    WalkParams p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.effective_max_steps() == 160000);
    p.step_gamma = 0.1;
    CHECK_THROWS_AS(p.validate(), PreconditionError);
    p = {};
    p.freeze_eps = 0.5;
    CHECK_THROWS_AS(p.validate(), PreconditionError);
    p = {};
    p.max_restarts = 0;
    CHECK_THROWS_AS(p.validate(), PreconditionError);
  }

  TEST_CASE("no ranges") {
    SetSystem sys(40);
    WalkParams p;
    p.seed = 3;
    PartialColoring pc = partial_color(sys, {}, std::nullopt, p);
    check_outcome(sys, {}, pc, std::vector<double>(40, 0.0));
  }

  TEST_CASE("balanced full set") {
    for (std::size_t n : {16, 20, 50}) {
      std::vector<std::size_t> all(n);
      for (std::size_t i = 0; i < n; ++i) all[i] = i;
      SetSystem sys(n);
      sys.add_range_elements(all);
      WalkParams p;
      p.seed = n;
      Budget b = uniform(sys, 0.0);
      PartialColoring pc = partial_color(sys, b, std::nullopt, p);
      check_outcome(sys, b, pc, std::vector<double>(n, 0.0));
      double sum = 0.0;
      for (double x : pc.state.chi) sum += x;
      CHECK(std::abs(sum) <= p.constraint_slack);
    }
  }

  TEST_CASE("disjoint blocks succeed in nine of ten trials") {
    SetSystem sys(64);
    for (std::size_t q = 0; q < 4; ++q) {
      Bitset b(64);
      for (std::size_t e = 0; e < 16; ++e) b.set(q * 16 + e);
      sys.add_range(b);
    }
    Budget b = uniform(sys, 16.0);
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      WalkParams p;
      p.seed = seed;
      p.max_restarts = 10;
      try {
        PartialColoring pc = partial_color(sys, b, std::nullopt, p);
        check_outcome(sys, b, pc, std::vector<double>(64, 0.0));
        ++ok;
      } catch (const WalkFailure&) {
      }
    }
    CHECK(ok >= 9);
  }

  TEST_CASE("tight budgets on intervals respect every bound") {
    SetSystem sys = generate({InstanceKind::Intervals1d, 48, 0});
    Budget b;
    for (std::size_t r = 0; r < sys.size(); ++r)
      b.per_set.push_back(std::sqrt(16.0 * static_cast<double>(sys.range_size(r)) * std::log(32.0 * sys.size() / 48.0)));
    REQUIRE(check_entropy_condition(sys, b).ok);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      WalkParams p;
      p.seed = seed;
      PartialColoring pc = partial_color(sys, b, std::nullopt, p);
      check_outcome(sys, b, pc, std::vector<double>(48, 0.0));
      CHECK(pc.stats.max_budget_excess <= 1e-9);
    }
  }

  TEST_CASE("starting point is respected") {
    SetSystem sys = system_of(64, {{0, 1, 2}, {3, 4, 5}, {0, 5}});
    ColorState start;
    start.chi.assign(64, 0.0);
    start.chi[0] = 1.0;
    start.chi[1] = -1.0;
    start.chi[2] = 0.25;
    start.chi[5] = -0.5;
    start.frozen.assign(64, 0);
    start.frozen[0] = start.frozen[1] = 1;
    for (std::size_t i = 0; i < 64; ++i) start.active_map.push_back(i);
    Budget b = uniform(sys, 0.5);
    WalkParams p;
    p.seed = 1;
    PartialColoring pc = partial_color(sys, b, start, p);
    CHECK(pc.state.chi[0] == 1.0);
    CHECK(pc.state.chi[1] == -1.0);
    for (std::size_t r = 0; r < sys.size(); ++r) {
      double drift = 0.0;
      for (std::size_t e : sys.range_elements(r)) drift += pc.state.chi[e] - start.chi[e];
      CHECK(std::abs(drift) <= 0.5 + 1e-9);
    }
  }

  TEST_CASE("entropy violation is a precondition error") {
    SetSystem sys(16);
    for (std::size_t i = 0; i < 16; ++i) sys.add_range(Bitset(16, {i}));
    CHECK_THROWS_AS(partial_color(sys, uniform(sys, 0.0), std::nullopt, WalkParams{}), PreconditionError);
  }

  TEST_CASE("walk is deterministic") {
    SetSystem sys = generate({InstanceKind::Halfplanes2d, 24, 2});
    Budget b;
    for (std::size_t r = 0; r < sys.size(); ++r) {
      double s = static_cast<double>(sys.range_size(r));
      b.per_set.push_back(s == 0 ? kUnbounded : std::sqrt(16.0 * s * std::log(32.0 * sys.size() / 24.0)));
    }
    WalkParams p;
    p.seed = 77;
    p.record_trace = true;
    PartialColoring a = partial_color(sys, b, std::nullopt, p);
    PartialColoring c = partial_color(sys, b, std::nullopt, p);
    CHECK(a.state.chi == c.state.chi);
    CHECK(a.state.frozen == c.state.frozen);
    CHECK(a.stats.steps == c.stats.steps);
    CHECK_FALSE(a.stats.trace.empty());
  }

  TEST_CASE("martingale sanity without constraints") {
    SetSystem sys(32);
    const std::vector<std::size_t> s{0, 3, 5, 8, 13, 21, 22, 30};
    sys.add_range_elements(s);
    Budget b = uniform(sys, kUnbounded);
    double mean = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      WalkParams p;
      p.seed = seed;
      PartialColoring pc = partial_color(sys, b, std::nullopt, p);
      double v = 0.0;
      for (std::size_t e : s) v += pc.state.chi[e];
      mean += v / 100.0;
    }
    CHECK(std::abs(mean) <= 4.0 * std::sqrt(static_cast<double>(s.size())) / 10.0);
  }

  TEST_CASE("full coloring of two elements") {
    SetSystem sys = system_of(2, {{0, 1}});
    FullColoring fc = full_coloring(sys, [](std::size_t, const Restriction& r) {
      return Budget{std::vector<double>(r.system.size(), 10.0)};
    }, WalkParams{});
    CHECK(fc.rounds.size() <= 2);
    for (int s : fc.signs) CHECK((s == 1 || s == -1));
  }

  TEST_CASE("full coloring audit on intervals") {
    SetSystem sys = generate({InstanceKind::Intervals1d, 256, 0});
    auto schedule = [](std::size_t, const Restriction& r) {
      const double n_r = static_cast<double>(r.system.n());
      const double m = static_cast<double>(r.system.size());
      Budget b;
      for (std::size_t q = 0; q < r.system.size(); ++q)
        b.per_set.push_back(
            std::sqrt(16.0 * static_cast<double>(r.system.range_size(q)) * std::log(std::max(32.0 * m / n_r, 2.0))));
      return b;
    };
    WalkParams p;
    p.seed = 5;
    FullColoring fc = full_coloring(sys, schedule, p);
    CHECK(fc.rounds.size() <= 8u + 3u);
    std::vector<long long> sums = signed_sums(sys, fc.signs);
    REQUIRE(fc.budget_total.size() == sys.size());
    for (std::size_t r = 0; r < sys.size(); ++r)
      CHECK(static_cast<double>(std::llabs(sums[r])) <= fc.budget_total[r] + 0.5);
  }

  TEST_CASE("seed mixing") {
    CHECK(mix_seed(1, 0) != mix_seed(1, 1));
    CHECK(mix_seed(1, 0) != mix_seed(2, 0));
    CHECK(mix_seed(9, 4) == mix_seed(9, 4));
  }
}
