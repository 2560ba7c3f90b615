#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "discforge/error.hpp"
#include "discforge/geomgen.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace discforge;
using testing::system_of;

namespace {

std::size_t binom(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Cover's count of affine dichotomies of n points in general position in R^dim.
std::size_t cover_count(std::size_t n, std::size_t dim) {
  std::size_t s = 0;
  for (std::size_t k = 0; k <= dim; ++k) s += binom(n - 1, k);
  return 2 * s;
}

std::set<std::vector<std::size_t>> as_lists(const SetSystem& sys) {
  std::set<std::vector<std::size_t>> out;
  for (std::size_t r = 0; r < sys.size(); ++r) out.insert(sys.range_elements(r));
  return out;
}

// Every axis-parallel rectangle with sides at point coordinates, plus ∅.
std::set<std::vector<std::size_t>> brute_rect_traces(const PointCloud& pc) {
  std::vector<std::int64_t> xs, ys;
  for (const auto& p : pc.coords) {
    xs.push_back(p[0]);
    ys.push_back(p[1]);
  }
  std::set<std::vector<std::size_t>> out{{}};
  for (auto x0 : xs)
    for (auto x1 : xs)
      for (auto y0 : ys)
        for (auto y1 : ys) {
          if (x0 > x1 || y0 > y1) continue;
          std::vector<std::size_t> t;
          for (std::size_t i = 0; i < pc.coords.size(); ++i) {
            const auto& p = pc.coords[i];
            if (x0 <= p[0] && p[0] <= x1 && y0 <= p[1] && p[1] <= y1) t.push_back(i);
          }
          out.insert(t);
        }
  return out;
}

}  // namespace

TEST_SUITE("geomgen") {
  TEST_CASE("interval count is m(m+1)/2 + 1") {
    for (std::size_t n = 2; n <= 64; ++n) {
      SetSystem s = generate({InstanceKind::Intervals1d, n, 0});
      CHECK(s.size() == n * (n + 1) / 2 + 1);
      CHECK(as_lists(s) == as_lists(testing::brute_intervals(n)));
    }
  }

  TEST_CASE("halfplane traces match the dichotomy count") {
    CHECK(generate({InstanceKind::Halfplanes2d, 3, 0}).size() == 8);
    for (std::size_t n : {4, 5, 8, 13, 20})
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        Instance inst = generate_instance({InstanceKind::Halfplanes2d, n, seed});
        CHECK(inst.system.size() == cover_count(n, 2));
        CHECK_FALSE(inst.system.has_duplicates());
        // general position: no collinear triple
        const auto& c = inst.points.coords;
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = a + 1; b < n; ++b)
            for (std::size_t d = b + 1; d < n; ++d) CHECK(orientation2d(c[a], c[b], c[d]) != 0);
      }
  }

  TEST_CASE("halfspace traces match the dichotomy count") {
    for (std::size_t n : {4, 6, 9})
      for (std::uint64_t seed = 0; seed < 2; ++seed)
        CHECK(generate({InstanceKind::Halfspaces3d, n, seed}).size() == cover_count(n, 3));
  }

  TEST_CASE("rectangle traces match brute force") {
    for (std::size_t n : {5, 9, 14}) {
      Instance inst = generate_instance({InstanceKind::Rects2d, n, 2});
      CHECK(as_lists(inst.system) == brute_rect_traces(inst.points));
      CHECK(inst.system.size() == brute_rect_traces(inst.points).size());
    }
  }

  TEST_CASE("generation is deterministic") {
    for (auto kind : {InstanceKind::Intervals1d, InstanceKind::Halfplanes2d, InstanceKind::Halfspaces3d,
                      InstanceKind::Rects2d}) {
      InstanceSpec spec{kind, 12, 99};
      CHECK(generate(spec) == generate(spec));
    }
    CHECK_FALSE(generate({InstanceKind::Halfplanes2d, 12, 1}) == generate({InstanceKind::Halfplanes2d, 12, 2}));
  }

  TEST_CASE("orientation signs") {
    std::array<std::int64_t, 3> o{0, 0, 0}, x{1, 0, 0}, y{0, 1, 0}, z{0, 0, 1};
    CHECK(orientation2d(o, x, y) == 1);
    CHECK(orientation2d(o, y, x) == -1);
    CHECK(orientation2d(o, x, {2, 0, 0}) == 0);
    CHECK(orientation3d(o, x, y, z) == -orientation3d(o, y, x, z));
    CHECK(orientation3d(o, x, y, {1, 1, 0}) == 0);
  }

  TEST_CASE("text round trip") {
    SetSystem s = generate({InstanceKind::Halfplanes2d, 10, 5});
    std::stringstream ss;
    write_set_system(ss, s);
    CHECK(read_set_system(ss) == s);

    auto path = std::filesystem::temp_directory_path() / "discforge_roundtrip.sys";
    save(s, path.string());
    CHECK(load(path.string()) == s);
    std::filesystem::remove(path);
  }

  TEST_CASE("parser comments, empty ranges and errors") {
    std::istringstream ok("# header follows\nn 4 m 3\n0 1 # first\n\n3\n");
    SetSystem s = read_set_system(ok);
    CHECK(s == system_of(4, {{0, 1}, {}, {3}}));

    std::istringstream bad("n 4 m 1\n4\n");
    try {
      read_set_system(bad);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    std::istringstream junk("n 4 m 1\n1 x\n");
    CHECK_THROWS_AS(read_set_system(junk), ParseError);
    std::istringstream short_file("n 4 m 2\n1\n");
    CHECK_THROWS_AS(read_set_system(short_file), ParseError);
  }

  TEST_CASE("from-file instances") {
    auto path = std::filesystem::temp_directory_path() / "discforge_fromfile.sys";
    SetSystem s = system_of(5, {{0, 1}, {2}});
    save(s, path.string());
    InstanceSpec spec;
    spec.kind = InstanceKind::FromFile;
    spec.path = path.string();
    CHECK(generate(spec) == s);
    std::filesystem::remove(path);
    spec.path.reset();
    CHECK_THROWS_AS(spec.validate(), PreconditionError);
  }

  TEST_CASE("degree trimming") {
    SetSystem s = system_of(5, {{1, 2}, {2, 3}, {4}});
    CHECK(trim_to_degree_in_order(s, 1, {0, 1, 2}) == system_of(5, {{1, 2}, {4}}));
    SetSystem iv = generate({InstanceKind::Intervals1d, 10, 0});
    CHECK(trim_to_degree(iv, iv.max_degree(), 3) == iv);

    SetSystem hp = generate({InstanceKind::Halfplanes2d, 64, 0});
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      SetSystem t = trim_to_degree(hp, 8, seed);
      std::vector<std::size_t> deg(64, 0);
      for (std::size_t r = 0; r < t.size(); ++r)
        for (std::size_t e : t.range_elements(r)) ++deg[e];
      CHECK(*std::max_element(deg.begin(), deg.end()) <= 8);
      CHECK(t.size() > 0);
    }
  }

  TEST_CASE("kind names") {
    for (auto kind : {InstanceKind::Intervals1d, InstanceKind::Halfplanes2d, InstanceKind::Halfspaces3d,
                      InstanceKind::Rects2d, InstanceKind::FromFile})
      CHECK(parse_instance_kind(to_string(kind)) == kind);
    CHECK_THROWS_AS(parse_instance_kind("circles"), ParseError);
  }
}
