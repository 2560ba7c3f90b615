#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "discforge/error.hpp"
#include "discforge/report.hpp"
#include "discforge/rng.hpp"
#include "doctest.h"

using namespace discforge;

TEST_SUITE("report") {
  TEST_CASE("numbers round trip") {
    Rng rng(1);
    for (int t = 0; t < 1000; ++t) {
      double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<double>(rng.below(20)) - 10.0);
      CHECK(std::stod(format_number(v)) == v);
    }
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(3.0) == "3");
    CHECK(format_number(INFINITY) == "inf");
  }

  TEST_CASE("csv round trip") {
    std::ostringstream os;
    CsvWriter w(os, {"a", "b", "c"});
    w.cell(std::string("x")).cell(1.25).cell(std::size_t{7});
    w.end_row();
    w.cell(-3).cell(0.1).cell(std::string(""));
    w.end_row();
    CsvTable t = parse_csv(os.str());
    CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0] == std::vector<std::string>{"x", "1.25", "7"});
    CHECK(std::stod(t.rows[1][1]) == 0.1);
    CHECK(t.rows[1][2].empty());

    std::ostringstream bad;
    CsvWriter b(bad, {"a", "b"});
    b.cell(1);
    CHECK_THROWS_AS(b.end_row(), StructuralError);
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), ParseError);
  }

  TEST_CASE("files and names") {
    CHECK(artifact_name("color", "intervals-1d", 128, 7, "csv") == "color_intervals-1d_n128_seed7.csv");
    auto p = std::filesystem::temp_directory_path() / "discforge_report.txt";
    write_text(p, "hello\nworld\n");
    CHECK(read_text(p) == "hello\nworld\n");
    std::filesystem::remove(p);
    CHECK_THROWS_AS(read_text(p), PreconditionError);
  }

}

TEST_SUITE("rng") {
  TEST_CASE("portable random streams") {
    // splitmix64 reference outputs for state 0
    std::uint64_t s = 0;
    CHECK(splitmix64(s) == 0xe220a8397b1dcdafULL);
    CHECK(splitmix64(s) == 0x6e789e6aa1b965f4ULL);
    Rng a(5, 3), b(5, 3), c(5, 4);
    CHECK(a.next() == b.next());
    CHECK(a.next() != c.next());
    Rng u(8);
    for (int t = 0; t < 1000; ++t) {
      double x = u.uniform();
      CHECK(x >= 0.0);
      CHECK(x < 1.0);
      CHECK(u.below(7) < 7);
    }
    auto perm = Rng(2).permutation(50);
    std::vector<std::size_t> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 50; ++i) CHECK(sorted[i] == i);
  }
}
