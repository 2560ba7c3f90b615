#pragma once

// Seeded generators for geometric range spaces and the set-system text format.
//
// Text format (bit-exact round trip):
//   n <n> m <m>
//   <range 0 as space separated 0-based element indices, ascending>
//   ...
// An empty line is the empty range; `#` starts a comment running to the end of
// the line, and lines holding only a comment are skipped.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "discforge/setsystem.hpp"

namespace discforge {

enum class InstanceKind { Intervals1d, Halfplanes2d, Halfspaces3d, Rects2d, FromFile };

std::string to_string(InstanceKind kind);
/// Accepts "intervals-1d", "halfplanes-2d", "halfspaces-3d", "rects-2d", "from-file".
InstanceKind parse_instance_kind(const std::string& text);

struct InstanceSpec {
  InstanceKind kind = InstanceKind::Intervals1d;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> degree_cap;  ///< Beck-Fiala trimming to degree t
  std::optional<std::string> path;        ///< for from-file

  /// Throws PreconditionError when the spec is not generatable.
  void validate() const;
};

/// Integer points; unused trailing coordinates are zero.
struct PointCloud {
  std::size_t dim = 0;
  std::vector<std::array<std::int64_t, 3>> coords;
};

struct Instance {
  SetSystem system;
  PointCloud points;
};

/// Points are drawn on the integer grid [0, 2^20)^dim from Rng(seed, retry);
/// a configuration with repeated points or collinear triples (coplanar
/// quadruples in 3-D) is redrawn with the next retry counter, at most 16 times.
Instance generate_instance(const InstanceSpec& spec);
SetSystem generate(const InstanceSpec& spec);

/// Greedy degree trimming: ranges are scanned in Rng(seed) permutation order
/// and kept unless some element would exceed degree t.  Kept ranges retain
/// their original relative order.
SetSystem trim_to_degree(const SetSystem& sys, std::size_t t, std::uint64_t seed);
SetSystem trim_to_degree_in_order(const SetSystem& sys, std::size_t t, const std::vector<std::size_t>& order);

SetSystem read_set_system(std::istream& in);
void write_set_system(std::ostream& out, const SetSystem& sys);
SetSystem load(const std::string& path);
void save(const SetSystem& sys, const std::string& path);

/// One "x y" (or "x y z") line per point.
void save_points(const PointCloud& points, const std::string& path);

/// Sign of the orientation determinant of (a, b, c) in the plane.
int orientation2d(const std::array<std::int64_t, 3>& a, const std::array<std::int64_t, 3>& b,
                  const std::array<std::int64_t, 3>& c);
/// Sign of the orientation determinant of (a, b, c, d) in space.
int orientation3d(const std::array<std::int64_t, 3>& a, const std::array<std::int64_t, 3>& b,
                  const std::array<std::int64_t, 3>& c, const std::array<std::int64_t, 3>& d);

}  // namespace discforge
