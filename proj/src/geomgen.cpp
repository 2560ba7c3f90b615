#include "discforge/geomgen.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "discforge/error.hpp"
#include "discforge/rng.hpp"

namespace discforge {

namespace {

using Point = std::array<std::int64_t, 3>;
constexpr std::int64_t kGrid = std::int64_t{1} << 20;
constexpr std::size_t kMaxRetries = 16;

}  // namespace

std::string to_string(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::Intervals1d: return "intervals-1d";
    case InstanceKind::Halfplanes2d: return "halfplanes-2d";
    case InstanceKind::Halfspaces3d: return "halfspaces-3d";
    case InstanceKind::Rects2d: return "rects-2d";
    case InstanceKind::FromFile: return "from-file";
  }
  return "unknown";
}

InstanceKind parse_instance_kind(const std::string& text) {
  for (auto k : {InstanceKind::Intervals1d, InstanceKind::Halfplanes2d, InstanceKind::Halfspaces3d,
                 InstanceKind::Rects2d, InstanceKind::FromFile})
    if (to_string(k) == text) return k;
  throw ParseError("unknown instance kind '" + text + "'", 0);
}

void InstanceSpec::validate() const {
  if (kind == InstanceKind::FromFile) {
    if (!path || path->empty()) throw PreconditionError("from-file instance needs a path");
  } else if (n < 2) {
    throw PreconditionError("geometric instances need n >= 2");
  }
  if (degree_cap && *degree_cap < 1) throw PreconditionError("degree cap must be >= 1");
}

int orientation2d(const Point& a, const Point& b, const Point& c) {
  const std::int64_t det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
  return (det > 0) - (det < 0);
}

int orientation3d(const Point& a, const Point& b, const Point& c, const Point& d) {
  using I = __int128;
  const I bx = b[0] - a[0], by = b[1] - a[1], bz = b[2] - a[2];
  const I cx = c[0] - a[0], cy = c[1] - a[1], cz = c[2] - a[2];
  const I dx = d[0] - a[0], dy = d[1] - a[1], dz = d[2] - a[2];
  const I det = bx * (cy * dz - cz * dy) - by * (cx * dz - cz * dx) + bz * (cx * dy - cy * dx);
  return (det > 0) - (det < 0);
}

namespace {

PointCloud draw_points(std::size_t n, std::size_t dim, std::uint64_t seed, std::size_t retry) {
  Rng rng(seed, retry);
  PointCloud pc{dim, std::vector<Point>(n, Point{0, 0, 0})};
  for (auto& p : pc.coords)
    for (std::size_t c = 0; c < dim; ++c) p[c] = static_cast<std::int64_t>(rng.below(kGrid));
  return pc;
}

bool general_position(const PointCloud& pc) {
  const auto& p = pc.coords;
  const std::size_t n = p.size();
  {
    auto sorted = p;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  }
  if (pc.dim == 2) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        for (std::size_t c = b + 1; c < n; ++c)
          if (orientation2d(p[a], p[b], p[c]) == 0) return false;
  } else if (pc.dim == 3) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        for (std::size_t c = b + 1; c < n; ++c) {
          // collinear triples make every plane through them degenerate
          const Point u{p[b][0] - p[a][0], p[b][1] - p[a][1], p[b][2] - p[a][2]};
          const Point v{p[c][0] - p[a][0], p[c][1] - p[a][1], p[c][2] - p[a][2]};
          if (u[1] * v[2] - u[2] * v[1] == 0 && u[2] * v[0] - u[0] * v[2] == 0 && u[0] * v[1] - u[1] * v[0] == 0)
            return false;
          for (std::size_t d = c + 1; d < n; ++d)
            if (orientation3d(p[a], p[b], p[c], p[d]) == 0) return false;
        }
  }
  return true;
}

PointCloud general_position_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  for (std::size_t retry = 0; retry < kMaxRetries; ++retry) {
    PointCloud pc = draw_points(n, dim, seed, retry);
    if (general_position(pc)) return pc;
  }
  throw RuntimeFailure("could not draw " + std::to_string(n) + " points in general position after " +
                       std::to_string(kMaxRetries) + " retries");
}

class TraceCollector {
 public:
  explicit TraceCollector(std::size_t n) : sys_(n), table_(words_for(n)) {}
  void add(WordSpan row) {
    if (table_.insert(row).second) sys_.add_range(row);
  }
  void add(const Bitset& b) { add(b.words()); }
  SetSystem take() { return std::move(sys_); }

 private:
  SetSystem sys_;
  RowTable table_;
};

SetSystem intervals(std::size_t n) {
  TraceCollector out(n);
  out.add(Bitset(n));
  for (std::size_t a = 0; a < n; ++a) {
    Bitset b(n);
    for (std::size_t e = a; e < n; ++e) {
      b.set(e);
      out.add(b);
    }
  }
  return out.take();
}

// Adds open side, and the open side with every subset of the boundary points.
void add_with_boundary(TraceCollector& out, const Bitset& open, std::span<const std::size_t> boundary) {
  const std::size_t variants = std::size_t{1} << boundary.size();
  for (std::size_t mask = 0; mask < variants; ++mask) {
    Bitset b = open;
    for (std::size_t k = 0; k < boundary.size(); ++k)
      if (mask >> k & 1U) b.set(boundary[k]);
    out.add(b);
  }
}

SetSystem halfplanes(const PointCloud& pc) {
  const std::size_t n = pc.coords.size();
  const auto& p = pc.coords;
  TraceCollector out(n);
  out.add(Bitset(n));
  out.add(Bitset::full(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      Bitset left(n), right(n);
      for (std::size_t c = 0; c < n; ++c) {
        if (c == a || c == b) continue;
        (orientation2d(p[a], p[b], p[c]) > 0 ? left : right).set(c);
      }
      const std::array<std::size_t, 2> boundary{a, b};
      add_with_boundary(out, left, boundary);
      add_with_boundary(out, right, boundary);
    }
  return out.take();
}

SetSystem halfspaces(const PointCloud& pc) {
  const std::size_t n = pc.coords.size();
  const auto& p = pc.coords;
  TraceCollector out(n);
  out.add(Bitset(n));
  out.add(Bitset::full(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c) {
        Bitset above(n), below(n);
        for (std::size_t d = 0; d < n; ++d) {
          if (d == a || d == b || d == c) continue;
          (orientation3d(p[a], p[b], p[c], p[d]) > 0 ? above : below).set(d);
        }
        const std::array<std::size_t, 3> boundary{a, b, c};
        add_with_boundary(out, above, boundary);
        add_with_boundary(out, below, boundary);
      }
  return out.take();
}

PointCloud rank_points(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  auto xs = rng.permutation(n);
  auto ys = rng.permutation(n);
  PointCloud pc{2, std::vector<Point>(n, Point{0, 0, 0})};
  for (std::size_t i = 0; i < n; ++i)
    pc.coords[i] = {static_cast<std::int64_t>(xs[i]), static_cast<std::int64_t>(ys[i]), 0};
  return pc;
}

SetSystem rectangles(const PointCloud& pc) {
  const std::size_t n = pc.coords.size();
  std::vector<std::size_t> by_x(n);
  std::iota(by_x.begin(), by_x.end(), std::size_t{0});
  std::sort(by_x.begin(), by_x.end(), [&](auto u, auto v) { return pc.coords[u][0] < pc.coords[v][0]; });
  TraceCollector out(n);
  out.add(Bitset(n));
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<std::size_t> slab;  // sorted by y
    for (std::size_t b = a; b < n; ++b) {
      const std::size_t e = by_x[b];
      slab.insert(std::upper_bound(slab.begin(), slab.end(), e,
                                   [&](auto u, auto v) { return pc.coords[u][1] < pc.coords[v][1]; }),
                  e);
      for (std::size_t lo = 0; lo < slab.size(); ++lo) {
        Bitset run(n);
        for (std::size_t hi = lo; hi < slab.size(); ++hi) {
          run.set(slab[hi]);
          out.add(run);
        }
      }
    }
  }
  return out.take();
}

}  // namespace

Instance generate_instance(const InstanceSpec& spec) {
  spec.validate();
  Instance inst;
  switch (spec.kind) {
    case InstanceKind::Intervals1d:
      inst.points.dim = 1;
      for (std::size_t i = 0; i < spec.n; ++i) inst.points.coords.push_back({static_cast<std::int64_t>(i), 0, 0});
      inst.system = intervals(spec.n);
      break;
    case InstanceKind::Halfplanes2d:
      inst.points = general_position_points(spec.n, 2, spec.seed);
      inst.system = halfplanes(inst.points);
      break;
    case InstanceKind::Halfspaces3d:
      if (spec.n < 3) throw PreconditionError("halfspaces-3d needs n >= 3");
      inst.points = general_position_points(spec.n, 3, spec.seed);
      inst.system = halfspaces(inst.points);
      break;
    case InstanceKind::Rects2d:
      inst.points = rank_points(spec.n, spec.seed);
      inst.system = rectangles(inst.points);
      break;
    case InstanceKind::FromFile:
      inst.system = load(*spec.path);
      break;
  }
  if (spec.degree_cap) inst.system = trim_to_degree(inst.system, *spec.degree_cap, spec.seed);
  return inst;
}

SetSystem generate(const InstanceSpec& spec) { return generate_instance(spec).system; }

SetSystem trim_to_degree_in_order(const SetSystem& sys, std::size_t t, const std::vector<std::size_t>& order) {
  if (t < 1) throw PreconditionError("degree cap t must be >= 1");
  std::vector<std::size_t> deg(sys.n(), 0);
  std::vector<char> keep(sys.size(), 0);
  for (std::size_t idx : order) {
    auto row = sys.range(idx);
    bool fits = true;
    for_each_bit(row, [&](std::size_t e) { fits = fits && deg[e] < t; });
    if (!fits) continue;
    for_each_bit(row, [&](std::size_t e) { ++deg[e]; });
    keep[idx] = 1;
  }
  SetSystem out(sys.n());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < sys.size(); ++i) {
    if (!keep[i]) continue;
    out.add_range(sys.range(i));
    if (!sys.labels().empty()) labels.push_back(sys.labels()[i]);
  }
  out.set_labels(std::move(labels));
  if (out.max_degree() > t) throw StructuralError("degree trimming left an element above the cap");
  return out;
}

SetSystem trim_to_degree(const SetSystem& sys, std::size_t t, std::uint64_t seed) {
  Rng rng(seed);
  return trim_to_degree_in_order(sys, t, rng.permutation(sys.size()));
}

SetSystem read_set_system(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  std::optional<std::size_t> n, m;
  SetSystem sys;
  std::vector<std::size_t> elems;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto hash = raw.find('#');
    const bool had_comment = hash != std::string::npos;
    const std::string body = had_comment ? raw.substr(0, hash) : raw;
    const bool blank = body.find_first_not_of(" \t") == std::string::npos;
    if (blank && had_comment) continue;
    std::istringstream ls(body);
    if (!n) {
      if (blank) continue;
      std::string kn, km;
      std::size_t vn = 0, vm = 0;
      if (!(ls >> kn >> vn >> km >> vm) || kn != "n" || km != "m")
        throw ParseError("expected header 'n <n> m <m>'", line_no);
      std::string extra;
      if (ls >> extra) throw ParseError("trailing text after header", line_no);
      n = vn;
      m = vm;
      sys = SetSystem(vn);
      sys.reserve(vm);
      continue;
    }
    if (sys.size() == *m) {
      if (blank) continue;
      throw ParseError("more ranges than the header's m=" + std::to_string(*m), line_no);
    }
    elems.clear();
    std::string tok;
    while (ls >> tok) {
      std::size_t pos = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(tok, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != tok.size() || tok.front() == '-' || tok.front() == '+')
        throw ParseError("malformed element index '" + tok + "'", line_no);
      if (v >= *n)
        throw ParseError("element index " + tok + " out of range for n=" + std::to_string(*n), line_no);
      elems.push_back(static_cast<std::size_t>(v));
    }
    sys.add_range_elements(elems);
  }
  if (!n) throw ParseError("missing header 'n <n> m <m>'", line_no);
  if (sys.size() != *m)
    throw ParseError("expected " + std::to_string(*m) + " ranges, found " + std::to_string(sys.size()), line_no);
  return sys;
}

void write_set_system(std::ostream& out, const SetSystem& sys) {
  out << "n " << sys.n() << " m " << sys.size() << '\n';
  for (std::size_t i = 0; i < sys.size(); ++i) {
    bool first = true;
    for_each_bit(sys.range(i), [&](std::size_t e) {
      if (!first) out << ' ';
      out << e;
      first = false;
    });
    out << '\n';
  }
}

SetSystem load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return read_set_system(in);
}

void save(const SetSystem& sys, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write '" + path + "'");
  write_set_system(out, sys);
}

void save_points(const PointCloud& points, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write '" + path + "'");
  for (const auto& p : points.coords) {
    out << p[0];
    for (std::size_t c = 1; c < points.dim; ++c) out << ' ' << p[c];
    out << '\n';
  }
}

}  // namespace discforge
