#include "discforge/epsapprox.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "discforge/report.hpp"
#include "discforge/rng.hpp"

namespace discforge {

double d_nu(double r, double s, double nu) {
  if (!(nu > 0.0)) throw PreconditionError("nu must be positive");
  return std::abs(r - s) / (r + s + nu);
}

Halving halve_once(const SetSystem& sys, const Bitset& active, const ScheduleParams& sp, const WalkParams& params,
                   std::uint64_t seed) {
  std::size_t m = active.count();
  if (m == 0) throw PreconditionError("cannot halve an empty set");
  Restriction res = restrict_to(sys, active, true);
  SetSystem local = res.system.deduped();
  Bitset all = Bitset::full(m);
  if (!local.find(all.words())) local.add_range(all);

  ScheduleParams lsp = ScheduleParams::make(m, sp.d1, sp.d2, sp.A, sp.B);
  SizeSensitiveColoring col = color_size_sensitive(local, lsp, params, seed);

  Halving h;
  Bitset plus(active.width()), minus(active.width());
  for (std::size_t i = 0; i < m; ++i) (col.signs[i] > 0 ? plus : minus).set(res.elements[i]);
  std::size_t np = plus.count(), nm = minus.count();
  h.full_set_disc = static_cast<long long>(np > nm ? np - nm : nm - np);
  if (np >= nm) {
    h.next = std::move(plus);
    h.other = std::move(minus);
  } else {
    h.next = std::move(minus);
    h.other = std::move(plus);
  }
  h.rounds = col.rounds.size();
  h.A_final = col.report.A_final;
  return h;
}

SampleAudit audit_sample(const SetSystem& sys, const Bitset& z, double nu) {
  if (z.width() != sys.n()) throw StructuralError("sample width differs from ground set size");
  SampleAudit a;
  const double n = static_cast<double>(sys.n());
  const double zs = static_cast<double>(z.count());
  for (std::size_t r = 0; r < sys.size(); ++r) {
    double xbar = n > 0 ? static_cast<double>(sys.range_size(r)) / n : 0.0;
    double zbar = zs > 0 ? static_cast<double>(and_count(sys.range(r), z.words())) / zs : 0.0;
    double v = d_nu(xbar, zbar, nu);
    if (v > a.worst) {
      a.worst = v;
      a.worst_range = r;
    }
  }
  return a;
}

FormulaSizes formula_sizes(double nu, double alpha, double d, double d1, std::size_t n) {
  const double p = 2.0 * d / (d + 1.0);
  const double x = 1.0 / (nu * alpha);
  const double lx = std::log(x);
  const double llx = std::log(std::max(lx, 1.0 + 1e-12));
  FormulaSizes t;
  if (std::abs(d1 - 1.0) < 1e-9) {
    double base = std::pow(lx, p) / (nu * std::pow(alpha, p));
    double floor_n = std::pow(std::log(static_cast<double>(std::max<std::size_t>(n, 2))), p);
    t.power_of_loglog = std::max(floor_n, base * std::pow(llx, p));
    t.power_inside_log = std::max(floor_n, base * p * llx);
  } else {
    double denom = std::pow(nu, (d + d1) / (d + 1.0)) * std::pow(alpha, p);
    t.power_of_loglog = std::pow(llx, p) / denom;
    t.power_inside_log = p * llx / denom;
  }
  return t;
}

SampleCertificate build_sample(const SetSystem& sys, double nu, double alpha, const ScheduleParams& sp,
                               const WalkParams& params, std::uint64_t seed, const SampleOptions& options) {
  if (!(nu > 0.0)) throw PreconditionError("nu must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("alpha must lie in (0, 1)");
  if (!(options.safety > 0.0 && options.safety <= 1.0)) throw PreconditionError("safety must lie in (0, 1]");
  SampleCertificate cert;
  cert.n = sys.n();
  cert.nu = nu;
  cert.alpha = alpha;
  cert.z = Bitset::full(sys.n());
  cert.chain.push_back(cert.z);
  cert.per_iter_sizes.push_back(sys.n());
  cert.formula = formula_sizes(nu, alpha, sp.d, sp.d1, sys.n());

  const double gate = alpha * options.safety;
  Bitset current = cert.z;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    std::size_t m = current.count();
    if (m < 2) break;
    Halving h = halve_once(sys, current, sp, params, mix_seed(seed, it));
    if (h.next.count() >= m) break;
    SampleAudit a = audit_sample(sys, h.next, nu);
    if (!(a.worst < gate)) break;
    current = h.next;
    cert.z = current;
    cert.chain.push_back(current);
    cert.per_iter_sizes.push_back(current.count());
    cert.full_set_disc.push_back(h.full_set_disc);
    ++cert.iterations;
  }
  cert.degenerate = cert.iterations == 0;
  SampleAudit fin = audit_sample(sys, cert.z, nu);
  cert.worst_d_nu = fin.worst;
  cert.worst_range = fin.worst_range;
  return cert;
}

void RelApproxParams::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("eps must lie in (0, 1)");
  if (!(delta_rel > 0.0 && delta_rel < 1.0)) throw PreconditionError("delta_rel must lie in (0, 1)");
}

RelApproxVerdict verify_relative_approx(const SetSystem& sys, const Bitset& z, const RelApproxParams& p) {
  p.validate();
  if (z.width() != sys.n()) throw StructuralError("sample width differs from ground set size");
  RelApproxVerdict v;
  const double n = static_cast<double>(sys.n());
  const double zs = static_cast<double>(z.count());
  double worst = -1.0;
  for (std::size_t r = 0; r < sys.size(); ++r) {
    double xbar = n > 0 ? static_cast<double>(sys.range_size(r)) / n : 0.0;
    double zbar = zs > 0 ? static_cast<double>(and_count(sys.range(r), z.words())) / zs : 0.0;
    double gap = std::abs(zbar - xbar);
    double ratio;
    if (xbar >= p.eps) {
      ratio = gap / (p.delta_rel * xbar);
      v.worst_multiplicative = std::max(v.worst_multiplicative, ratio);
    } else {
      ratio = gap / (p.delta_rel * p.eps);
      v.worst_additive = std::max(v.worst_additive, ratio);
    }
    if (ratio > worst) {
      worst = ratio;
      v.worst_range = r;
    }
  }
  v.ok = v.worst_multiplicative <= 1.0 && v.worst_additive <= 1.0;
  return v;
}

BaselineReport random_baseline(const SetSystem& sys, std::size_t size, double nu,
                               const std::vector<std::uint64_t>& seeds) {
  if (size > sys.n()) throw PreconditionError("baseline size exceeds n");
  BaselineReport rep;
  rep.size = size;
  for (std::uint64_t s : seeds) {
    Rng rng(s);
    Bitset z(sys.n());
    for (std::size_t e : rng.sample_indices(sys.n(), size)) z.set(e);
    rep.worst.push_back(audit_sample(sys, z, nu).worst);
  }
  if (!rep.worst.empty()) {
    std::vector<double> sorted = rep.worst;
    std::sort(sorted.begin(), sorted.end());
    std::size_t m = sorted.size();
    rep.median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  }
  return rep;
}

std::vector<EquivalencePoint> equivalence_grid(const SetSystem& sys, const SampleCertificate& cert) {
  std::vector<EquivalencePoint> out;
  for (double c1 : {0.5, 1.0, 2.0})
    for (double c2 : {0.5, 1.0, 2.0}) {
      EquivalencePoint pt{c1, c2, c1 * cert.nu, c2 * cert.alpha, false};
      if (!(pt.eps > 0.0 && pt.eps < 1.0 && pt.delta_rel > 0.0 && pt.delta_rel < 1.0)) continue;
      pt.passes = verify_relative_approx(sys, cert.z, {pt.eps, pt.delta_rel}).ok;
      out.push_back(pt);
    }
  return out;
}

std::string certificate_json(const SampleCertificate& cert) {
  Json j;
  j["n"] = cert.n;
  j["Z_size"] = cert.z.count();
  j["nu"] = cert.nu;
  j["alpha"] = cert.alpha;
  j["iterations"] = cert.iterations;
  j["per_iter_sizes"] = cert.per_iter_sizes;
  j["full_set_disc"] = cert.full_set_disc;
  j["worst_d_nu"] = cert.worst_d_nu;
  j["worst_range"] = cert.worst_range;
  j["degenerate"] = cert.degenerate;
  j["formula_size"] = {{"power_of_loglog", cert.formula.power_of_loglog},
                                {"power_inside_log", cert.formula.power_inside_log}};
  return j.dump(2) + "\n";
}

std::string sample_elements_text(const Bitset& z) {
  std::ostringstream os;
  for (std::size_t e : z.elements()) os << e << '\n';
  return os.str();
}

}  // namespace discforge
