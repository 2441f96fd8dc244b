#pragma once

// Classical baselines: simulated annealing with a fraction tau of cold sites
// (inverse temperature beta0, the rest infinitely hot) and the mean-field free
// energy of spin-vector Monte Carlo (planar rotors in place of qubits).

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pspin/errors.hpp"
#include "pspin/landscape.hpp"
#include "pspin/meanfield.hpp"
#include "pspin/model.hpp"
#include "pspin/special.hpp"

namespace pspin {

struct SASpec {
  int p = 3;
  double beta0 = 1.0;
  double tau = 0.0;
  DisorderSpec disorder{};
};

inline void validate(const SASpec& sa) {
  detail::require(sa.p >= 3, "p must be an integer >= 3");
  detail::require(sa.beta0 > 0.0 && std::isfinite(sa.beta0), "beta0 must be > 0");
  detail::require(detail::unit(sa.tau), "tau must lie in [0,1]");
  validate(sa.disorder);
}

// Free energy per site in units where beta is absorbed; the hot-site constant
// (1 - tau) ln 2 is dropped.
class SAFreeEnergy {
 public:
  explicit SAFreeEnergy(const SASpec& spec) : spec_(spec) {
    validate(spec);
    fields_ = disorder_nodes(spec.disorder);
  }

  // Order parameter m = tau * beta0 * <sigma>; odd p keeps the physical half.
  Interval domain() const {
    const double r = spec_.tau * spec_.beta0;
    return spec_.p % 2 == 1 ? Interval{0.0, r} : Interval{-r, r};
  }
  bool flat() const { return spec_.tau == 0.0; }

  double value(double m) const {
    const double r = spec_.tau * spec_.beta0;
    if (std::fabs(m) > r * (1.0 + 1e-15)) return std::numeric_limits<double>::infinity();
    const int p = spec_.p;
    const double H = p * detail::ipow(m, p - 1);
    const double acc = average(H, [&](double a) { return log2cosh(spec_.beta0 * a); });
    return (p - 1) * detail::ipow(m, p) - spec_.tau * acc;
  }

  // m - tau beta0 [tanh(beta0 (p m^{p-1} + h))].
  double residual(double m) const {
    const int p = spec_.p;
    const double H = p * detail::ipow(m, p - 1);
    const double acc = average(H, [&](double a) { return std::tanh(spec_.beta0 * a); });
    return m - spec_.tau * spec_.beta0 * acc;
  }

  double slope(double m) const {
    const int p = spec_.p;
    return p * (p - 1) * detail::ipow(m, p - 2) * residual(m);
  }

 private:
  template <class K>
  double average(double H, K&& kernel) const {
    if (const auto* g = std::get_if<disorder::Gaussian>(&spec_.disorder.kind))
      return gaussian_average_split(g->sigma, [&](double h) { return kernel(H + h); }, -H, 20.0 / spec_.beta0);
    double acc = 0.0;
    for (const auto& [h, w] : fields_) acc += w * kernel(H + h);
    return acc;
  }

  SASpec spec_;
  std::vector<WeightedField> fields_;
};

inline double sa_free_energy(double m, const SASpec& spec) { return SAFreeEnergy(spec).value(m); }

inline double sa_stationarity_residual(double m, const SASpec& spec) { return SAFreeEnergy(spec).residual(m); }

struct SASample {
  double tau = 0.0;
  double m_star = 0.0;
  double m_normalized = 0.0;  // m* / (tau beta0); 0 at tau = 0
};

struct SACurve {
  std::vector<SASample> samples;
  std::vector<TransitionPoint> transitions;  // lambda = tau
};

// Global minimizer over a tau grid plus first-order jumps located by bisection.
inline SACurve sa_order_parameter_curve(const SASpec& base, const std::vector<double>& tau_grid,
                                        const DetectOptions& opt = {}) {
  validate(base);
  SACurve out;
  ScanOptions so;
  so.grid = opt.grid;
  for (double t : tau_grid) {
    detail::require(detail::unit(t), "tau grid must lie in [0,1]");
    SASpec sp = base;
    sp.tau = t;
    const double m = scan_landscape(SAFreeEnergy(sp), so).global().m;
    out.samples.push_back({t, m, t > 0.0 ? m / (t * base.beta0) : 0.0});
  }
  auto family = [&](double t) {
    SASpec sp = base;
    sp.tau = t;
    return SAFreeEnergy(sp);
  };
  auto coords = [&](double t) { return Coordinates{1.0, t, 1.0 / base.beta0}; };
  for (std::size_t k = 0; k + 1 < out.samples.size(); ++k) {
    const auto& a = out.samples[k];
    const auto& b = out.samples[k + 1];
    if (std::fabs(b.m_star - a.m_star) <= opt.jump_threshold) continue;
    DetectOptions local = opt;
    local.samples = 2;
    for (auto& tp : find_jumps(family, coords, a.tau, b.tau, local)) out.transitions.push_back(tp);
  }
  for (auto& tp : out.transitions) tp.multiplicity = static_cast<int>(out.transitions.size());
  return out;
}

// ---------------------------------------------------------------------------
// Spin-vector Monte Carlo.

class SVMCFreeEnergy {
 public:
  SVMCFreeEnergy(const ModelSpec& spec, const FieldSchedule& sched) : spec_(spec), quantum_(spec, sched) {
    validate(spec);
    profile_ = field_profile(sched, spec.tau, spec.s);
  }

  Interval domain() const { return detail::magnetization_domain(spec_.p); }
  bool flat() const { return spec_.s == 0.0; }

  double value(double m) const {
    if (spec_.zero_temperature()) return quantum_.value(m);
    const double beta = spec_.beta();
    const double H = field(m);
    const double amp = integrate([&](double g) { return rotor_amplitude(std::sqrt(H * H + g * g), beta); });
    return spec_.s * (spec_.p - 1) * detail::ipow(m, spec_.p) - amp;
  }

  double residual(double m) const {
    if (spec_.zero_temperature()) return quantum_.residual(m);
    const double beta = spec_.beta();
    const double H = field(m);
    return m - integrate([&](double g) {
             const double r = std::sqrt(H * H + g * g);
             return r == 0.0 ? 0.0 : H / r * rotor_polarization(r, beta);
           });
  }

  double slope(double m) const {
    const int p = spec_.p;
    return spec_.s * p * (p - 1) * detail::ipow(m, p - 2) * residual(m);
  }

 private:
  double field(double m) const { return spec_.s * spec_.p * detail::ipow(m, spec_.p - 1); }

  template <class K>
  double integrate(K&& kernel) const {
    double acc = 0.0;
    for (const auto& pl : profile_.plateaus) acc += pl.weight * kernel(pl.gamma);
    if (profile_.ramp) {
      const auto& r = *profile_.ramp;
      const double dg = (r.g1 - r.g0) / (r.x1 - r.x0);
      acc += detail::integrate_piece([&](double x) { return kernel(r.g0 + dg * (x - r.x0)); }, r.x0, r.x1,
                                     1e-14);
    }
    return acc;
  }

  ModelSpec spec_;
  FreeEnergy quantum_;
  FieldProfile profile_;
};

inline double svmc_free_energy(double m, const ModelSpec& spec, const FieldSchedule& sched) {
  detail::require_m(m);
  return SVMCFreeEnergy(spec, sched).value(m);
}

inline std::vector<TransitionPoint> detect_svmc_transitions(const Segment& seg, const ModelSpec& tmpl,
                                                            const FieldSchedule& sched,
                                                            const DetectOptions& opt = {}) {
  auto family = [&](double l) {
    const Coordinates c = seg.at(l);
    return SVMCFreeEnergy(ModelSpec{tmpl.p, c.s, c.tau, c.temperature}, sched);
  };
  return find_jumps(family, seg.at, seg.lambda0, seg.lambda1, opt);
}

}  // namespace pspin
