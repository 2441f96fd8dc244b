#pragma once

// Mean-field free energy f(m) of the inhomogeneously driven p-spin model,
// its closed forms at zero temperature, the self-consistency residual and
// landscape / transition queries built on the shared landscape machinery.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pspin/errors.hpp"
#include "pspin/landscape.hpp"
#include "pspin/model.hpp"
#include "pspin/special.hpp"

namespace pspin {

namespace detail {

inline double ipow(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}

inline void require_m(double m) {
  if (!(std::fabs(m) <= 1.0)) throw domain_error("magnetization must satisfy |m| <= 1");
}

// The saddle-point form is only physical for m >= 0 when p is odd: there
// m^{p-1} is even and m < 0 would fake an energy below the ground state.
inline Interval magnetization_domain(int p) {
  return p % 2 == 1 ? Interval{0.0, 1.0} : Interval{-1.0, 1.0};
}

template <class Fn>
double integrate_piece(Fn&& fn, double a, double b, double tol) {
  if (b <= a) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, a, b, 12, tol);
}

}  // namespace detail

// Fast evaluator of f(m) at a fixed model point. Uses the plateau/ramp
// decomposition of the schedule so constant pieces cost one kernel call.
class FreeEnergy {
 public:
  FreeEnergy(const ModelSpec& spec, const FieldSchedule& sched, const DisorderSpec& dist = {})
      : spec_(spec), beta_(spec.beta()) {
    validate(spec);
    validate(sched);
    // The random field belongs to the target term, so it carries the factor s.
    const DisorderSpec field = scaled(dist, spec.s);
    fields_ = disorder_nodes(field);
    if (const auto* g = std::get_if<disorder::Gaussian>(&field.kind)) sigma_ = g->sigma;
    profile_ = field_profile(sched, spec.tau, spec.s);
  }

  const ModelSpec& spec() const { return spec_; }
  Interval domain() const { return detail::magnetization_domain(spec_.p); }
  bool flat() const { return spec_.s == 0.0; }

  double value(double m) const {
    const double H = effective_field(m);
    const double amp = average(H, [this](double a, double g) {
      return thermal_amplitude(std::sqrt(a * a + g * g), beta_);
    });
    return spec_.s * (spec_.p - 1) * detail::ipow(m, spec_.p) - amp;
  }

  // m minus the right-hand side of the self-consistent equation.
  double residual(double m) const {
    const double H = effective_field(m);
    return m - average(H, [this](double a, double g) {
             const double r = std::sqrt(a * a + g * g);
             return r == 0.0 ? 0.0 : a / r * thermal_polarization(r, beta_);
           });
  }

  double slope(double m) const {
    const int p = spec_.p;
    return spec_.s * p * (p - 1) * detail::ipow(m, p - 2) * residual(m);
  }

 private:
  // Width of the thermal rounding of the zero-field kink.
  double layer() const { return spec_.zero_temperature() ? 0.0 : 20.0 * spec_.temperature; }
  double effective_field(double m) const { return spec_.s * spec_.p * detail::ipow(m, spec_.p - 1); }

  template <class K>
  double average(double H, K&& kernel) const {
    auto at = [&](double a) {
      double acc = 0.0;
      for (const auto& pl : profile_.plateaus) acc += pl.weight * kernel(a, pl.gamma);
      if (profile_.ramp) {
        const auto& r = *profile_.ramp;
        const double dg = (r.g1 - r.g0) / (r.x1 - r.x0);
        acc += detail::integrate_piece(
            [&](double x) { return kernel(a, r.g0 + dg * (x - r.x0)); }, r.x0, r.x1, 1e-14);
      }
      return acc;
    };
    // Kernels are even in a and kinked at a = 0 once Gamma hits zero.
    if (sigma_ > 0.0) return gaussian_average_split(sigma_, [&](double h) { return at(H + h); }, -H, layer());
    double total = 0.0;
    for (const auto& [h, w] : fields_) total += w * at(H + h);
    return total;
  }

  ModelSpec spec_;
  double beta_;
  std::vector<WeightedField> fields_;
  double sigma_ = 0.0;
  FieldProfile profile_;
};

// Generic route: adaptive Gauss-Kronrod over x between schedule breakpoints,
// with the disorder bracket taken pointwise.
inline double free_energy_quadrature(double m, const ModelSpec& spec, const FieldSchedule& sched,
                                     const DisorderSpec& dist = {}) {
  validate(spec);
  validate(sched);
  detail::require_m(m);
  const double beta = spec.beta();
  const double H = spec.s * spec.p * detail::ipow(m, spec.p - 1);
  const DisorderSpec field = scaled(dist, spec.s);
  auto integrand = [&](double x) {
    const double g = gamma_at(sched, x, spec.tau, spec.s);
    return disorder_average_kinked(
        field, [&](double h) { return thermal_amplitude(std::sqrt((H + h) * (H + h) + g * g), beta); }, -H,
        20.0 * spec.temperature);
  };
  const auto b = breakpoints(sched, spec.tau);
  double amp = 0.0;
  for (std::size_t k = 0; k + 1 < b.size(); ++k) amp += detail::integrate_piece(integrand, b[k], b[k + 1], 1e-13);
  return spec.s * (spec.p - 1) * detail::ipow(m, spec.p) - amp;
}

// Zero temperature, ideal step, no disorder.
inline double free_energy_closed_step(double m, const ModelSpec& spec) {
  validate(spec);
  detail::require_m(m);
  if (!spec.zero_temperature()) throw domain_error("closed step form needs zero temperature");
  const double H = spec.s * spec.p * detail::ipow(m, spec.p - 1);
  return spec.s * (spec.p - 1) * detail::ipow(m, spec.p) -
         (1.0 - spec.tau) * std::sqrt(H * H + 1.0) - spec.tau * std::fabs(H);
}

// Zero temperature, step leaving a residual field gamma on the switched-off sites.
inline double free_energy_residual(double m, const ModelSpec& spec, double gamma) {
  validate(spec);
  detail::require_m(m);
  if (!spec.zero_temperature()) throw domain_error("residual form needs zero temperature");
  if (!(gamma > 0.0 && gamma < 1.0)) throw domain_error("residual gamma must lie in (0,1)");
  const double H = spec.s * spec.p * detail::ipow(m, spec.p - 1);
  return spec.s * (spec.p - 1) * detail::ipow(m, spec.p) -
         (1.0 - spec.tau) * std::sqrt(H * H + 1.0) - spec.tau * std::sqrt(H * H + gamma * gamma);
}

// Zero temperature, linear drop of slope a - 1 between the plateaus.
inline double free_energy_slope(double m, const ModelSpec& spec, double a) {
  validate(spec);
  detail::require_m(m);
  if (!spec.zero_temperature()) throw domain_error("finite-slope form needs zero temperature");
  if (!(a > 1.0) || !std::isfinite(a)) throw domain_error("finite-slope form needs a > 1");
  const double tau = spec.tau;
  const double H = spec.s * spec.p * detail::ipow(m, spec.p - 1);
  const double H2 = H * H;
  const bool full_top = tau < 1.0 - 1.0 / a;
  const bool full_bottom = tau < 1.0 / a;
  const double x1 = full_top ? 1.0 - a * tau / (a - 1.0) : 0.0;
  const double x0 = full_bottom ? 1.0 : a * (1.0 - tau) / (a - 1.0);
  const double g1 = full_top ? 1.0 : a * (1.0 - tau);
  const double g0 = full_bottom ? 1.0 - a * tau : 0.0;
  auto G = [&](double g) {
    const double r = std::sqrt(H2 + g * g);
    const double log_term = H2 == 0.0 ? 0.0 : H2 * std::log(r + g);
    return -(g * r + log_term) / (2.0 * (a - 1.0));
  };
  return spec.s * (spec.p - 1) * detail::ipow(m, spec.p) - x1 * std::sqrt(H2 + 1.0) - G(g0) + G(g1) -
         (1.0 - x0) * std::fabs(H);
}

inline double self_consistency_residual(double m, const ModelSpec& spec, const FieldSchedule& sched,
                                        const DisorderSpec& dist = {}) {
  detail::require_m(m);
  return FreeEnergy(spec, sched, dist).residual(m);
}

inline Landscape landscape_scan(const ModelSpec& spec, const FieldSchedule& sched,
                                const DisorderSpec& dist = {}, int grid = 2001) {
  ScanOptions opt;
  opt.grid = grid;
  return scan_landscape(FreeEnergy(spec, sched, dist), opt);
}

// A parameterized curve lambda -> (s, tau, T) in the model's parameter space.
struct Segment {
  std::function<Coordinates(double)> at;
  double lambda0 = 0.0;
  double lambda1 = 1.0;

  static Segment line(const Coordinates& a, const Coordinates& b) {
    return {[a, b](double l) {
              return Coordinates{a.s + l * (b.s - a.s), a.tau + l * (b.tau - a.tau),
                                 a.temperature + l * (b.temperature - a.temperature)};
            },
            0.0, 1.0};
  }

  // lambda = s along tau(s).
  static Segment along_path(const PathSpec& ps, double temperature, double s0 = 0.0, double s1 = 1.0) {
    validate(ps);
    return {[ps, temperature](double s) { return Coordinates{s, tau_on_path(ps, s), temperature}; }, s0,
            s1};
  }
};

// All first-order jumps of the quantum global minimizer on the segment.
inline std::vector<TransitionPoint> detect_transitions(const Segment& seg, const ModelSpec& tmpl,
                                                       const FieldSchedule& sched,
                                                       const DisorderSpec& dist = {},
                                                       const DetectOptions& opt = {}) {
  auto family = [&](double l) {
    const Coordinates c = seg.at(l);
    return FreeEnergy(ModelSpec{tmpl.p, c.s, c.tau, c.temperature}, sched, dist);
  };
  return find_jumps(family, seg.at, seg.lambda0, seg.lambda1, opt);
}

// First jump on the segment, with the number of jumps in `multiplicity`.
inline std::optional<TransitionPoint> detect_transition(const Segment& seg, const ModelSpec& tmpl,
                                                        const FieldSchedule& sched,
                                                        const DisorderSpec& dist = {},
                                                        const DetectOptions& opt = {}) {
  auto all = detect_transitions(seg, tmpl, sched, dist, opt);
  if (all.empty()) return std::nullopt;
  return all.front();
}

}  // namespace pspin
