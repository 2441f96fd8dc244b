#pragma once

// Large-N spectrum around the classical spin configuration: the classical
// angle theta0, Holstein-Primakoff boson gaps and the bipartite entanglement
// entropy of the A1/A2 split. Templated on the scalar so the neighbourhood of
// the critical endpoint can be resolved in extended precision.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/log1p.hpp>

#include "pspin/errors.hpp"
#include "pspin/model.hpp"

namespace pspin {

template <class Real = double>
struct ClassicalAngle {
  Real theta0{};
  Real energy{};
  bool degenerate = false;
  std::optional<Real> alternate;  // second degenerate minimizer, if any
};

template <class Real = double>
struct GapComponents {
  Real theta0{};
  Real e{};
  Real gamma_coef{};
  Real delta_coef{};
  Real epsilon{};
  std::optional<Real> delta_a1;  // empty when |epsilon| >= 1
  Real delta_a2{};
  Real delta_b{};
  bool breakdown = false;
};

template <class Real = double>
struct MinGap {
  std::optional<Real> value;
  bool breakdown = false;
};

template <class Real = double>
struct EntropyResult {
  Real u{};
  Real alpha{};
  Real mu{};
  Real entropy{};
  bool divergent = false;
};

template <class Real = double>
struct CriticalEndpoint {
  Real theta{};
  Real s{};
  Real tau{};
};

namespace semiclassical_detail {

template <class Real>
Real pow_int(const Real& x, int n) {
  Real r = 1;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}

// e(theta) and its first three derivatives.
template <class Real>
struct EnergyDerivatives {
  Real e, d1, d2, d3;
};

template <class Real>
EnergyDerivatives<Real> energy_derivatives(int p, const Real& s, const Real& tau, const Real& theta) {
  using std::cos;
  using std::sin;
  const Real w = 1 - tau;
  const Real c = tau + w * cos(theta);
  const Real c1 = -w * sin(theta);
  const Real c2 = -w * cos(theta);
  const Real c3 = w * sin(theta);
  const Real cp = pow_int(c, p);
  const Real cp1 = pow_int(c, p - 1);
  const Real cp2 = p >= 2 ? pow_int(c, p - 2) : Real(0);
  const Real cp3 = p >= 3 ? pow_int(c, p - 3) : Real(0);
  EnergyDerivatives<Real> out;
  out.e = -s * cp - w * sin(theta);
  out.d1 = -s * p * cp1 * c1 - w * cos(theta);
  out.d2 = -s * p * ((p - 1) * cp2 * c1 * c1 + cp1 * c2) + w * sin(theta);
  out.d3 = -s * p * (Real((p - 1) * (p - 2)) * cp3 * c1 * c1 * c1 + 3 * (p - 1) * cp2 * c1 * c2 + cp1 * c3) +
           w * cos(theta);
  return out;
}

template <class Real>
Real half_pi() {
  return boost::math::constants::half_pi<Real>();
}

// Safeguarded bisection for a sign change of g on [a, b].
template <class Real, class G>
Real bracket_root(G&& g, Real a, Real b, Real ga) {
  using std::fabs;
  const Real eps = std::numeric_limits<Real>::epsilon();
  for (int it = 0; it < 2000; ++it) {
    const Real mid = (a + b) / 2;
    if (b - a <= 4 * eps * (fabs(mid) + 1) || mid <= a || mid >= b) return mid;
    const Real gm = g(mid);
    if (gm == 0) return mid;
    if ((gm < 0) == (ga < 0)) {
      a = mid;
      ga = gm;
    } else {
      b = mid;
    }
  }
  return (a + b) / 2;
}

}  // namespace semiclassical_detail

template <class Real>
Real classical_energy(int p, const Real& s, const Real& tau, const Real& theta) {
  return semiclassical_detail::energy_derivatives<Real>(p, s, tau, theta).e;
}

template <class Real>
ClassicalAngle<Real> classical_angle(int p, const Real& s, const Real& tau, int grid = 1000) {
  using std::fabs;
  namespace sd = semiclassical_detail;
  if (p < 3) throw domain_error("p must be an integer >= 3");
  if (!(s >= 0 && s <= 1) || !(tau >= 0 && tau <= 1)) throw domain_error("(s, tau) must lie in [0,1]^2");
  ClassicalAngle<Real> out;
  if (tau == 1) {  // e(theta) is constant
    out.theta0 = 0;
    out.energy = -s;
    out.degenerate = true;
    return out;
  }
  const Real hi = sd::half_pi<Real>();
  auto d1 = [&](const Real& t) { return sd::energy_derivatives<Real>(p, s, tau, t).d1; };
  std::vector<Real> th(grid), en(grid);
  for (int k = 0; k < grid; ++k) {
    th[k] = k == grid - 1 ? hi : hi * k / (grid - 1);
    en[k] = classical_energy<Real>(p, s, tau, th[k]);
  }
  struct Cand {
    Real theta, energy;
  };
  std::vector<Cand> mins;
  const Real tiny = 1e3 * std::numeric_limits<Real>::epsilon();
  for (int k = 0; k < grid; ++k) {
    const bool left = k == 0 || en[k] < en[k - 1];
    const bool right = k == grid - 1 || en[k] <= en[k + 1];
    if (!left || !right) continue;
    const Real a = th[std::max(k - 1, 0)];
    const Real b = th[std::min(k + 1, grid - 1)];
    const Real ga = d1(a), gb = d1(b);
    Real t;
    if (ga < 0 && gb > 0)
      t = sd::bracket_root<Real>(d1, a, b, ga);
    else if (b == hi && gb <= tiny && ga <= 0)
      t = hi;
    else if (a == 0 && ga >= -tiny && gb >= 0)
      t = Real(0);
    else
      t = th[k];
    mins.push_back({t, classical_energy<Real>(p, s, tau, t)});
  }
  std::sort(mins.begin(), mins.end(), [](const Cand& x, const Cand& y) { return x.energy < y.energy; });
  out.theta0 = mins.front().theta;
  out.energy = mins.front().energy;
  if (mins.size() > 1 && fabs(mins[1].energy - mins[0].energy) <= Real(1e-10)) {
    out.degenerate = true;
    const Real other = mins[1].theta;
    if (other < out.theta0) {
      out.alternate = out.theta0;
      out.theta0 = other;
      out.energy = mins[1].energy;
    } else {
      out.alternate = other;
    }
  }
  return out;
}

inline ClassicalAngle<double> classical_angle(const ModelSpec& spec) {
  validate(spec);
  return classical_angle<double>(spec.p, spec.s, spec.tau);
}

// Gap components expanded around a given angle theta.
template <class Real>
GapComponents<Real> gap_components_at(int p, const Real& s, const Real& tau, const Real& theta) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  namespace sd = semiclassical_detail;
  GapComponents<Real> g;
  g.theta0 = theta;
  g.e = classical_energy<Real>(p, s, tau, theta);
  const Real c = tau + (1 - tau) * cos(theta);
  const Real st = sin(theta);
  g.gamma_coef = -Real(s) * p * (p - 1) * (1 - tau) * st * st * sd::pow_int(c, p - 2) / 2;
  g.delta_b = 2 * Real(s) * p * sd::pow_int(c, p - 1);
  g.delta_coef = g.delta_b * cos(theta) + 2 * st + 2 * g.gamma_coef;
  g.delta_a2 = g.delta_coef;
  if (g.delta_coef > 0) {
    g.epsilon = -2 * g.gamma_coef / g.delta_coef;
    const Real one_minus = (g.delta_coef + 2 * g.gamma_coef) / g.delta_coef;
    const Real one_plus = (g.delta_coef - 2 * g.gamma_coef) / g.delta_coef;
    if (one_minus > 0 && one_plus > 0)
      g.delta_a1 = g.delta_coef * sqrt(one_minus * one_plus);
    else
      g.breakdown = true;
  } else {
    g.epsilon = std::numeric_limits<Real>::infinity();
    g.breakdown = true;
  }
  return g;
}

// Components on the global branch; a second entry when theta0 is degenerate.
template <class Real>
std::vector<GapComponents<Real>> gap_components_all(int p, const Real& s, const Real& tau) {
  const auto ang = classical_angle<Real>(p, s, tau);
  std::vector<GapComponents<Real>> out{gap_components_at<Real>(p, s, tau, ang.theta0)};
  if (ang.alternate) out.push_back(gap_components_at<Real>(p, s, tau, *ang.alternate));
  return out;
}

template <class Real>
GapComponents<Real> gap_components(int p, const Real& s, const Real& tau) {
  return gap_components_all<Real>(p, s, tau).front();
}

inline GapComponents<double> gap_components(const ModelSpec& spec) {
  validate(spec);
  return gap_components<double>(spec.p, spec.s, spec.tau);
}

// min(Delta_a1, Delta_b); the empty subsystem's mode is left out at tau = 0 or 1.
template <class Real>
MinGap<Real> min_gap_of(const GapComponents<Real>& g, const Real& tau) {
  MinGap<Real> out;
  out.breakdown = g.breakdown;
  const bool has_a = tau < 1;
  const bool has_b = tau > 0;
  if (has_a && !g.delta_a1) return out;
  if (has_a && has_b)
    out.value = std::min(*g.delta_a1, g.delta_b);
  else if (has_a)
    out.value = *g.delta_a1;
  else
    out.value = g.delta_b;
  return out;
}

template <class Real>
MinGap<Real> min_gap(int p, const Real& s, const Real& tau) {
  return min_gap_of<Real>(gap_components<Real>(p, s, tau), tau);
}

inline MinGap<double> min_gap(const ModelSpec& spec) {
  validate(spec);
  return min_gap<double>(spec.p, spec.s, spec.tau);
}

// Entropy from the Bogoliubov angle of the A block.
template <class Real>
EntropyResult<Real> entropy_from_epsilon(const Real& one_minus_eps, const Real& one_plus_eps, const Real& u) {
  using std::log;
  using std::sqrt;
  if (!(u >= 0 && u <= 1)) throw domain_error("split fraction u must lie in [0,1]");
  EntropyResult<Real> r;
  r.u = u;
  if (!(one_minus_eps > 0 && one_plus_eps > 0)) {
    r.alpha = r.mu = r.entropy = std::numeric_limits<Real>::infinity();
    r.divergent = true;
    return r;
  }
  r.alpha = sqrt(one_minus_eps / one_plus_eps);
  const Real mu2 = ((1 - u) + u * r.alpha) * ((1 - u) + u / r.alpha);
  r.mu = mu2 > 1 ? Real(sqrt(mu2)) : Real(1);
  const Real x = (r.mu - 1) / 2;
  r.entropy = x == 0 ? Real(0) : Real((1 + x) * boost::math::log1p(x) - x * log(x));
  if (r.entropy < 0) r.entropy = 0;
  return r;
}

template <class Real>
EntropyResult<Real> entanglement_entropy(int p, const Real& s, const Real& tau, const Real& u) {
  const auto g = gap_components<Real>(p, s, tau);
  if (g.breakdown || !(g.delta_coef > 0)) return entropy_from_epsilon<Real>(Real(0), Real(0), u);
  const Real one_minus = (g.delta_coef + 2 * g.gamma_coef) / g.delta_coef;
  const Real one_plus = (g.delta_coef - 2 * g.gamma_coef) / g.delta_coef;
  return entropy_from_epsilon<Real>(one_minus, one_plus, u);
}

inline EntropyResult<double> entanglement_entropy(const ModelSpec& spec, double u) {
  validate(spec);
  return entanglement_entropy<double>(spec.p, spec.s, spec.tau, u);
}

// Interior point where the two minima of e(theta) merge: e' = e'' = e''' = 0.
// The first two conditions fix (s, tau) as functions of theta.
template <class Real>
CriticalEndpoint<Real> critical_endpoint(int p) {
  using std::asin;
  using std::cos;
  using std::sin;
  using std::sqrt;
  namespace sd = semiclassical_detail;
  if (p < 3) throw domain_error("p must be an integer >= 3");
  auto point = [p](const Real& th) {
    const Real w = 1 / ((p - 1) * sin(th) * sin(th) * cos(th) + 1 - cos(th));
    const Real tau = 1 - w;
    const Real c = tau + w * cos(th);
    const Real s = cos(th) / (p * sd::pow_int(c, p - 1) * sin(th));
    return CriticalEndpoint<Real>{th, s, tau};
  };
  auto third = [&](const Real& th) {
    const auto cp = point(th);
    return sd::energy_derivatives<Real>(p, cp.s, cp.tau, th).d3;
  };
  const Real lo = asin(1 / sqrt(Real(p - 1)));
  const Real hi = sd::half_pi<Real>();
  const int n = 4000;
  Real prev_t = 0, prev_g = 0;
  bool have_prev = false;
  for (int k = 1; k < n; ++k) {
    const Real t = lo + (hi - lo) * k / n;
    const auto cp = point(t);
    if (!(cp.s > 0 && cp.s <= 1 && cp.tau >= 0 && cp.tau <= 1)) {
      have_prev = false;
      continue;
    }
    const Real g = third(t);
    if (have_prev && (g < 0) != (prev_g < 0)) {
      const Real root = sd::bracket_root<Real>(third, prev_t, t, prev_g);
      return point(root);
    }
    prev_t = t;
    prev_g = g;
    have_prev = true;
  }
  throw numerical_error("no critical endpoint found");
}

// Exponent c with tau = s^c passing exactly through the critical endpoint.
template <class Real>
Real touching_exponent(int p) {
  using std::log;
  const auto cp = critical_endpoint<Real>(p);
  return log(cp.tau) / log(cp.s);
}

}  // namespace pspin
