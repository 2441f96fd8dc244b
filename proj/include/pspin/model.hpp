#pragma once

// Parameter types shared by every solver: the model point, transverse-field
// schedules, annealing paths in the (s, tau) plane and longitudinal disorder.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>

#include "pspin/errors.hpp"

namespace pspin {

struct ModelSpec {
  int p = 3;
  double s = 0.0;
  double tau = 0.0;
  double temperature = 0.0;  // exactly 0 selects the zero-temperature formulas

  bool zero_temperature() const { return temperature == 0.0; }
  double beta() const {
    return zero_temperature() ? std::numeric_limits<double>::infinity() : 1.0 / temperature;
  }
};

namespace detail {
inline void require(bool ok, const std::string& msg) {
  if (!ok) throw domain_error(msg);
}
inline bool unit(double v) { return v >= 0.0 && v <= 1.0; }
}  // namespace detail

inline void validate(const ModelSpec& m) {
  detail::require(m.p >= 3, "p must be an integer >= 3");
  detail::require(detail::unit(m.s), "s must lie in [0,1]");
  detail::require(detail::unit(m.tau), "tau must lie in [0,1]");
  detail::require(m.temperature >= 0.0 && std::isfinite(m.temperature),
                  "temperature must be finite and >= 0");
}

inline ModelSpec make_model(int p, double s, double tau, double temperature = 0.0) {
  ModelSpec m{p, s, tau, temperature};
  validate(m);
  return m;
}

// ---------------------------------------------------------------------------
// Transverse-field schedules Gamma(x), x = i/N in [0,1].

namespace schedule {
struct Homogeneous {};           // Gamma = 1 - s everywhere
struct StepIdeal {};             // 1 up to x = 1 - tau, 0 beyond
struct StepDiagonal {            // finite-N step with one fractional site
  int sites = 0;
};
struct ResidualStep {            // 1 up to x = 1 - tau, gamma beyond
  double gamma = 0.0;
};
struct FiniteSlope {             // linear drop of slope a - 1
  double a = 1.0;
};
}  // namespace schedule

using FieldSchedule = std::variant<schedule::Homogeneous, schedule::StepIdeal,
                                   schedule::StepDiagonal, schedule::ResidualStep,
                                   schedule::FiniteSlope>;

inline void validate(const FieldSchedule& sched) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, schedule::StepDiagonal>)
          detail::require(v.sites >= 1, "step-diagonal schedule needs a site count >= 1");
        else if constexpr (std::is_same_v<T, schedule::ResidualStep>)
          detail::require(v.gamma > 0.0 && v.gamma < 1.0, "residual gamma must lie in (0,1)");
        else if constexpr (std::is_same_v<T, schedule::FiniteSlope>)
          detail::require(v.a >= 1.0 && std::isfinite(v.a), "slope parameter a must be >= 1");
      },
      sched);
}

inline bool is_homogeneous(const FieldSchedule& sched) {
  return std::holds_alternative<schedule::Homogeneous>(sched);
}

// Field on site i (1-based) of an N-site chain with the diagonal drop.
// The middle branch spans one site; the value is clipped to [0,1].
inline double step_diagonal_site(int i, int n, double tau) {
  const double edge = n * (1.0 - tau);
  constexpr double slack = 1e-9;
  if (i <= edge + slack) return 1.0;
  if (i < edge + 1.0 - slack) return std::clamp(edge + 1.0 - i, 0.0, 1.0);
  return 0.0;
}

// Continuum Gamma(x). s is only read by the homogeneous schedule.
inline double gamma_at(const FieldSchedule& sched, double x, double tau, double s = 0.0) {
  detail::require(detail::unit(x), "x must lie in [0,1]");
  detail::require(detail::unit(tau), "tau must lie in [0,1]");
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, schedule::Homogeneous>) {
          detail::require(detail::unit(s), "s must lie in [0,1]");
          return 1.0 - s;
        } else if constexpr (std::is_same_v<T, schedule::StepIdeal>) {
          return x <= 1.0 - tau ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, schedule::StepDiagonal>) {
          detail::require(v.sites >= 1, "step-diagonal schedule needs a site count >= 1");
          const int i = static_cast<int>(std::lround(x * v.sites));
          return step_diagonal_site(i, v.sites, tau);
        } else if constexpr (std::is_same_v<T, schedule::ResidualStep>) {
          return x <= 1.0 - tau ? 1.0 : v.gamma;
        } else {
          return std::clamp(v.a * (1.0 - tau) - (v.a - 1.0) * x, 0.0, 1.0);
        }
      },
      sched);
}

// Field on site i = 1..N for finite-N diagonalization.
inline double site_gamma(const FieldSchedule& sched, int i, int n, double tau, double s) {
  detail::require(n >= 1 && i >= 1 && i <= n, "site index out of range");
  if (const auto* d = std::get_if<schedule::StepDiagonal>(&sched)) {
    (void)d;
    return step_diagonal_site(i, n, tau);
  }
  return gamma_at(sched, double(i) / n, tau, s);
}

// Gamma(x) decomposed into constant plateaus plus at most one linear ramp.
struct FieldProfile {
  struct Plateau {
    double weight;
    double gamma;
  };
  struct Ramp {
    double x0, x1;  // x-interval
    double g0, g1;  // Gamma at x0 and x1
  };
  std::vector<Plateau> plateaus;
  std::optional<Ramp> ramp;
};

inline FieldProfile field_profile(const FieldSchedule& sched, double tau, double s = 0.0) {
  detail::require(detail::unit(tau), "tau must lie in [0,1]");
  FieldProfile out;
  auto add = [&](double w, double g) {
    if (w <= 0.0) return;
    for (auto& pl : out.plateaus)
      if (pl.gamma == g) {
        pl.weight += w;
        return;
      }
    out.plateaus.push_back({w, g});
  };
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, schedule::Homogeneous>) {
          detail::require(detail::unit(s), "s must lie in [0,1]");
          add(1.0, 1.0 - s);
        } else if constexpr (std::is_same_v<T, schedule::StepIdeal>) {
          add(1.0 - tau, 1.0);
          add(tau, 0.0);
        } else if constexpr (std::is_same_v<T, schedule::StepDiagonal>) {
          // Measure of x that rounds to site i: half-width cells at both ends.
          const int n = v.sites;
          detail::require(n >= 1, "step-diagonal schedule needs a site count >= 1");
          for (int i = 0; i <= n; ++i) {
            const double w = (i == 0 || i == n) ? 0.5 / n : 1.0 / n;
            add(w, step_diagonal_site(i, n, tau));
          }
        } else if constexpr (std::is_same_v<T, schedule::ResidualStep>) {
          add(1.0 - tau, 1.0);
          add(tau, v.gamma);
        } else {
          const double a = v.a;
          if (a == 1.0) {
            add(1.0, 1.0 - tau);
            return;
          }
          const double xa = std::clamp((a * (1.0 - tau) - 1.0) / (a - 1.0), 0.0, 1.0);
          const double xb = std::clamp(a * (1.0 - tau) / (a - 1.0), 0.0, 1.0);
          add(xa, 1.0);
          add(1.0 - xb, 0.0);
          if (xb > xa) {
            auto g = [&](double x) {
              return std::clamp(a * (1.0 - tau) - (a - 1.0) * x, 0.0, 1.0);
            };
            out.ramp = FieldProfile::Ramp{xa, xb, g(xa), g(xb)};
          }
        }
      },
      sched);
  return out;
}

// x positions where Gamma(x) has a kink or jump, including 0 and 1.
inline std::vector<double> breakpoints(const FieldSchedule& sched, double tau) {
  std::vector<double> b{0.0, 1.0};
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, schedule::StepIdeal> ||
                      std::is_same_v<T, schedule::ResidualStep>) {
          b.push_back(1.0 - tau);
        } else if constexpr (std::is_same_v<T, schedule::StepDiagonal>) {
          for (int i = 0; i < v.sites; ++i) b.push_back((i + 0.5) / v.sites);
        } else if constexpr (std::is_same_v<T, schedule::FiniteSlope>) {
          if (v.a > 1.0) {
            b.push_back(std::clamp((v.a * (1.0 - tau) - 1.0) / (v.a - 1.0), 0.0, 1.0));
            b.push_back(std::clamp(v.a * (1.0 - tau) / (v.a - 1.0), 0.0, 1.0));
          }
        }
      },
      sched);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

// ---------------------------------------------------------------------------
// Annealing paths tau(s).

namespace path {
struct TauEqualsS {};
struct TauPower {
  double c = 1.0;  // tau = s^c
};
struct Ramp {
  double a = 0.0;  // tau = 0 for s < a, (s - a)/(1 - a) beyond
};
struct HomogeneousAxis {};
struct Waypoints {
  std::vector<std::pair<double, double>> points;  // (s, tau), piecewise linear
};
}  // namespace path

using PathSpec =
    std::variant<path::TauEqualsS, path::TauPower, path::Ramp, path::HomogeneousAxis, path::Waypoints>;

inline void validate(const PathSpec& ps) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, path::TauPower>) {
          detail::require(v.c > 0.0 && std::isfinite(v.c), "path exponent must be > 0");
        } else if constexpr (std::is_same_v<T, path::Ramp>) {
          detail::require(v.a >= 0.0 && v.a < 1.0, "ramp parameter must lie in [0,1)");
        } else if constexpr (std::is_same_v<T, path::Waypoints>) {
          const auto& p = v.points;
          detail::require(p.size() >= 2, "waypoint path needs at least two points");
          detail::require(p.front() == std::pair{0.0, 0.0}, "waypoint path must start at (0,0)");
          detail::require(p.back() == std::pair{1.0, 1.0}, "waypoint path must end at (1,1)");
          for (std::size_t k = 1; k < p.size(); ++k) {
            detail::require(p[k].first > p[k - 1].first, "waypoint s must increase");
            detail::require(p[k].second >= p[k - 1].second, "waypoint tau must not decrease");
          }
        }
      },
      ps);
}

inline double tau_on_path(const PathSpec& ps, double s) {
  detail::require(detail::unit(s), "s must lie in [0,1]");
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, path::TauEqualsS>) {
          return s;
        } else if constexpr (std::is_same_v<T, path::TauPower>) {
          return std::pow(s, v.c);
        } else if constexpr (std::is_same_v<T, path::Ramp>) {
          return s < v.a ? 0.0 : (s - v.a) / (1.0 - v.a);
        } else if constexpr (std::is_same_v<T, path::HomogeneousAxis>) {
          return 0.0;
        } else {
          const auto& p = v.points;
          auto it = std::upper_bound(p.begin(), p.end(), s,
                                     [](double x, const auto& q) { return x < q.first; });
          if (it == p.end()) return p.back().second;
          if (it == p.begin()) return p.front().second;
          const auto& hi = *it;
          const auto& lo = *(it - 1);
          const double t = (s - lo.first) / (hi.first - lo.first);
          return lo.second + t * (hi.second - lo.second);
        }
      },
      ps);
}

// ---------------------------------------------------------------------------
// Longitudinal random fields.

namespace disorder {
struct None {};
struct Bimodal {
  double h0 = 0.0;
};
struct Gaussian {
  double sigma = 0.0;
};
}  // namespace disorder

struct DisorderSpec {
  std::variant<disorder::None, disorder::Bimodal, disorder::Gaussian> kind{};
  int quadrature_order = 64;

  bool none() const { return std::holds_alternative<disorder::None>(kind); }
};

inline void validate(const DisorderSpec& d) {
  detail::require(d.quadrature_order >= 1, "quadrature order must be positive");
  if (const auto* b = std::get_if<disorder::Bimodal>(&d.kind))
    detail::require(b->h0 >= 0.0 && std::isfinite(b->h0), "bimodal h0 must be >= 0");
  if (const auto* g = std::get_if<disorder::Gaussian>(&d.kind))
    detail::require(g->sigma >= 0.0 && std::isfinite(g->sigma), "gaussian sigma must be >= 0");
}

struct WeightedField {
  double h;
  double weight;
};

// Gauss-Hermite rule for the standard normal density.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

inline GaussRule build_gauss_hermite(int n) {
  // Jacobi matrix of the probabilists' Hermite polynomials, then Newton
  // polish on the orthonormal recurrence and Christoffel weights.
  GaussRule rule;
  if (n == 1) {
    rule.nodes = {0.0};
    rule.weights = {1.0};
    return rule;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(double(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  auto orthonormal = [n](double x, double& psi_n, double& psi_nm1, double& sum_sq) {
    double prev = 0.0, cur = 1.0;
    sum_sq = 1.0;
    for (int k = 1; k <= n; ++k) {
      const double next = (x * cur - std::sqrt(double(k - 1)) * prev) / std::sqrt(double(k));
      prev = cur;
      cur = next;
      if (k < n) sum_sq += cur * cur;
    }
    psi_n = cur;
    psi_nm1 = prev;
  };
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()(i);
    double pn, pnm1, ss;
    for (int it = 0; it < 8; ++it) {
      orthonormal(x, pn, pnm1, ss);
      const double dx = pn / (std::sqrt(double(n)) * pnm1);
      x -= dx;
      if (std::fabs(dx) <= 1e-16 * std::max(1.0, std::fabs(x))) break;
    }
    orthonormal(x, pn, pnm1, ss);
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / ss;
  }
  // Symmetrize: nodes come in +/- pairs.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

}  // namespace detail

inline const GaussRule& gauss_hermite(int order) {
  detail::require(order >= 1, "quadrature order must be positive");
  static std::mutex mtx;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, detail::build_gauss_hermite(order)).first;
  return it->second;
}

// Nodes (h, weight) with weights summing to 1.
inline std::vector<WeightedField> disorder_nodes(const DisorderSpec& d) {
  validate(d);
  return std::visit(
      [&](const auto& v) -> std::vector<WeightedField> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, disorder::None>) {
          return {{0.0, 1.0}};
        } else if constexpr (std::is_same_v<T, disorder::Bimodal>) {
          if (v.h0 == 0.0) return {{0.0, 1.0}};
          return {{v.h0, 0.5}, {-v.h0, 0.5}};
        } else {
          if (v.sigma == 0.0) return {{0.0, 1.0}};
          const GaussRule& r = gauss_hermite(d.quadrature_order);
          std::vector<WeightedField> out(r.nodes.size());
          for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = {v.sigma * r.nodes[i], r.weights[i]};
          return out;
        }
      },
      d.kind);
}

// Gaussian average of g(h) for a g that is smooth except at h = kink, with an
// optional boundary layer of half-width `layer` around it (thermal rounding).
// Gauss-Hermite converges slowly across such kinks (|H + h| at zero
// temperature), which would put spurious wiggles into f(m); here z = h / sigma
// runs over [-9, 9] in panels split at the kink, each panel (at most 9 wide)
// with a fixed 30-point Gauss-Legendre rule.
template <class G>
double gaussian_average_split(double sigma, G&& g, double kink, double layer = 0.0) {
  if (sigma == 0.0) return g(0.0);
  constexpr double zmax = 9.0;
  const double inv = 1.0 / std::sqrt(2.0 * 3.14159265358979323846);
  auto f = [&](double z) { return inv * std::exp(-0.5 * z * z) * g(sigma * z); };
  const double zk = kink / sigma;
  const double w = std::min(layer / sigma, zmax);
  double cuts[5] = {zk - w, zk, zk + w, zmax, zmax};
  double total = 0.0;
  double lo = -zmax;
  for (double c : cuts) {
    c = std::clamp(c, -zmax, zmax);
    if (c > lo) {
      // Panels wider than half the range lose digits on the Gaussian tails.
      const int pieces = static_cast<int>(std::ceil((c - lo) / zmax - 1e-12));
      for (int i = 0; i < pieces; ++i)
        total += boost::math::quadrature::gauss<double, 30>::integrate(f, lo + (c - lo) * i / pieces,
                                                                       lo + (c - lo) * (i + 1) / pieces);
      lo = c;
    }
  }
  if (!std::isfinite(total)) throw numerical_error("non-finite integrand in disorder average");
  return total;
}

// Gauss-Hermite (or exact two-point / delta) average of g over the fields.
template <class G>
double disorder_average(const DisorderSpec& d, G&& g) {
  if (const auto* b = std::get_if<disorder::Bimodal>(&d.kind)) {
    validate(d);
    const double a = g(b->h0);
    const double c = g(-b->h0);
    if (!std::isfinite(a) || !std::isfinite(c))
      throw numerical_error("non-finite integrand in disorder average");
    return 0.5 * (a + c);
  }
  double sum = 0.0;
  for (const auto& [h, w] : disorder_nodes(d)) {
    const double v = g(h);
    if (!std::isfinite(v)) throw numerical_error("non-finite integrand in disorder average");
    sum += w * v;
  }
  return sum;
}

// The same distribution with every field multiplied by `factor` >= 0.
inline DisorderSpec scaled(const DisorderSpec& d, double factor) {
  detail::require(factor >= 0.0, "disorder scale factor must be >= 0");
  DisorderSpec out = d;
  if (auto* b = std::get_if<disorder::Bimodal>(&out.kind)) b->h0 *= factor;
  if (auto* g = std::get_if<disorder::Gaussian>(&out.kind)) g->sigma *= factor;
  return out;
}

// Like disorder_average, but for g smooth except at h = kink: Gaussian
// disorder goes through the split adaptive rule instead of Gauss-Hermite.
template <class G>
double disorder_average_kinked(const DisorderSpec& d, G&& g, double kink, double layer = 0.0) {
  if (const auto* gs = std::get_if<disorder::Gaussian>(&d.kind)) {
    validate(d);
    return gaussian_average_split(gs->sigma, g, kink, layer);
  }
  return disorder_average(d, g);
}

}  // namespace pspin
