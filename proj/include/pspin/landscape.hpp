#pragma once

// One-dimensional landscape machinery shared by the quantum mean-field, SA and
// SVMC free energies: dense scan plus bracketed refinement of local minima, and
// detection of jumps of the global minimizer along a one-parameter family.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "pspin/errors.hpp"

namespace pspin {

struct Interval {
  double lo;
  double hi;
};

struct Minimum {
  double m;
  double f;
};

struct Landscape {
  std::vector<Minimum> minima;  // sorted by m
  std::size_t global_index = 0;
  int grid_resolution = 0;

  const Minimum& global() const { return minima.at(global_index); }
};

// A free energy in one order parameter with an analytic derivative.
template <class F>
concept LandscapeFunctional = requires(const F& f, double m) {
  { f.value(m) } -> std::convertible_to<double>;
  { f.slope(m) } -> std::convertible_to<double>;
  { f.domain() } -> std::convertible_to<Interval>;
};

struct ScanOptions {
  int grid = 2001;
  double root_width = 1e-12;   // bracket width for the stationary point
  double tie_tolerance = 1e-12;  // relative, for electing the global minimum
};

namespace detail {

template <class F>
bool is_flat(const F& f) {
  if constexpr (requires { f.flat(); })
    return f.flat();
  else
    return false;
}

// True when a is a strictly better global candidate than b.
inline bool better_minimum(const Minimum& a, const Minimum& b, double tol) {
  const double scale = tol * std::max({1.0, std::fabs(a.f), std::fabs(b.f)});
  if (a.f < b.f - scale) return true;
  if (b.f < a.f - scale) return false;
  if (std::fabs(a.m) != std::fabs(b.m)) return std::fabs(a.m) < std::fabs(b.m);
  return a.m > b.m;
}

inline std::size_t elect_global(const std::vector<Minimum>& mins, double tol) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < mins.size(); ++i)
    if (better_minimum(mins[i], mins[best], tol)) best = i;
  return best;
}

// Stationary point of f in [a, b]; returns nothing when the bracket holds no
// minimum with vanishing slope.
template <LandscapeFunctional F>
std::optional<Minimum> refine_bracket(const F& f, double a, double b, const Interval& dom,
                                      double width) {
  const double ga = f.slope(a);
  const double gb = f.slope(b);
  auto stationary_at = [&](double m, double g) -> std::optional<Minimum> {
    const double fm = f.value(m);
    if (std::fabs(g) <= 1e-12 * std::max(1.0, std::fabs(fm))) return Minimum{m, fm};
    return std::nullopt;
  };
  if (ga < 0.0 && gb > 0.0) {
    std::uintmax_t iters = 200;
    auto tol = [width](double l, double u) { return u - l <= width; };
    auto r = boost::math::tools::toms748_solve([&](double m) { return f.slope(m); }, a, b, ga,
                                               gb, tol, iters);
    const double m = 0.5 * (r.first + r.second);
    return Minimum{m, f.value(m)};
  }
  if (a == dom.lo && ga >= 0.0 && gb >= 0.0)
    if (auto mn = stationary_at(a, ga)) return mn;
  if (b == dom.hi && ga <= 0.0 && gb <= 0.0)
    if (auto mn = stationary_at(b, gb)) return mn;
  // No clean sign change: fall back to derivative-free Brent on the value.
  auto r = boost::math::tools::brent_find_minima([&](double m) { return f.value(m); }, a, b, 52);
  const double m = r.first;
  const double g = f.slope(m);
  if (std::fabs(g) <= 1e-8) return Minimum{m, f.value(m)};
  return std::nullopt;
}

}  // namespace detail

template <LandscapeFunctional F>
Landscape scan_landscape(const F& f, const ScanOptions& opt = {}) {
  if (opt.grid < 101) throw domain_error("landscape grid must have at least 101 points");
  const Interval dom = f.domain();
  Landscape out;
  out.grid_resolution = opt.grid;
  if (dom.hi <= dom.lo || detail::is_flat(f)) {
    const double m = std::clamp(0.0, dom.lo, dom.hi);
    out.minima.push_back({m, f.value(m)});
    return out;
  }
  const int n = opt.grid;
  const double h = (dom.hi - dom.lo) / (n - 1);
  std::vector<double> ms(n), fs(n);
  for (int k = 0; k < n; ++k) {
    ms[k] = k == n - 1 ? dom.hi : dom.lo + k * h;
    fs[k] = f.value(ms[k]);
    if (!std::isfinite(fs[k])) throw numerical_error("non-finite free energy on scan grid");
  }
  std::vector<Minimum> found;
  for (int k = 0; k < n; ++k) {
    const bool left = k == 0 || fs[k] < fs[k - 1];
    const bool right = k == n - 1 || fs[k] <= fs[k + 1];
    if (!left || !right) continue;
    const double a = ms[std::max(k - 1, 0)];
    const double b = ms[std::min(k + 1, n - 1)];
    if (auto mn = detail::refine_bracket(f, a, b, dom, opt.root_width)) found.push_back(*mn);
  }
  if (found.empty()) {
    const auto k = std::min_element(fs.begin(), fs.end()) - fs.begin();
    found.push_back({ms[k], fs[k]});
  }
  std::sort(found.begin(), found.end(), [](auto& x, auto& y) { return x.m < y.m; });
  for (const auto& mn : found) {
    if (!out.minima.empty() && std::fabs(mn.m - out.minima.back().m) <= 1e-9) {
      if (mn.f < out.minima.back().f) out.minima.back() = mn;
      continue;
    }
    out.minima.push_back(mn);
  }
  out.global_index = detail::elect_global(out.minima, opt.tie_tolerance);
  return out;
}

// Local minimum of the landscape nearest to m.
inline const Minimum& minimum_near(const Landscape& l, double m) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < l.minima.size(); ++i)
    if (std::fabs(l.minima[i].m - m) < std::fabs(l.minima[best].m - m)) best = i;
  return l.minima.at(best);
}

// ---------------------------------------------------------------------------
// First-order jumps of the global minimizer along a one-parameter family.

struct Coordinates {
  double s = 0.0;
  double tau = 0.0;
  double temperature = 0.0;
};

struct TransitionPoint {
  Coordinates location;
  double lambda = 0.0;          // family parameter at the degeneracy point
  double delta_m = 0.0;
  double f_at_transition = 0.0;
  std::array<Minimum, 2> branch_pair{};  // sorted by m
  double bracket_width = 0.0;   // final lambda bracket of the bisection
  int multiplicity = 1;         // jumps found on the same segment
};

struct DetectOptions {
  int samples = 201;            // coarse lambda samples per segment
  int grid = 2001;              // landscape grid
  double jump_threshold = 1e-3;
  double degeneracy_tolerance = 1e-9;
  double bisection_width = 1e-8;
};

// Scans lambda in [lam0, lam1]. `family(lambda)` returns a functional,
// `coords(lambda)` its physical coordinates. All jumps, ordered by lambda.
template <class Family, class Coords>
std::vector<TransitionPoint> find_jumps(const Family& family, const Coords& coords, double lam0,
                                        double lam1, const DetectOptions& opt = {}) {
  ScanOptions so;
  so.grid = opt.grid;
  auto global_at = [&](double lam) { return scan_landscape(family(lam), so).global(); };

  const int n = std::max(opt.samples, 2);
  std::vector<double> lam(n);
  std::vector<Minimum> glob(n);
  for (int k = 0; k < n; ++k) {
    lam[k] = k == n - 1 ? lam1 : lam0 + (lam1 - lam0) * k / (n - 1);
    glob[k] = global_at(lam[k]);
  }

  std::vector<TransitionPoint> out;
  for (int k = 0; k + 1 < n; ++k) {
    if (std::fabs(glob[k + 1].m - glob[k].m) <= opt.jump_threshold) continue;
    double lo = lam[k], hi = lam[k + 1];
    Minimum mlo = glob[k], mhi = glob[k + 1];
    // A steep but continuous m*(lambda) shrinks the jump with the bracket;
    // stop as soon as it falls below the threshold.
    while (hi - lo > opt.bisection_width && std::fabs(mhi.m - mlo.m) > opt.jump_threshold) {
      const double mid = 0.5 * (lo + hi);
      const Minimum mm = global_at(mid);
      if (std::fabs(mm.m - mlo.m) >= std::fabs(mhi.m - mm.m)) {
        hi = mid;
        mhi = mm;
      } else {
        lo = mid;
        mlo = mm;
      }
    }
    if (std::fabs(mhi.m - mlo.m) <= opt.jump_threshold) continue;  // continuous crossover

    // Locate the degeneracy point by following both branches.
    auto branches = [&](double l) {
      const Landscape ls = scan_landscape(family(l), so);
      return std::pair{minimum_near(ls, mlo.m), minimum_near(ls, mhi.m)};
    };
    TransitionPoint tp;
    tp.bracket_width = hi - lo;
    auto [alo, blo] = branches(lo);
    auto [ahi, bhi] = branches(hi);
    double dlo = alo.f - blo.f, dhi = ahi.f - bhi.f;
    double lstar = 0.5 * (lo + hi);
    Minimum A = mlo, B = mhi;
    const bool tracked = std::fabs(alo.m - blo.m) > opt.jump_threshold &&
                         std::fabs(ahi.m - bhi.m) > opt.jump_threshold && dlo <= 0.0 &&
                         dhi >= 0.0;
    if (tracked) {
      double a = lo, b = hi;
      for (int it = 0; it < 60; ++it) {
        lstar = (dhi != dlo) ? a + (b - a) * (-dlo) / (dhi - dlo) : 0.5 * (a + b);
        if (!(lstar > a && lstar < b)) lstar = 0.5 * (a + b);
        auto [am, bm] = branches(lstar);
        const double d = am.f - bm.f;
        A = am;
        B = bm;
        if (std::fabs(d) <= opt.degeneracy_tolerance * 1e-3 || b - a <= 1e-15) break;
        if (d < 0.0) {
          a = lstar;
          dlo = d;
        } else {
          b = lstar;
          dhi = d;
        }
      }
    } else {
      const Landscape ls = scan_landscape(family(lstar), so);
      A = minimum_near(ls, mlo.m);
      B = minimum_near(ls, mhi.m);
      if (std::fabs(A.m - B.m) <= opt.jump_threshold) {
        A = mlo;
        B = mhi;
      }
    }
    tp.lambda = lstar;
    tp.location = coords(lstar);
    tp.delta_m = std::fabs(B.m - A.m);
    tp.f_at_transition = std::min(A.f, B.f);
    tp.branch_pair = A.m <= B.m ? std::array{A, B} : std::array{B, A};
    out.push_back(tp);
  }
  for (auto& tp : out) tp.multiplicity = static_cast<int>(out.size());
  return out;
}

}  // namespace pspin
