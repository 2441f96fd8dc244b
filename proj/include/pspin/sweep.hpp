#pragma once

// Parameter-plane sweeps: first-order line tracing with endpoint location,
// path scans of semiclassical and mean-field quantities, and finite-size
// minimal-gap scaling fits.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pspin/classical.hpp"
#include "pspin/exactdiag.hpp"
#include "pspin/meanfield.hpp"
#include "pspin/model.hpp"
#include "pspin/parallel.hpp"
#include "pspin/semiclassical.hpp"

namespace pspin {

enum class PlaneKind { s_tau, s_temperature };
enum class ModelKind { quantum, svmc };

// A 2D slice: s is always the fast coordinate; the slow one is tau at fixed
// temperature, or temperature with tau following a path.
struct Plane {
  PlaneKind kind = PlaneKind::s_tau;
  int p = 3;
  double temperature = 0.0;
  PathSpec path = path::TauEqualsS{};
  FieldSchedule schedule = schedule::StepIdeal{};
  DisorderSpec disorder{};
  ModelKind model = ModelKind::quantum;
  double slow_min = 0.0;
  double slow_max = 1.0;
  double fast_min = 1e-3;  // s = 0 is a flat landscape, kept off the sweep
  double fast_max = 1.0;
};

struct SweepOptions {
  int slow_points = 401;
  DetectOptions detect{};
  double endpoint_threshold = 1e-2;  // jump size taken as the end of a line
  double endpoint_width = 1e-6;      // final slow-coordinate bracket
  double match_distance = 0.05;      // continuity window in s
  int threads = 1;
};

struct TransitionLine {
  std::vector<TransitionPoint> points;  // ordered by the slow coordinate
  PlaneKind plane = PlaneKind::s_tau;
  std::optional<TransitionPoint> endpoint;  // critical endpoint, if the jump fades out
};

struct LineSet {
  std::vector<TransitionLine> lines;
  bool disconnected() const { return lines.size() > 1; }
};

inline double slow_coordinate(const TransitionPoint& tp, PlaneKind kind) {
  return kind == PlaneKind::s_tau ? tp.location.tau : tp.location.temperature;
}

inline void validate(const Plane& pl) {
  detail::require(pl.p >= 3, "p must be an integer >= 3");
  validate(pl.schedule);
  validate(pl.disorder);
  validate(pl.path);
  detail::require(pl.slow_min <= pl.slow_max, "slow range is empty");
  detail::require(pl.fast_min < pl.fast_max && pl.fast_min >= 0.0 && pl.fast_max <= 1.0,
                  "s range must be a nonempty part of [0,1]");
  if (pl.kind == PlaneKind::s_tau) {
    detail::require(pl.slow_min >= 0.0 && pl.slow_max <= 1.0, "tau range must lie in [0,1]");
    detail::require(pl.temperature >= 0.0, "temperature must be >= 0");
  } else {
    detail::require(pl.slow_min >= 0.0, "temperature range must be >= 0");
  }
  if (pl.model == ModelKind::svmc)
    detail::require(pl.disorder.none(), "the rotor model is implemented without disorder");
}

// Jumps on the fast segment s in [s0, s1] at a fixed slow coordinate.
inline std::vector<TransitionPoint> detect_at(const Plane& pl, double slow, double s0, double s1,
                                              const DetectOptions& opt) {
  Segment seg;
  seg.lambda0 = s0;
  seg.lambda1 = s1;
  if (pl.kind == PlaneKind::s_tau) {
    const double T = pl.temperature;
    seg.at = [slow, T](double s) { return Coordinates{s, slow, T}; };
  } else {
    const PathSpec ps = pl.path;
    seg.at = [ps, slow](double s) { return Coordinates{s, tau_on_path(ps, s), slow}; };
  }
  const ModelSpec tmpl{pl.p, 0.0, 0.0, 0.0};
  if (pl.model == ModelKind::svmc) return detect_svmc_transitions(seg, tmpl, pl.schedule, opt);
  return detect_transitions(seg, tmpl, pl.schedule, pl.disorder, opt);
}

namespace detail {

// Bisects the slow coordinate between `inside` (line present near s_ref) and
// `outside`; returns the last point with a jump of at least `threshold`.
inline TransitionPoint chase_end(const Plane& pl, const SweepOptions& opt, TransitionPoint last, double inside,
                                 double outside) {
  DetectOptions local = opt.detect;
  local.samples = std::max(41, opt.detect.samples / 5);
  while (std::fabs(outside - inside) > opt.endpoint_width) {
    const double mid = 0.5 * (inside + outside);
    const double s_ref = last.location.s;
    const double s0 = std::max(pl.fast_min, s_ref - opt.match_distance);
    const double s1 = std::min(pl.fast_max, s_ref + opt.match_distance);
    std::optional<TransitionPoint> near;
    for (const auto& tp : detect_at(pl, mid, s0, s1, local)) {
      if (tp.delta_m < opt.endpoint_threshold) continue;
      if (!near || std::fabs(tp.location.s - s_ref) < std::fabs(near->location.s - s_ref)) near = tp;
    }
    if (near) {
      inside = mid;
      last = *near;
    } else {
      outside = mid;
    }
  }
  return last;
}

}  // namespace detail

inline LineSet trace_line(const Plane& pl, const SweepOptions& opt = {}) {
  validate(pl);
  if (opt.slow_points < 2) throw domain_error("sweep grid needs at least two slow points");
  const int n = opt.slow_points;
  std::vector<double> slow(n);
  for (int j = 0; j < n; ++j)
    slow[j] = j == n - 1 ? pl.slow_max : pl.slow_min + (pl.slow_max - pl.slow_min) * j / (n - 1);

  std::vector<std::vector<TransitionPoint>> found(n);
  parallel_for(static_cast<std::size_t>(n), opt.threads,
               [&](std::size_t j) { found[j] = detect_at(pl, slow[j], pl.fast_min, pl.fast_max, opt.detect); });

  // Continuity matching, one slow step at a time.
  struct Poly {
    std::vector<TransitionPoint> pts;
    std::vector<int> slots;  // slow index of each point
    int first = 0;
    int last = 0;
  };
  std::vector<Poly> polys;
  std::vector<int> active;
  for (int j = 0; j < n; ++j) {
    auto& pts = found[j];
    std::vector<bool> used(pts.size(), false);
    std::vector<int> still;
    struct Pair {
      double cost;
      int poly;
      std::size_t pt;
    };
    std::vector<Pair> pairs;
    for (int a : active) {
      // Linear extrapolation in s keeps nearly-flat stretches of a line together.
      const Poly& py = polys[a];
      const auto& prev = py.pts.back();
      double pred = prev.location.s;
      if (py.pts.size() >= 2) {
        const auto& pp = py.pts[py.pts.size() - 2];
        const int gap = py.slots.back() - py.slots[py.slots.size() - 2];
        pred += (prev.location.s - pp.location.s) * double(j - py.last) / gap;
      }
      const double window = opt.match_distance + std::fabs(pred - prev.location.s);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const double ds = std::fabs(pts[i].location.s - pred);
        if (ds > window) continue;
        pairs.push_back({ds + std::fabs(pts[i].delta_m - prev.delta_m), a, i});
      }
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.cost < y.cost; });
    std::vector<bool> extended(polys.size(), false);
    for (const auto& pr : pairs) {
      if (used[pr.pt] || extended[pr.poly]) continue;
      used[pr.pt] = true;
      extended[pr.poly] = true;
      polys[pr.poly].pts.push_back(pts[pr.pt]);
      polys[pr.poly].slots.push_back(j);
      polys[pr.poly].last = j;
      still.push_back(pr.poly);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (used[i]) continue;
      polys.push_back({{pts[i]}, {j}, j, j});
      still.push_back(static_cast<int>(polys.size()) - 1);
    }
    std::sort(still.begin(), still.end());
    active = still;
  }

  LineSet out;
  out.lines.resize(polys.size());
  parallel_for(polys.size(), opt.threads, [&](std::size_t k) {
    const Poly& py = polys[k];
    TransitionLine line;
    line.plane = pl.kind;
    line.points = py.pts;
    // A jump that fades below the endpoint threshold marks a critical endpoint;
    // otherwise the line left through the s range and the exit point is kept.
    auto try_end = [&](const TransitionPoint& edge, int j_in, int j_out, bool back) {
      if (j_out < 0 || j_out >= n) return;
      const TransitionPoint end = detail::chase_end(pl, opt, edge, slow[j_in], slow[j_out]);
      if (end.delta_m <= 2.0 * opt.endpoint_threshold) {
        if (!line.endpoint) line.endpoint = end;
      } else if (slow_coordinate(end, pl.kind) != slow_coordinate(edge, pl.kind)) {
        if (back)
          line.points.push_back(end);
        else
          line.points.insert(line.points.begin(), end);
      }
    };
    try_end(py.pts.back(), py.last, py.last + 1, true);
    try_end(py.pts.front(), py.first, py.first - 1, false);
    out.lines[k] = std::move(line);
  });
  return out;
}

// (s, delta_m) along a line, ordered by s.
inline std::vector<std::pair<double, double>> delta_m_along_line(const TransitionLine& line) {
  if (line.points.empty()) throw domain_error("transition line is empty");
  std::vector<std::pair<double, double>> out;
  for (const auto& tp : line.points) out.push_back({tp.location.s, tp.delta_m});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

// Whether an (s, tau) polyline crosses or touches the path tau(s).
inline bool intersects(const TransitionLine& line, const PathSpec& ps, double tol = 1e-12) {
  if (line.plane != PlaneKind::s_tau) throw domain_error("path intersection needs an (s, tau) line");
  std::vector<const TransitionPoint*> pts;
  for (const auto& tp : line.points) pts.push_back(&tp);
  if (line.endpoint) pts.push_back(&*line.endpoint);
  double prev = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double g = pts[i]->location.tau - tau_on_path(ps, pts[i]->location.s);
    if (std::fabs(g) <= tol) return true;
    if (i > 0 && (g < 0) != (prev < 0)) return true;
    prev = g;
  }
  return false;
}

inline bool intersects(const LineSet& set, const PathSpec& ps) {
  return std::any_of(set.lines.begin(), set.lines.end(), [&](const auto& l) { return intersects(l, ps); });
}

namespace detail {

inline double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

// Closed-segment intersection in the plane.
inline bool segments_meet(double ax, double ay, double bx, double by, double cx, double cy, double dx, double dy) {
  const double d1 = cross(bx - ax, by - ay, cx - ax, cy - ay);
  const double d2 = cross(bx - ax, by - ay, dx - ax, dy - ay);
  const double d3 = cross(dx - cx, dy - cy, ax - cx, ay - cy);
  const double d4 = cross(dx - cx, dy - cy, bx - cx, by - cy);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  auto on = [](double px, double py, double qx, double qy, double rx, double ry) {
    return std::min(px, qx) <= rx && rx <= std::max(px, qx) && std::min(py, qy) <= ry && ry <= std::max(py, qy);
  };
  if (d1 == 0 && on(ax, ay, bx, by, cx, cy)) return true;
  if (d2 == 0 && on(ax, ay, bx, by, dx, dy)) return true;
  if (d3 == 0 && on(cx, cy, dx, dy, ax, ay)) return true;
  if (d4 == 0 && on(cx, cy, dx, dy, bx, by)) return true;
  return false;
}

}  // namespace detail

// A staircase path from (0,0) to (1,1), nondecreasing in both s and tau, that
// meets no traced line; nothing when every such path is blocked. The s = 0
// edge is excluded beyond the origin: the landscape is flat there, so
// sliding up it would skip every line that runs into the edge.
inline std::optional<std::vector<std::pair<double, double>>> find_monotone_path(const LineSet& set, int grid = 200) {
  if (grid < 1) throw domain_error("path grid must be >= 1");
  std::vector<std::array<double, 4>> segs;
  for (const auto& line : set.lines) {
    if (line.plane != PlaneKind::s_tau) throw domain_error("monotone paths need (s, tau) lines");
    std::vector<std::pair<double, double>> pts;
    for (const auto& tp : line.points) pts.push_back({tp.location.s, tp.location.tau});
    if (line.endpoint) pts.push_back({line.endpoint->location.s, line.endpoint->location.tau});
    // Terminal points that are not critical endpoints sit where the line left
    // the sampled region; close the sliver to the nearest edge.
    auto to_edge = [](std::pair<double, double> q) -> std::optional<std::pair<double, double>> {
      constexpr double near = 1e-2;
      if (q.first < near) return std::pair{0.0, q.second};
      if (q.first > 1.0 - near) return std::pair{1.0, q.second};
      if (q.second < near) return std::pair{q.first, 0.0};
      if (q.second > 1.0 - near) return std::pair{q.first, 1.0};
      return std::nullopt;
    };
    if (auto e = to_edge(pts.front())) pts.insert(pts.begin(), *e);
    if (!line.endpoint)
      if (auto e = to_edge(pts.back())) pts.push_back(*e);
    if (pts.size() == 1) pts.push_back(pts.front());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      segs.push_back({pts[i].first, pts[i].second, pts[i + 1].first, pts[i + 1].second});
  }
  auto blocked = [&](double ax, double ay, double bx, double by) {
    for (const auto& s : segs)
      if (detail::segments_meet(ax, ay, bx, by, s[0], s[1], s[2], s[3])) return true;
    return false;
  };
  const int n = grid;
  const double h = 1.0 / n;
  // reach[i][j]: node (i h, j h) reachable; from[i][j]: 1 = came along s, 2 = along tau.
  std::vector<std::vector<char>> from(n + 1, std::vector<char>(n + 1, 0));
  std::vector<std::vector<bool>> reach(n + 1, std::vector<bool>(n + 1, false));
  reach[0][0] = true;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      if (i == 0 && j == 0) continue;
      if (i > 0 && reach[i - 1][j] && !blocked((i - 1) * h, j * h, i * h, j * h)) {
        reach[i][j] = true;
        from[i][j] = 1;
      } else if (i > 0 && j > 0 && reach[i][j - 1] && !blocked(i * h, (j - 1) * h, i * h, j * h)) {
        reach[i][j] = true;
        from[i][j] = 2;
      }
    }
  if (!reach[n][n]) return std::nullopt;
  std::vector<std::pair<double, double>> pathpts;
  int i = n, j = n;
  pathpts.push_back({1.0, 1.0});
  while (i > 0 || j > 0) {
    if (from[i][j] == 1)
      --i;
    else
      --j;
    pathpts.push_back({i * h, j * h});
  }
  std::reverse(pathpts.begin(), pathpts.end());
  return pathpts;
}

// ---------------------------------------------------------------------------
// Path scans.

enum class Quantity { gap, entropy, magnetization, free_energy };

struct ScanContext {
  int p = 3;
  double temperature = 0.0;
  FieldSchedule schedule = schedule::StepIdeal{};
  DisorderSpec disorder{};
  double u = 0.5;
  int grid = 2001;
};

struct PathSample {
  double s = 0.0;
  double tau = 0.0;
  std::optional<double> value;      // empty where the expansion breaks down
  bool flagged = false;             // breakdown or degenerate branch
  std::optional<double> alternate;  // same quantity on the second degenerate branch
};

inline std::vector<PathSample> path_scan(const PathSpec& ps, Quantity q, int resolution, const ScanContext& ctx = {}) {
  validate(ps);
  if (resolution < 2) throw domain_error("resolution must be >= 2");
  std::vector<PathSample> out;
  for (int k = 0; k < resolution; ++k) {
    PathSample smp;
    smp.s = double(k) / (resolution - 1);
    smp.tau = tau_on_path(ps, smp.s);
    const ModelSpec spec = make_model(ctx.p, smp.s, smp.tau, ctx.temperature);
    switch (q) {
      case Quantity::gap: {
        const auto all = gap_components_all<double>(ctx.p, smp.s, smp.tau);
        const auto mg = min_gap_of<double>(all.front(), smp.tau);
        smp.value = mg.value;
        smp.flagged = mg.breakdown || all.size() > 1;
        if (all.size() > 1) smp.alternate = min_gap_of<double>(all[1], smp.tau).value;
        break;
      }
      case Quantity::entropy: {
        const auto e = entanglement_entropy<double>(ctx.p, smp.s, smp.tau, ctx.u);
        if (!e.divergent) smp.value = e.entropy;
        smp.flagged = e.divergent;
        break;
      }
      case Quantity::magnetization:
      case Quantity::free_energy: {
        const auto ls = landscape_scan(spec, ctx.schedule, ctx.disorder, ctx.grid);
        smp.value = q == Quantity::magnetization ? ls.global().m : ls.global().f;
        break;
      }
    }
    out.push_back(smp);
  }
  return out;
}

// Golden-section minimum of a unimodal-near-minimum function on [a, b],
// continued down to a bracket of `width` (works for cusp-like minima).
template <class F>
std::pair<double, double> golden_minimum(F&& f, double a, double b, double width = 1e-15) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && b - a > width; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

struct PathGapMinimum {
  double s = 0.0;
  double tau = 0.0;
  double delta_a1 = 0.0;
};

// Smallest Delta_a1 along the path: grid search, then golden-section refinement.
inline PathGapMinimum path_gap_minimum(const PathSpec& ps, int p, int resolution = 2001) {
  validate(ps);
  auto a1 = [&](double s) {
    const double tau = tau_on_path(ps, s);
    if (tau >= 1.0) return std::numeric_limits<double>::infinity();
    const auto g = gap_components<double>(p, s, tau);
    return g.delta_a1 ? *g.delta_a1 : 0.0;
  };
  int best = 0;
  double fbest = std::numeric_limits<double>::infinity();
  for (int k = 0; k < resolution; ++k) {
    const double v = a1(double(k) / (resolution - 1));
    if (v < fbest) {
      fbest = v;
      best = k;
    }
  }
  const double lo = double(std::max(best - 1, 0)) / (resolution - 1);
  const double hi = double(std::min(best + 1, resolution - 1)) / (resolution - 1);
  auto [s, v] = golden_minimum(a1, lo, hi);
  if (fbest < v) {
    s = double(best) / (resolution - 1);
    v = fbest;
  }
  return {s, tau_on_path(ps, s), v};
}

// ---------------------------------------------------------------------------
// Minimal-gap scaling with N.

enum class Verdict { polynomial, exponential, marginal };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::polynomial: return "polynomial";
    case Verdict::exponential: return "exponential";
    default: return "marginal";
  }
}

struct FitResult {
  double parameter = 0.0;  // exponent (power law) or rate (exponential)
  double r2 = 0.0;
};

struct ScalingPoint {
  int n = 0;
  double min_gap = 0.0;
  double s_at_min = 0.0;
};

struct ScalingFit {
  std::vector<ScalingPoint> data;
  FitResult power_law;    // gap ~ N^{-parameter}
  FitResult exponential;  // gap ~ exp(-parameter N)
  Verdict verdict = Verdict::marginal;
};

struct ScalingOptions {
  int p = 3;
  int resolution = 400;
  DiagOptions diag{};
  int threads = 1;
};

class scaling_aborted : public std::runtime_error {
 public:
  scaling_aborted(const std::string& what, std::vector<ScalingPoint> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const std::vector<ScalingPoint>& partial() const noexcept { return partial_; }

 private:
  std::vector<ScalingPoint> partial_;
};

namespace detail {
inline FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  const double r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return {-slope, r2};
}
}  // namespace detail

inline ScalingFit fit_scaling(std::vector<ScalingPoint> data) {
  if (data.size() < 3) throw domain_error("scaling fit needs at least three sizes");
  ScalingFit fit;
  fit.data = std::move(data);
  std::vector<double> logn, n, logg;
  for (const auto& d : fit.data) {
    if (!(d.min_gap > 0.0)) throw numerical_error("nonpositive minimal gap in scaling data");
    logn.push_back(std::log(double(d.n)));
    n.push_back(double(d.n));
    logg.push_back(std::log(d.min_gap));
  }
  fit.power_law = detail::linear_fit(logn, logg);
  fit.exponential = detail::linear_fit(n, logg);
  const double diff = fit.power_law.r2 - fit.exponential.r2;
  fit.verdict = std::fabs(diff) < 0.02 ? Verdict::marginal : (diff > 0 ? Verdict::polynomial : Verdict::exponential);
  return fit;
}

inline ScalingFit min_gap_scaling(double a, const std::vector<int>& n_list, const ScalingOptions& opt = {}) {
  validate(PathSpec{path::Ramp{a}});
  if (!std::is_sorted(n_list.begin(), n_list.end())) throw domain_error("N list must be sorted");
  std::vector<ScalingPoint> data(n_list.size());
  std::vector<std::string> failure(n_list.size());
  parallel_for(n_list.size(), opt.threads, [&](std::size_t i) {
    const int n = n_list[i];
    try {
      const auto curve = gap_curve(n, path::Ramp{a}, schedule::StepDiagonal{n}, opt.p, opt.resolution, opt.diag);
      data[i] = {n, curve.minimum.gap, curve.minimum.s};
    } catch (const std::exception& e) {
      failure[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < n_list.size(); ++i)
    if (!failure[i].empty())
      throw scaling_aborted("diagonalization failed at N=" + std::to_string(n_list[i]) + ": " + failure[i],
                            std::vector<ScalingPoint>(data.begin(), data.begin() + static_cast<long>(i)));
  return fit_scaling(std::move(data));
}

}  // namespace pspin
