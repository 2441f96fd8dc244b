#pragma once

// Finite-N spectrum in the collective-spin basis. Sites sharing a field
// amplitude form one block restricted to its maximal total spin S_b = n_b/2.
// Blocks with zero field conserve their S^z, so the problem splits into
// independent sectors labelled by the frozen magnetization; each sector is
// solved with a matrix-free thick-restart Lanczos iteration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "pspin/errors.hpp"
#include "pspin/model.hpp"

namespace pspin {

struct Block {
  int size = 0;
  double field = 0.0;
};

struct BlockSystem {
  std::vector<Block> blocks;
  int p = 3;

  int total_sites() const {
    int n = 0;
    for (const auto& b : blocks) n += b.size;
    return n;
  }
  // Product of (n_b + 1); saturates at SIZE_MAX.
  std::size_t dimension() const {
    std::size_t d = 1;
    for (const auto& b : blocks) {
      const std::size_t k = static_cast<std::size_t>(b.size) + 1;
      if (d > std::numeric_limits<std::size_t>::max() / k) return std::numeric_limits<std::size_t>::max();
      d *= k;
    }
    return d;
  }
};

struct SpectrumResult {
  double e0 = 0.0;
  double e1 = 0.0;
  double gap = 0.0;
  int iterations = 0;  // operator applications over all sectors
  double residual_norm = 0.0;
  std::size_t dimension = 0;
  int sectors_solved = 0;
};

struct DiagOptions {
  std::size_t dimension_cap = 1'000'000;
  int krylov_dim = 300;      // basis size before a thick restart
  int max_restarts = 400;
  double tolerance = 1e-11;  // residual, relative to max(1, |e|)
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

// Per-site fields Gamma_i, i = 1..N.
inline std::vector<double> site_fields(int n, const FieldSchedule& sched, double s, double tau) {
  if (n < 1) throw domain_error("N must be >= 1");
  validate(sched);
  std::vector<double> g(n);
  for (int i = 1; i <= n; ++i) {
    if (std::holds_alternative<schedule::StepIdeal>(sched) ||
        std::holds_alternative<schedule::ResidualStep>(sched)) {
      // Integer comparison against N(1 - tau) avoids x = i/N rounding.
      const bool on = i <= n * (1.0 - tau) + 1e-9;
      const auto* r = std::get_if<schedule::ResidualStep>(&sched);
      g[i - 1] = on ? 1.0 : (r ? r->gamma : 0.0);
    } else {
      g[i - 1] = site_gamma(sched, i, n, tau, s);
    }
  }
  return g;
}

inline BlockSystem build_blocks(int n, const FieldSchedule& sched, double s, double tau, int p = 3,
                                std::size_t cap = 1'000'000) {
  if (p < 3) throw domain_error("p must be an integer >= 3");
  if (!(s >= 0.0 && s <= 1.0) || !(tau >= 0.0 && tau <= 1.0))
    throw domain_error("(s, tau) must lie in [0,1]^2");
  BlockSystem sys;
  sys.p = p;
  for (double g : site_fields(n, sched, s, tau)) {
    auto it = std::find_if(sys.blocks.begin(), sys.blocks.end(), [g](const Block& b) { return b.field == g; });
    if (it == sys.blocks.end())
      sys.blocks.push_back({1, g});
    else
      ++it->size;
  }
  const std::size_t dim = sys.dimension();
  if (dim > cap) throw capacity_error("block Hilbert dimension exceeds cap", dim, cap);
  return sys;
}

namespace detail {

// Deterministic uniform(-1, 1) stream.
class UnitStream {
 public:
  explicit UnitStream(std::uint64_t seed) : state_(seed) {}
  double next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return 2.0 * (double(z >> 11) * 0x1.0p-53) - 1.0;
  }

 private:
  std::uint64_t state_;
};

// Free-block part of one sector: -sum_b Gamma_b (S_b^+ + S_b^-) plus a
// diagonal that depends on the total magnetization.
struct SectorOperator {
  std::vector<int> sizes;                       // free blocks
  std::vector<std::size_t> strides;
  std::vector<std::vector<double>> ladder;      // ladder[b][k]: <k+1| . |k>
  std::vector<double> diag;
  std::size_t dim = 1;

  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    y = Eigen::Map<const Eigen::VectorXd>(diag.data(), static_cast<Eigen::Index>(dim)).cwiseProduct(x);
    for (std::size_t b = 0; b < sizes.size(); ++b) {
      const std::size_t st = strides[b];
      const int n = sizes[b];
      const auto& lad = ladder[b];
      for (std::size_t i = 0; i < dim; ++i) {
        const int k = static_cast<int>((i / st) % (n + 1));
        if (k < n) {
          const double c = lad[k];
          y[i] += c * x[i + st];
          y[i + st] += c * x[i];
        }
      }
    }
  }
};

struct LanczosOutcome {
  std::vector<double> values;  // ascending, at most `want`
  Eigen::MatrixXd vectors;     // matching Ritz vectors
  double residual = 0.0;       // largest explicit residual of returned pairs
  int applications = 0;
  bool exhausted = false;      // Krylov space reached the full dimension
};

// Lowest `want` eigenpairs of op, optionally in the complement of `deflate`.
inline LanczosOutcome lanczos_lowest(const SectorOperator& op, int want, const DiagOptions& opt,
                                     std::uint64_t seed, const Eigen::MatrixXd* deflate = nullptr) {
  const auto dim = static_cast<Eigen::Index>(op.dim);
  const Eigen::Index avail = dim - (deflate ? deflate->cols() : 0);
  LanczosOutcome out;
  if (avail <= 0) return out;
  want = static_cast<int>(std::min<Eigen::Index>(want, avail));
  const Eigen::Index maxb = std::min<Eigen::Index>(std::max(opt.krylov_dim, want + 8), avail);

  UnitStream rng(seed);
  auto project_out = [&](Eigen::VectorXd& v, const Eigen::MatrixXd& V, Eigen::Index k) {
    for (int pass = 0; pass < 2; ++pass) {
      if (k > 0) v -= V.leftCols(k) * (V.leftCols(k).transpose() * v);
      if (deflate) v -= *deflate * (deflate->transpose() * v);
    }
  };
  auto fresh = [&](const Eigen::MatrixXd& V, Eigen::Index k) -> std::optional<Eigen::VectorXd> {
    for (int attempt = 0; attempt < 4; ++attempt) {
      Eigen::VectorXd v(dim);
      for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.next();
      project_out(v, V, k);
      const double nv = v.norm();
      if (nv > 1e-8) return Eigen::VectorXd(v / nv);
    }
    return std::nullopt;
  };

  Eigen::MatrixXd V(dim, maxb);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(maxb, maxb);
  Eigen::VectorXd w(dim);
  Eigen::Index k = 0;
  V.col(0) = *fresh(V, 0);
  k = 1;
  op.apply(V.col(0), w);
  ++out.applications;

  const int max_apps = opt.max_restarts * static_cast<int>(maxb) + static_cast<int>(maxb);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  for (;;) {
    // Orthogonalize the new image against the basis; the projections fill T.
    Eigen::VectorXd h = V.leftCols(k).transpose() * w;
    w -= V.leftCols(k) * h;
    const Eigen::VectorXd h2 = V.leftCols(k).transpose() * w;
    w -= V.leftCols(k) * h2;
    h += h2;
    if (deflate) {
      w -= *deflate * (deflate->transpose() * w);
    }
    T.block(0, k - 1, k, 1) = h;
    T.block(k - 1, 0, 1, k) = h.transpose();
    const double beta = w.norm();

    const bool full = k == avail;
    const bool at_limit = k == maxb;
    const bool check = full || at_limit || k % 10 == 0 || beta < 1e-10;
    if (check && k >= want) {
      es.compute(T.topLeftCorner(k, k));
      bool converged = true;
      for (int i = 0; i < want; ++i) {
        const double est = beta * std::fabs(es.eigenvectors()(k - 1, i));
        if (est > 0.1 * opt.tolerance * std::max(1.0, std::fabs(es.eigenvalues()(i)))) converged = false;
      }
      if (converged || full) {
        out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + want);
        out.vectors = V.leftCols(k) * es.eigenvectors().leftCols(want);
        out.exhausted = full;
        break;
      }
    }
    if (out.applications >= max_apps) {
      es.compute(T.topLeftCorner(k, k));
      throw solver_error("Lanczos did not converge", out.applications,
                         beta * std::fabs(es.eigenvectors()(k - 1, 0)));
    }

    Eigen::VectorXd next;
    if (beta < 1e-10) {
      // Invariant subspace: continue in a fresh orthogonal direction.
      auto f = fresh(V, k);
      if (!f) {
        es.compute(T.topLeftCorner(k, k));
        out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + std::min<Eigen::Index>(want, k));
        out.vectors = V.leftCols(k) * es.eigenvectors().leftCols(out.values.size());
        out.exhausted = true;
        break;
      }
      next = *f;
    } else {
      next = w / beta;
    }

    if (at_limit) {
      // Thick restart: keep the lowest Ritz vectors, then append `next`.
      es.compute(T.topLeftCorner(k, k));
      const Eigen::Index keep = std::min<Eigen::Index>(k - 1, std::max<Eigen::Index>(want + 4, maxb / 2));
      const Eigen::MatrixXd Y = es.eigenvectors().leftCols(keep);
      const Eigen::MatrixXd Vk = V.leftCols(k) * Y;
      V.leftCols(keep) = Vk;
      T.setZero();
      for (Eigen::Index i = 0; i < keep; ++i) T(i, i) = es.eigenvalues()(i);
      k = keep;
      project_out(next, V, k);
      next.normalize();
    }
    V.col(k) = next;
    ++k;
    op.apply(V.col(k - 1), w);
    ++out.applications;
  }
  // Explicit residuals of the returned pairs.
  Eigen::VectorXd y(dim);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    Eigen::VectorXd x = out.vectors.col(static_cast<Eigen::Index>(i));
    x.normalize();
    out.vectors.col(static_cast<Eigen::Index>(i)) = x;
    op.apply(x, y);
    ++out.applications;
    out.residual = std::max(out.residual, (y - out.values[i] * x).norm());
  }
  return out;
}

}  // namespace detail

inline SpectrumResult lowest_two(const BlockSystem& sys, double s, const DiagOptions& opt = {}) {
  if (sys.blocks.empty()) throw domain_error("block system is empty");
  const std::size_t dim = sys.dimension();
  if (dim > opt.dimension_cap) throw capacity_error("block Hilbert dimension exceeds cap", dim, opt.dimension_cap);
  const int n_total = sys.total_sites();
  const int p = sys.p;

  std::vector<const Block*> free_blocks, frozen_blocks;
  for (const auto& b : sys.blocks) (b.field != 0.0 ? free_blocks : frozen_blocks).push_back(&b);

  // Frozen magnetizations (in units of single spin flips) and their counts.
  std::map<int, std::size_t> frozen{{0, 1}};
  for (const Block* b : frozen_blocks) {
    std::map<int, std::size_t> next;
    for (const auto& [m, c] : frozen)
      for (int k = 0; k <= b->size; ++k) next[m + 2 * k - b->size] += c;
    frozen.swap(next);
  }

  detail::SectorOperator base;
  for (const Block* b : free_blocks) {
    base.sizes.push_back(b->size);
    base.strides.push_back(base.dim);
    const double S = 0.5 * b->size;
    std::vector<double> lad(b->size);
    for (int k = 0; k < b->size; ++k) {
      const double m = k - S;
      lad[k] = -b->field * std::sqrt(S * (S + 1.0) - m * (m + 1.0));
    }
    base.ladder.push_back(std::move(lad));
    base.dim *= static_cast<std::size_t>(b->size) + 1;
  }
  std::vector<int> free_mag(base.dim, 0);
  for (std::size_t i = 0; i < base.dim; ++i)
    for (std::size_t b = 0; b < base.sizes.size(); ++b) {
      const int k = static_cast<int>((i / base.strides[b]) % (base.sizes[b] + 1));
      free_mag[i] += 2 * k - base.sizes[b];
    }
  auto diag_for = [&](int mf) {
    std::vector<double> d(base.dim);
    for (std::size_t i = 0; i < base.dim; ++i) {
      const double x = double(free_mag[i] + mf) / n_total;
      d[i] = -s * n_total * std::pow(x, p);
    }
    return d;
  };

  // Most polarized sectors first; Weyl's inequality against an already solved
  // sector bounds the rest from below and lets them be skipped.
  std::vector<std::pair<int, std::size_t>> order(frozen.begin(), frozen.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (std::abs(a.first) != std::abs(b.first)) return std::abs(a.first) > std::abs(b.first);
    return a.first > b.first;
  });

  struct Solved {
    std::vector<double> diag;
    double e0;
  };
  std::vector<Solved> solved;
  std::vector<double> levels;  // lowest values found so far, with multiplicity
  SpectrumResult res;
  res.dimension = dim;
  auto second_level = [&]() {
    return levels.size() >= 2 ? levels[1] : std::numeric_limits<double>::infinity();
  };

  std::uint64_t seed = opt.seed;
  for (const auto& [mf, count] : order) {
    std::vector<double> d = diag_for(mf);
    double bound = -std::numeric_limits<double>::infinity();
    for (const Solved& ref : solved) {
      double shift = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < d.size(); ++i) shift = std::min(shift, d[i] - ref.diag[i]);
      bound = std::max(bound, ref.e0 + shift);
    }
    const double e1_now = second_level();
    if (bound > e1_now + 1e-12 * std::max(1.0, std::fabs(e1_now))) continue;

    detail::SectorOperator op = base;
    op.diag = d;
    const int want = base.dim >= 2 ? 2 : 1;
    auto main = detail::lanczos_lowest(op, want, opt, seed++);
    res.iterations += main.applications;
    std::vector<double> vals = main.values;
    double resid = main.residual;
    if (!main.exhausted && base.dim > 2) {
      // A second pass orthogonal to the ground vector catches a degenerate
      // partner that a single Krylov sequence can miss.
      const Eigen::MatrixXd g0 = main.vectors.leftCols(1);
      auto second = detail::lanczos_lowest(op, 1, opt, seed++, &g0);
      res.iterations += second.applications;
      if (!second.values.empty() && second.values[0] < vals.back()) vals.back() = second.values[0];
      resid = std::max(resid, second.residual);
    }
    res.residual_norm = std::max(res.residual_norm, resid);
    ++res.sectors_solved;
    solved.push_back({std::move(d), vals.front()});
    for (double v : vals)
      for (std::size_t c = 0; c < std::min<std::size_t>(count, 2); ++c) levels.push_back(v);
    std::sort(levels.begin(), levels.end());
    if (levels.size() > 2) levels.resize(2);
  }
  res.e0 = levels.at(0);
  res.e1 = levels.size() > 1 ? levels[1] : levels[0];
  res.gap = res.e1 - res.e0;
  const double limit = 10.0 * opt.tolerance * std::max(1.0, std::fabs(res.e0));
  if (res.residual_norm > limit)
    throw solver_error("eigenpair residual above tolerance", res.iterations, res.residual_norm);
  return res;
}

// ---------------------------------------------------------------------------
// Gap along an annealing path at finite N.

struct GapSample {
  double s = 0.0;
  double tau = 0.0;
  double gap = 0.0;
};

struct GapCurve {
  std::vector<GapSample> samples;  // ordered by s
  GapSample minimum;               // refined between grid points
};

inline double finite_gap(int n, double s, double tau, const FieldSchedule& sched, int p,
                         const DiagOptions& opt = {}) {
  return lowest_two(build_blocks(n, sched, s, tau, p, opt.dimension_cap), s, opt).gap;
}

// s values where tau(s) * N crosses an integer, i.e. where one more site is
// switched off.
inline std::vector<double> turn_off_points(int n, const PathSpec& ps) {
  std::vector<double> out;
  for (int k = 1; k < n; ++k) {
    const double target = double(k) / n;
    if (tau_on_path(ps, 1.0) < target) break;
    double lo = 0.0, hi = 1.0;
    if (tau_on_path(ps, lo) >= target) continue;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (tau_on_path(ps, mid) < target ? lo : hi) = mid;
    }
    out.push_back(hi);
  }
  return out;
}

inline GapCurve gap_curve(int n, const PathSpec& ps, const FieldSchedule& sched, int p, int resolution,
                          const DiagOptions& opt = {}) {
  if (resolution < 2) throw domain_error("resolution must be >= 2");
  validate(ps);
  std::vector<double> grid;
  for (int k = 0; k < resolution; ++k) grid.push_back(double(k) / (resolution - 1));
  for (double s : turn_off_points(n, ps)) grid.push_back(s);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  GapCurve out;
  for (double s : grid) {
    const double tau = tau_on_path(ps, s);
    out.samples.push_back({s, tau, finite_gap(n, s, tau, sched, p, opt)});
  }
  std::size_t k = 0;
  for (std::size_t i = 1; i < out.samples.size(); ++i)
    if (out.samples[i].gap < out.samples[k].gap) k = i;
  out.minimum = out.samples[k];
  const double a = out.samples[k > 0 ? k - 1 : k].s;
  const double b = out.samples[k + 1 < out.samples.size() ? k + 1 : k].s;
  if (b > a) {
    std::uintmax_t iters = 60;
    auto r = boost::math::tools::brent_find_minima(
        [&](double s) { return finite_gap(n, s, tau_on_path(ps, s), sched, p, opt); }, a, b, 40, iters);
    if (r.second < out.minimum.gap) out.minimum = {r.first, tau_on_path(ps, r.first), r.second};
  }
  return out;
}

}  // namespace pspin
