#pragma once

// Command-line front end: run configuration, JSON config files with
// line-precise errors, the analysis subcommands and deterministic CSV / JSON
// rendering. tools/pspin.cpp is a thin wrapper around main_entry().

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pspin/classical.hpp"
#include "pspin/errors.hpp"
#include "pspin/meanfield.hpp"
#include "pspin/model.hpp"
#include "pspin/semiclassical.hpp"
#include "pspin/sweep.hpp"

namespace pspin::cli {

using nlohmann::json;

// Invalid configuration; `line` is 0 when the problem is not tied to a file line.
class config_error : public domain_error {
 public:
  config_error(const std::string& what, int line = 0) : domain_error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {"phase-diagram", "gap",  "gap-scaling", "delta-m", "entropy",
                                                 "sa",            "svmc", "landscape"};
  return names;
}

struct RunConfig {
  std::string command;
  int p = 3;
  double s = 0.5;
  double tau = 0.0;
  double temperature = 0.0;
  std::string schedule = "step";
  std::string path = "tau-eq-s";
  std::string disorder = "none";
  std::string model = "quantum";  // quantum | svmc
  int grid = 2001;                // landscape scan grid
  int points = 0;                 // samples along the sweep; 0 picks the command default
  int n = 0;                      // finite size for exact diagonalization; 0 = semiclassical
  std::vector<int> n_list = {10, 20, 30, 40, 50, 60, 70};
  double beta0 = 2.0;
  double u = 0.5;
  double jump_threshold = 1e-3;
  double degeneracy_tolerance = 1e-9;
  double bisection_width = 1e-8;
  double endpoint_threshold = 1e-2;
  int quadrature_order = 64;
  std::string out;  // empty or "-" writes to stdout
  std::string format = "csv";
  int threads = 1;
  bool strict = false;

  bool operator==(const RunConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Spec strings.

namespace detail {

inline double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v))
    throw config_error("invalid number '" + text + "' in " + what);
  return v;
}

inline std::pair<std::string, std::optional<std::string>> split_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return {text, std::nullopt};
  return {text.substr(0, colon), text.substr(colon + 1)};
}

inline double required_arg(const std::optional<std::string>& arg, const std::string& spec) {
  if (!arg) throw config_error("'" + spec + "' needs a parameter");
  return parse_number(*arg, "'" + spec + "'");
}

}  // namespace detail

// `n` supplies the site count for a bare "step-diagonal".
inline FieldSchedule parse_schedule(const std::string& text, int n = 0) {
  const auto [name, arg] = detail::split_spec(text);
  FieldSchedule out;
  if (name == "homogeneous" && !arg) {
    out = schedule::Homogeneous{};
  } else if (name == "step" && !arg) {
    out = schedule::StepIdeal{};
  } else if (name == "step-diagonal") {
    int sites = n;
    if (arg) {
      const double v = detail::parse_number(*arg, "'step-diagonal'");
      if (v != std::floor(v)) throw config_error("step-diagonal site count must be an integer");
      sites = static_cast<int>(v);
    }
    if (sites < 1) throw config_error("step-diagonal needs a site count (step-diagonal:N or --n)");
    out = schedule::StepDiagonal{sites};
  } else if (name == "residual") {
    out = schedule::ResidualStep{detail::required_arg(arg, text)};
  } else if (name == "slope") {
    out = schedule::FiniteSlope{detail::required_arg(arg, text)};
  } else {
    throw config_error("unknown schedule '" + text +
                       "' (homogeneous|step|step-diagonal[:N]|residual:<gamma>|slope:<a>)");
  }
  try {
    validate(out);
  } catch (const domain_error& e) {
    throw config_error(e.what());
  }
  return out;
}

// "touching" is the power path through the critical endpoint for order p.
inline PathSpec parse_path(const std::string& text, int p = 3) {
  const auto [name, arg] = detail::split_spec(text);
  PathSpec out;
  if (name == "tau-eq-s" && !arg) {
    out = path::TauEqualsS{};
  } else if (name == "touching" && !arg) {
    out = path::TauPower{touching_exponent<double>(p)};
  } else if (name == "tau-power") {
    out = path::TauPower{detail::required_arg(arg, text)};
  } else if (name == "ramp") {
    out = path::Ramp{detail::required_arg(arg, text)};
  } else if (name == "homogeneous" && !arg) {
    out = path::HomogeneousAxis{};
  } else {
    throw config_error("unknown path '" + text + "' (tau-eq-s|tau-power:<c>|touching|ramp:<a>|homogeneous)");
  }
  try {
    validate(out);
  } catch (const domain_error& e) {
    throw config_error(e.what());
  }
  return out;
}

inline DisorderSpec parse_disorder(const std::string& text, int order = 64) {
  const auto [name, arg] = detail::split_spec(text);
  DisorderSpec out;
  out.quadrature_order = order;
  if (name == "none" && !arg) {
    out.kind = disorder::None{};
  } else if (name == "bimodal") {
    out.kind = disorder::Bimodal{detail::required_arg(arg, text)};
  } else if (name == "gaussian") {
    out.kind = disorder::Gaussian{detail::required_arg(arg, text)};
  } else {
    throw config_error("unknown disorder '" + text + "' (none|bimodal:<h0>|gaussian:<sigma>)");
  }
  try {
    validate(out);
  } catch (const domain_error& e) {
    throw config_error(e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON round trip.

inline json to_json(const RunConfig& c) {
  return json{{"command", c.command},
              {"p", c.p},
              {"s", c.s},
              {"tau", c.tau},
              {"temperature", c.temperature},
              {"schedule", c.schedule},
              {"path", c.path},
              {"disorder", c.disorder},
              {"model", c.model},
              {"grid", c.grid},
              {"points", c.points},
              {"n", c.n},
              {"n_list", c.n_list},
              {"beta0", c.beta0},
              {"u", c.u},
              {"jump_threshold", c.jump_threshold},
              {"degeneracy_tolerance", c.degeneracy_tolerance},
              {"bisection_width", c.bisection_width},
              {"endpoint_threshold", c.endpoint_threshold},
              {"quadrature_order", c.quadrature_order},
              {"out", c.out},
              {"format", c.format},
              {"threads", c.threads},
              {"strict", c.strict}};
}

namespace detail {

inline int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

inline int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

template <class T>
void read_field(const json& j, const std::string& key, T& dst, const std::string& text) {
  const json& v = j.at(key);
  bool ok = false;
  if constexpr (std::is_same_v<T, bool>)
    ok = v.is_boolean();
  else if constexpr (std::is_same_v<T, int>)
    ok = v.is_number_integer();
  else if constexpr (std::is_same_v<T, double>)
    ok = v.is_number();
  else if constexpr (std::is_same_v<T, std::string>)
    ok = v.is_string();
  else
    ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number_integer(); });
  if (!ok) throw config_error("key '" + key + "' has the wrong type", line_of_key(text, key));
  dst = v.get<T>();
}

}  // namespace detail

// Parses a JSON config document; `base` supplies values for absent keys.
inline RunConfig parse_config(const std::string& text, RunConfig base = {}) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("malformed JSON: ") + e.what(), detail::line_of_offset(text, e.byte ? e.byte - 1 : 0));
  }
  if (!j.is_object()) throw config_error("config must be a JSON object", 1);
  const json known = to_json(base);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.contains(it.key()))
      throw config_error("unknown key '" + it.key() + "'", detail::line_of_key(text, it.key()));
  RunConfig c = base;
  auto rd = [&](const char* key, auto& dst) {
    if (j.contains(key)) detail::read_field(j, key, dst, text);
  };
  rd("command", c.command);
  rd("p", c.p);
  rd("s", c.s);
  rd("tau", c.tau);
  rd("temperature", c.temperature);
  rd("schedule", c.schedule);
  rd("path", c.path);
  rd("disorder", c.disorder);
  rd("model", c.model);
  rd("grid", c.grid);
  rd("points", c.points);
  rd("n", c.n);
  rd("n_list", c.n_list);
  rd("beta0", c.beta0);
  rd("u", c.u);
  rd("jump_threshold", c.jump_threshold);
  rd("degeneracy_tolerance", c.degeneracy_tolerance);
  rd("bisection_width", c.bisection_width);
  rd("endpoint_threshold", c.endpoint_threshold);
  rd("quadrature_order", c.quadrature_order);
  rd("out", c.out);
  rd("format", c.format);
  rd("threads", c.threads);
  rd("strict", c.strict);
  return c;
}

inline void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw config_error(msg);
  };
  need(std::find(commands().begin(), commands().end(), c.command) != commands().end(),
       "unknown command '" + c.command + "'");
  need(c.p >= 3, "p must be an integer >= 3");
  need(c.s >= 0.0 && c.s <= 1.0, "s must lie in [0,1]");
  need(c.tau >= 0.0 && c.tau <= 1.0, "tau must lie in [0,1]");
  need(c.temperature >= 0.0 && std::isfinite(c.temperature), "temperature must be finite and >= 0");
  need(c.grid >= 101, "grid must have at least 101 points");
  need(c.points == 0 || c.points >= 2, "points must be >= 2 (or 0 for the default)");
  need(c.n >= 0, "n must be >= 0");
  need(c.beta0 > 0.0 && std::isfinite(c.beta0), "beta0 must be > 0");
  need(c.u >= 0.0 && c.u <= 1.0, "u must lie in [0,1]");
  need(c.jump_threshold > 0.0, "jump_threshold must be > 0");
  need(c.degeneracy_tolerance > 0.0, "degeneracy_tolerance must be > 0");
  need(c.bisection_width > 0.0, "bisection_width must be > 0");
  need(c.endpoint_threshold > 0.0, "endpoint_threshold must be > 0");
  need(c.quadrature_order >= 1, "quadrature_order must be >= 1");
  need(c.format == "csv" || c.format == "json", "format must be csv or json");
  need(c.model == "quantum" || c.model == "svmc", "model must be quantum or svmc");
  need(c.threads >= 1, "threads must be >= 1");
  if (c.command == "gap-scaling") {
    need(c.n_list.size() >= 3, "n_list needs at least three sizes");
    need(std::is_sorted(c.n_list.begin(), c.n_list.end()) && c.n_list.front() >= 1, "n_list must be sorted and >= 1");
  }
  parse_schedule(c.schedule, c.n);
  parse_path(c.path, c.p);
  parse_disorder(c.disorder, c.quadrature_order);
}

// ---------------------------------------------------------------------------
// Output tables.

using Cell = std::optional<double>;  // empty renders as a blank CSV field / JSON null

struct Artifact {
  std::vector<std::string> notes;     // rendered as "# " lines
  std::vector<std::string> warnings;  // rendered as "# warning: " lines
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  json extra = json::object();  // structured objects, JSON format only
};

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string fmt(const Cell& c) { return c ? fmt(*c) : std::string(); }

inline std::vector<std::string> tolerance_notes(const RunConfig& c) {
  return {"tolerances: jump_threshold=" + fmt(c.jump_threshold) + " degeneracy_tolerance=" +
              fmt(c.degeneracy_tolerance) + " bisection_width=" + fmt(c.bisection_width) +
              " endpoint_threshold=" + fmt(c.endpoint_threshold),
          "quadrature: schedule pieces by adaptive Gauss-Kronrod (31 point, tol 1e-14); Gaussian disorder by "
          "30-point Gauss-Legendre panels split at the kink; landscape refinement width 1e-12",
          "exact diagonalization: Lanczos residual <= 1e-11 max(1,|e|), Krylov 300, fixed seed"};
}

// Config as embedded in artifacts. Thread count and output path only affect
// execution, and leaving them out keeps files byte-identical across runs.
inline json provenance(const RunConfig& c) {
  json j = to_json(c);
  j.erase("threads");
  j.erase("out");
  return j;
}

inline std::string render(const RunConfig& c, const Artifact& a) {
  std::ostringstream os;
  if (c.format == "json") {
    json j;
    j["config"] = provenance(c);
    j["notes"] = a.notes;
    j["tolerances"] = tolerance_notes(c);
    j["warnings"] = a.warnings;
    j["columns"] = a.columns;
    json rows = json::array();
    for (const auto& r : a.rows) {
      json row = json::array();
      for (const auto& cell : r)
        if (cell)
          row.push_back(std::stod(fmt(*cell)));
        else
          row.push_back(nullptr);
      rows.push_back(row);
    }
    j["rows"] = rows;
    for (auto it = a.extra.begin(); it != a.extra.end(); ++it) j[it.key()] = it.value();
    os << j.dump(2) << '\n';
    return os.str();
  }
  os << "# pspin " << c.command << '\n';
  os << "# config: " << provenance(c).dump() << '\n';
  for (const auto& t : tolerance_notes(c)) os << "# " << t << '\n';
  for (const auto& n : a.notes) os << "# " << n << '\n';
  for (const auto& w : a.warnings) os << "# warning: " << w << '\n';
  for (std::size_t i = 0; i < a.columns.size(); ++i) os << (i ? "," : "") << a.columns[i];
  os << '\n';
  for (const auto& r : a.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt(r[i]);
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Commands.

namespace detail {

inline DetectOptions detect_options(const RunConfig& c) {
  DetectOptions d;
  d.grid = c.grid;
  d.jump_threshold = c.jump_threshold;
  d.degeneracy_tolerance = c.degeneracy_tolerance;
  d.bisection_width = c.bisection_width;
  return d;
}

inline Plane plane_of(const RunConfig& c) {
  Plane pl;
  pl.kind = PlaneKind::s_tau;
  pl.p = c.p;
  pl.temperature = c.temperature;
  pl.path = parse_path(c.path, c.p);
  pl.schedule = parse_schedule(c.schedule, c.n);
  pl.disorder = parse_disorder(c.disorder, c.quadrature_order);
  pl.model = (c.model == "svmc" || c.command == "svmc") ? ModelKind::svmc : ModelKind::quantum;
  return pl;
}

inline LineSet trace(const RunConfig& c) {
  SweepOptions so;
  so.slow_points = c.points ? c.points : 401;
  so.detect = detect_options(c);
  so.endpoint_threshold = c.endpoint_threshold;
  so.threads = c.threads;
  return trace_line(plane_of(c), so);
}

inline std::string yes_no(bool b) { return b ? "yes" : "no"; }

inline Artifact phase_diagram(const RunConfig& c) {
  const LineSet set = trace(c);
  const PathSpec ps = parse_path(c.path, c.p);
  Artifact a;
  a.columns = {"line", "endpoint", "s", "tau", "temperature", "delta_m", "f", "m_low", "m_high"};
  a.notes.push_back("lines: " + std::to_string(set.lines.size()) + (set.disconnected() ? " (disconnected)" : ""));
  json lines = json::array();
  for (std::size_t k = 0; k < set.lines.size(); ++k) {
    const auto& line = set.lines[k];
    std::string note = "line " + std::to_string(k) + ": " + std::to_string(line.points.size()) + " points";
    if (line.endpoint)
      note += ", critical endpoint at s=" + fmt(line.endpoint->location.s) + " tau=" + fmt(line.endpoint->location.tau);
    else
      note += ", no critical endpoint";
    note += ", crosses path " + c.path + ": " + yes_no(intersects(line, ps));
    note += ", meets tau=0 axis: " + yes_no(intersects(line, path::HomogeneousAxis{}));
    a.notes.push_back(note);
    auto row = [&](const TransitionPoint& tp, bool end) {
      a.rows.push_back({double(k), end ? 1.0 : 0.0, tp.location.s, tp.location.tau, tp.location.temperature,
                        tp.delta_m, tp.f_at_transition, tp.branch_pair[0].m, tp.branch_pair[1].m});
    };
    json jl;
    jl["points"] = json::array();
    for (const auto& tp : line.points) {
      row(tp, false);
      jl["points"].push_back({{"s", tp.location.s}, {"tau", tp.location.tau}, {"delta_m", tp.delta_m}});
    }
    if (line.endpoint) {
      row(*line.endpoint, true);
      jl["endpoint"] = {{"s", line.endpoint->location.s},
                        {"tau", line.endpoint->location.tau},
                        {"delta_m", line.endpoint->delta_m}};
    } else {
      jl["endpoint"] = nullptr;
    }
    jl["crosses_path"] = intersects(line, ps);
    lines.push_back(jl);
  }
  a.notes.push_back("monotone transition-free path (0,0)->(1,1): " + yes_no(find_monotone_path(set).has_value()));
  a.extra["lines"] = lines;
  return a;
}

inline Artifact delta_m(const RunConfig& c) {
  const LineSet set = trace(c);
  Artifact a;
  a.columns = {"line", "s", "tau", "delta_m"};
  for (std::size_t k = 0; k < set.lines.size(); ++k) {
    std::vector<const TransitionPoint*> pts;
    for (const auto& tp : set.lines[k].points) pts.push_back(&tp);
    std::stable_sort(pts.begin(), pts.end(),
                     [](const auto* x, const auto* y) { return x->location.s < y->location.s; });
    for (const auto* tp : pts) a.rows.push_back({double(k), tp->location.s, tp->location.tau, tp->delta_m});
  }
  a.notes.push_back("lines: " + std::to_string(set.lines.size()));
  if (set.lines.empty()) a.warnings.push_back("no first-order line found");
  return a;
}

inline Artifact gap(const RunConfig& c) {
  const PathSpec ps = parse_path(c.path, c.p);
  const int res = c.points ? c.points : 401;
  Artifact a;
  if (c.n > 0) {
    const FieldSchedule sched = parse_schedule(c.schedule, c.n);
    try {
      const GapCurve curve = gap_curve(c.n, ps, sched, c.p, res);
      a.columns = {"s", "tau", "gap"};
      for (const auto& g : curve.samples) a.rows.push_back({g.s, g.tau, g.gap});
      a.notes.push_back("N=" + std::to_string(c.n) + " minimum gap " + fmt(curve.minimum.gap) + " at s=" +
                        fmt(curve.minimum.s));
    } catch (const solver_error& e) {
      a.columns = {"s", "tau", "gap"};
      a.warnings.push_back(std::string("diagonalization failed: ") + e.what());
    }
    return a;
  }
  a.columns = {"s",       "tau",      "theta0",   "e",       "epsilon",   "delta_a1",
               "delta_a2", "delta_b", "min_gap", "breakdown", "degenerate"};
  int broken = 0;
  for (int k = 0; k < res; ++k) {
    const double s = double(k) / (res - 1);
    const double tau = tau_on_path(ps, s);
    const auto all = gap_components_all<double>(c.p, s, tau);
    const auto& g = all.front();
    const auto mg = min_gap_of<double>(g, tau);
    if (g.breakdown) ++broken;
    a.rows.push_back({s, tau, g.theta0, g.e, g.epsilon, g.delta_a1, g.delta_a2, g.delta_b, mg.value,
                      g.breakdown ? 1.0 : 0.0, all.size() > 1 ? 1.0 : 0.0});
  }
  const auto mn = path_gap_minimum(ps, c.p);
  a.notes.push_back("refined minimum of delta_a1: " + fmt(mn.delta_a1) + " at s=" + fmt(mn.s) + " tau=" + fmt(mn.tau));
  if (broken) a.warnings.push_back(std::to_string(broken) + " points beyond the harmonic expansion (|epsilon| >= 1)");
  return a;
}

inline Artifact gap_scaling(const RunConfig& c) {
  const PathSpec ps = parse_path(c.path, c.p);
  const auto* ramp = std::get_if<path::Ramp>(&ps);
  if (!ramp) throw config_error("gap-scaling needs --path ramp:<a>");
  ScalingOptions so;
  so.p = c.p;
  so.resolution = c.points ? c.points : 400;
  so.threads = c.threads;
  Artifact a;
  a.columns = {"n", "min_gap", "s_at_min"};
  try {
    const ScalingFit fit = min_gap_scaling(ramp->a, c.n_list, so);
    for (const auto& d : fit.data) a.rows.push_back({double(d.n), d.min_gap, d.s_at_min});
    a.notes.push_back("power law: exponent " + fmt(fit.power_law.parameter) + " r2 " + fmt(fit.power_law.r2));
    a.notes.push_back("exponential: rate " + fmt(fit.exponential.parameter) + " r2 " + fmt(fit.exponential.r2));
    a.notes.push_back(std::string("verdict: ") + to_string(fit.verdict));
  } catch (const scaling_aborted& e) {
    for (const auto& d : e.partial()) a.rows.push_back({double(d.n), d.min_gap, d.s_at_min});
    a.warnings.push_back(e.what());
  }
  return a;
}

inline Artifact entropy(const RunConfig& c) {
  const PathSpec ps = parse_path(c.path, c.p);
  ScanContext ctx;
  ctx.p = c.p;
  ctx.u = c.u;
  const auto scan = path_scan(ps, Quantity::entropy, c.points ? c.points : 401, ctx);
  Artifact a;
  a.columns = {"s", "tau", "entropy", "divergent"};
  int div = 0;
  for (const auto& smp : scan) {
    a.rows.push_back({smp.s, smp.tau, smp.value, smp.flagged ? 1.0 : 0.0});
    if (smp.flagged) ++div;
  }
  a.notes.push_back("u=" + fmt(c.u));
  if (div) a.warnings.push_back(std::to_string(div) + " points with |epsilon| >= 1 (entropy diverges)");
  return a;
}

inline Artifact sa(const RunConfig& c) {
  SASpec spec{c.p, c.beta0, 0.0, parse_disorder(c.disorder, c.quadrature_order)};
  const int n = c.points ? c.points : 201;
  std::vector<double> taus(n);
  for (int k = 0; k < n; ++k) taus[k] = double(k) / (n - 1);
  const SACurve curve = sa_order_parameter_curve(spec, taus, detect_options(c));
  Artifact a;
  a.columns = {"tau", "m_star", "m_normalized"};
  for (const auto& smp : curve.samples) a.rows.push_back({smp.tau, smp.m_star, smp.m_normalized});
  a.notes.push_back("free energy drops the constant (1 - tau) ln 2; m = (1/N) sum beta_i sigma_i");
  a.notes.push_back("transitions: " + std::to_string(curve.transitions.size()));
  for (const auto& tp : curve.transitions)
    a.notes.push_back("jump at tau=" + fmt(tp.lambda) + " delta_m=" + fmt(tp.delta_m));
  return a;
}

inline Artifact landscape(const RunConfig& c) {
  const ModelSpec spec = make_model(c.p, c.s, c.tau, c.temperature);
  const FieldSchedule sched = parse_schedule(c.schedule, c.n);
  const DisorderSpec dist = parse_disorder(c.disorder, c.quadrature_order);
  const bool rotor = c.model == "svmc";
  if (rotor && !dist.none()) throw config_error("the rotor model is implemented without disorder");
  const int n = c.points ? c.points : 201;
  ScanOptions so;
  so.grid = c.grid;
  Artifact a;
  a.columns = {"m", "f"};
  auto emit = [&](const auto& fe) {
    const Interval dom = fe.domain();
    for (int k = 0; k < n; ++k) {
      const double m = k == n - 1 ? dom.hi : dom.lo + (dom.hi - dom.lo) * k / (n - 1);
      a.rows.push_back({m, fe.value(m)});
    }
    const Landscape ls = scan_landscape(fe, so);
    for (std::size_t i = 0; i < ls.minima.size(); ++i)
      a.notes.push_back(std::string(i == ls.global_index ? "global" : "local") + " minimum m=" +
                        fmt(ls.minima[i].m) + " f=" + fmt(ls.minima[i].f));
  };
  if (rotor)
    emit(SVMCFreeEnergy(spec, sched));
  else
    emit(FreeEnergy(spec, sched, dist));
  return a;
}

}  // namespace detail

inline Artifact execute(const RunConfig& c) {
  validate(c);
  if (c.command == "phase-diagram" || c.command == "svmc") return detail::phase_diagram(c);
  if (c.command == "delta-m") return detail::delta_m(c);
  if (c.command == "gap") return detail::gap(c);
  if (c.command == "gap-scaling") return detail::gap_scaling(c);
  if (c.command == "entropy") return detail::entropy(c);
  if (c.command == "sa") return detail::sa(c);
  return detail::landscape(c);
}

enum ExitCode { ok = 0, invalid = 1, warned = 2, failed = 3 };

// Runs the configuration and writes the artifact to c.out (or `out`).
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  Artifact a;
  try {
    a = execute(c);
  } catch (const config_error& e) {
    err << "error: " << e.what() << '\n';
    return invalid;
  } catch (const domain_error& e) {
    err << "error: " << e.what() << '\n';
    return invalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return failed;
  }
  const std::string text = render(c, a);
  if (c.out.empty() || c.out == "-") {
    out << text;
  } else {
    std::ofstream f(c.out, std::ios::binary);
    if (!f) {
      err << "error: cannot write '" << c.out << "'\n";
      return failed;
    }
    f << text;
  }
  for (const auto& w : a.warnings) err << "warning: " << w << '\n';
  return (c.strict && !a.warnings.empty()) ? warned : ok;
}

// ---------------------------------------------------------------------------
// Argument parsing.

inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  CLI::App app{"Statics of the inhomogeneously driven p-spin model"};
  app.require_subcommand(1, 1);
  RunConfig flags;
  std::string config_path, n_list;
  std::map<std::string, CLI::Option*> opt;
  opt["p"] = app.add_option("--p", flags.p, "interaction order (>= 3)");
  opt["s"] = app.add_option("--s", flags.s, "annealing parameter");
  opt["tau"] = app.add_option("--tau", flags.tau, "fraction of switched-off sites");
  opt["temperature"] = app.add_option("--temperature", flags.temperature, "temperature (0 = exact ground state)");
  opt["schedule"] = app.add_option("--schedule", flags.schedule,
                                   "homogeneous|step|step-diagonal[:N]|residual:<gamma>|slope:<a>");
  opt["path"] = app.add_option("--path", flags.path, "tau-eq-s|tau-power:<c>|touching|ramp:<a>|homogeneous");
  opt["disorder"] = app.add_option("--disorder", flags.disorder, "none|bimodal:<h0>|gaussian:<sigma>");
  opt["model"] = app.add_option("--model", flags.model, "quantum|svmc");
  opt["grid"] = app.add_option("--grid", flags.grid, "landscape scan grid");
  opt["points"] = app.add_option("--points", flags.points, "samples along the sweep (0 = default)");
  opt["n"] = app.add_option("--n", flags.n, "system size for exact diagonalization");
  opt["n_list"] = app.add_option("--n-list", n_list, "comma-separated sizes for gap-scaling");
  opt["beta0"] = app.add_option("--beta0", flags.beta0, "inverse temperature of cold sites (sa)");
  opt["u"] = app.add_option("--u", flags.u, "bipartition fraction (entropy)");
  opt["jump_threshold"] = app.add_option("--jump-threshold", flags.jump_threshold);
  opt["endpoint_threshold"] = app.add_option("--endpoint-threshold", flags.endpoint_threshold);
  opt["quadrature_order"] = app.add_option("--quadrature-order", flags.quadrature_order);
  opt["out"] = app.add_option("--out", flags.out, "output file (default stdout)");
  opt["format"] = app.add_option("--format", flags.format, "csv|json");
  opt["threads"] = app.add_option("--threads", flags.threads, "worker threads");
  opt["strict"] = app.add_flag("--strict", flags.strict, "numerical warnings give exit status 2");
  app.add_option("--config", config_path, "JSON config; flags override it");

  std::string command;
  for (const auto& name : commands()) {
    auto* sub = app.add_subcommand(name);
    sub->fallthrough();
    sub->callback([&command, name] { command = name; });
  }
  auto* run_cmd = app.add_subcommand("run", "execute the command named in --config");
  run_cmd->fallthrough();
  run_cmd->callback([&command] { command = "run"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return invalid;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path, std::ios::binary);
      if (!f) throw config_error("cannot read config '" + config_path + "'");
      std::stringstream buf;
      buf << f.rdbuf();
      try {
        cfg = parse_config(buf.str());
      } catch (const config_error& e) {
        throw config_error(config_path + ":" + std::to_string(e.line()) + ": " + e.what(), e.line());
      }
    } else if (command == "run") {
      throw config_error("run needs --config");
    }
    if (command != "run") cfg.command = command;
    if (!n_list.empty()) {
      flags.n_list.clear();
      std::stringstream ss(n_list);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const double v = detail::parse_number(item, "--n-list");
        if (v != std::floor(v)) throw config_error("--n-list entries must be integers");
        flags.n_list.push_back(static_cast<int>(v));
      }
    }
    const json given = to_json(flags);
    json merged = to_json(cfg);
    for (const auto& [key, o] : opt)
      if (o->count() > 0) merged[key] = given[key];
    cfg = parse_config(merged.dump(), cfg);
  } catch (const config_error& e) {
    err << "error: " << e.what() << '\n';
    return invalid;
  }
  return run(cfg, out, err);
}

}  // namespace pspin::cli
