#pragma once

// Scenario files: INI-style sections of `key = value` pairs, '#' or ';'
// comments. Vectors are comma separated. Unknown sections and keys are
// rejected. Keys and defaults:
//
//   [orbit]       altitude_km (required), inclination_deg (required),
//                 raan_deg = 0, phase0_rad = 0, earth_radius_km = 6371,
//                 mu_earth = 3.986e14, dipole_strength = 7.746e15
//   [spacecraft]  inertia (required): 3 values (diagonal) or 9 (row major)
//   [controller]  kind = zoh-state | zoh-output | continuous-state | continuous-output,
//                 k1, k2, epsilon (required), T (required for zoh kinds),
//                 alpha, lambda (required for output kinds),
//                 delta0 (4 values, default q0 / (epsilon lambda))
//   [initial]     q0 = 0,0,0,1, omega0 = 0,0,0
//   [simulation]  h = T/200 (zoh) or 0.1, t_final = 10 orbits rounded up
//                 to a multiple of T, record_every = 1
//   [design]      scan_step = 10, bisect_tol = 1, scan_max = 0 (one orbit),
//                 hurwitz_margin = 1e-9, averaging = phase | sum,
//                 quad_substeps = 64, phase_points = 512, avg_samples = 0
//                 (automatic), horizon_orbits = 20, sample_offset = 0

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "magstab/sim.hpp"

namespace magstab {

struct Scenario {
  // [orbit]
  double altitude_km = 0.0;
  double earth_radius_km = kEarthRadius / 1e3;
  double inclination_deg = 0.0;
  double raan_deg = 0.0;
  double phase0_rad = 0.0;
  double mu_earth = kMuEarth;
  double dipole_strength = kGeomagneticDipole;
  // [spacecraft]
  Mat3 inertia = Mat3::Identity();
  // [controller]
  ControllerKind kind = ControllerKind::zoh_state;
  double k1 = 0.0;
  double k2 = 0.0;
  std::optional<double> alpha;
  std::optional<double> lambda;
  double epsilon = 0.0;
  std::optional<double> T;
  std::optional<Vec4> delta0;
  // [initial]
  Vec4 q0 = Vec4(0.0, 0.0, 0.0, 1.0);
  Vec3 omega0 = Vec3::Zero();
  // [simulation]
  double h = 0.1;
  double t_final = 0.0;
  int record_every = 1;
  // [design]
  double scan_step = 10.0;
  double bisect_tol = 1.0;
  double scan_max = 0.0;
  double hurwitz_margin = 1e-9;
  AveragingMethod averaging = AveragingMethod::phase;
  int quad_substeps = 64;
  int phase_points = 512;
  std::int64_t avg_samples = 0;
  double horizon_orbits = 20.0;
  std::int64_t sample_offset = 0;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline std::optional<ControllerKind> parse_controller_kind(std::string_view s) {
  for (auto k : {ControllerKind::continuous_state, ControllerKind::continuous_output,
                 ControllerKind::zoh_state, ControllerKind::zoh_output}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

inline OrbitSpec orbit_of(const Scenario& s) {
  OrbitSpec o;
  o.radius_m = (s.earth_radius_km + s.altitude_km) * 1e3;
  o.incl_rad = s.inclination_deg * std::numbers::pi / 180.0;
  o.raan_rad = s.raan_deg * std::numbers::pi / 180.0;
  o.phi0_rad = s.phase0_rad;
  o.mu_earth = s.mu_earth;
  o.mu_m = s.dipole_strength;
  return o;
}

inline InertiaSpec inertia_of(const Scenario& s) { return {s.inertia}; }

inline StateGains state_gains_of(const Scenario& s) { return {s.k1, s.k2}; }

/// Throws ValidationError when alpha or lambda is missing.
inline OutputGains output_gains_of(const Scenario& s) {
  if (!s.alpha || !(*s.alpha > 0.0)) throw ValidationError("alpha required and > 0");
  if (!s.lambda || !(*s.lambda > 0.0)) throw ValidationError("lambda required and > 0");
  return {s.k1, s.k2, *s.alpha, *s.lambda};
}

inline Gains gains_of(const Scenario& s, FeedbackKind kind) {
  if (kind == FeedbackKind::state) return state_gains_of(s);
  return output_gains_of(s);
}

inline AveragingConfig averaging_of(const Scenario& s) {
  AveragingConfig a;
  a.method = s.averaging;
  a.quad_substeps = s.quad_substeps;
  a.phase_points = s.phase_points;
  a.avg_samples = s.avg_samples;
  a.horizon_orbits = s.horizon_orbits;
  a.sample_offset = s.sample_offset;
  return a;
}

inline TstarOptions tstar_options_of(const Scenario& s) {
  TstarOptions o;
  o.scan_step = s.scan_step;
  o.bisect_tol = s.bisect_tol;
  o.scan_max = s.scan_max;
  o.relative_margin = s.hurwitz_margin;
  o.averaging = averaging_of(s);
  return o;
}

inline SimConfig sim_config_of(const Scenario& s) {
  SimConfig c;
  c.orbit = orbit_of(s);
  c.inertia = inertia_of(s);
  c.controller.kind = s.kind;
  c.controller.gains = gains_of(s, is_output_feedback(s.kind) ? FeedbackKind::output
                                                               : FeedbackKind::state);
  c.controller.epsilon = s.epsilon;
  c.controller.T = s.T.value_or(0.0);
  c.q0 = Quaternion::from_vec4(s.q0);
  c.omega0 = s.omega0;
  c.t_final = s.t_final;
  c.h = s.h;
  c.record_every = s.record_every;
  c.delta0 = s.delta0;
  return c;
}

/// Re-checks every invariant; ValidationError names the violated one.
inline void validate_scenario(const Scenario& s) {
  try {
    if (!(s.altitude_km > 0.0)) throw ValidationError("altitude_km required and > 0");
    if (!(s.scan_step > 0.0)) throw ValidationError("scan_step must be > 0");
    if (!(s.bisect_tol > 0.0)) throw ValidationError("bisect_tol must be > 0");
    if (!(s.scan_max >= 0.0)) throw ValidationError("scan_max must be >= 0");
    if (!(s.hurwitz_margin >= 0.0)) throw ValidationError("hurwitz_margin must be >= 0");
    averaging_of(s).validate();
    sim_config_of(s).validate();
  } catch (const ValidationError&) {
    throw;
  } catch (const DomainError& e) {
    throw ValidationError(e.what());
  }
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

/// Line numbers of every `section.key` in the raw text, for diagnostics.
inline std::map<std::string, int> key_lines(const std::string& text) {
  std::map<std::string, int> lines;
  std::istringstream in(text);
  std::string line, section;
  for (int n = 1; std::getline(in, line); ++n) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos) lines[section + "." + trim(std::string_view(t).substr(0, eq))] = n;
  }
  return lines;
}

class ScenarioReader {
 public:
  ScenarioReader(const boost::property_tree::ptree& tree, std::map<std::string, int> lines,
                 std::string source)
      : tree_(tree), lines_(std::move(lines)), source_(std::move(source)) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    used_.insert(section + "." + key);
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& what) const {
    std::string where = source_;
    const auto it = lines_.find(section + "." + key);
    if (it != lines_.end()) where += ":" + std::to_string(it->second);
    throw ValidationError(where + ": [" + section + "] " + key + ": " + what);
  }

  std::optional<double> number(const std::string& section, const std::string& key) {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    const auto x = to_double(*v);
    if (!x) fail(section, key, "expected a number, got '" + *v + "'");
    return x;
  }

  std::optional<std::int64_t> integer(const std::string& section, const std::string& key) {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    std::int64_t out = 0;
    const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || p != v->data() + v->size())
      fail(section, key, "expected an integer, got '" + *v + "'");
    return out;
  }

  std::optional<std::vector<double>> numbers(const std::string& section, const std::string& key) {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    std::vector<double> out;
    std::string item;
    std::istringstream in(*v);
    while (std::getline(in, item, ',')) {
      const auto x = to_double(trim(item));
      if (!x) fail(section, key, "expected comma-separated numbers, got '" + *v + "'");
      out.push_back(*x);
    }
    return out;
  }

  template <int N>
  std::optional<Eigen::Matrix<double, N, 1>> fixed_vector(const std::string& section,
                                                          const std::string& key) {
    const auto v = numbers(section, key);
    if (!v) return std::nullopt;
    if (v->size() != static_cast<std::size_t>(N))
      fail(section, key, "expected " + std::to_string(N) + " values");
    return Eigen::Map<const Eigen::Matrix<double, N, 1>>(v->data());
  }

  double required(const std::string& section, const std::string& key, const std::string& msg) {
    const auto v = number(section, key);
    if (!v) throw ValidationError(source_ + ": " + msg);
    return *v;
  }

  void reject_unknown() const {
    static const std::set<std::string> sections = {"orbit",   "spacecraft", "controller",
                                                   "initial", "simulation", "design"};
    for (const auto& [section, keys] : tree_) {
      if (!sections.count(section)) {
        throw ValidationError(source_ + ": unknown section [" + section + "]");
      }
      if (!keys.data().empty() && keys.empty()) {
        throw ValidationError(source_ + ": key '" + section + "' outside of any section");
      }
      for (const auto& [key, value] : keys) {
        if (!used_.count(section + "." + key)) fail(section, key, "unknown key");
      }
    }
  }

 private:
  static std::optional<double> to_double(const std::string& s) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(out))
      return std::nullopt;
    return out;
  }

  const boost::property_tree::ptree& tree_;
  std::map<std::string, int> lines_;
  std::string source_;
  std::set<std::string> used_;
};

}  // namespace detail

/// Parses and validates scenario text. `source` names the input in messages.
inline Scenario parse_scenario_text(const std::string& text, const std::string& source = "<scenario>") {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  detail::ScenarioReader r(tree, detail::key_lines(text), source);
  Scenario s;

  s.altitude_km = r.required("orbit", "altitude_km", "altitude_km required and > 0");
  s.inclination_deg = r.required("orbit", "inclination_deg", "inclination_deg required");
  s.raan_deg = r.number("orbit", "raan_deg").value_or(s.raan_deg);
  s.phase0_rad = r.number("orbit", "phase0_rad").value_or(s.phase0_rad);
  s.earth_radius_km = r.number("orbit", "earth_radius_km").value_or(s.earth_radius_km);
  s.mu_earth = r.number("orbit", "mu_earth").value_or(s.mu_earth);
  s.dipole_strength = r.number("orbit", "dipole_strength").value_or(s.dipole_strength);

  const auto inertia = r.numbers("spacecraft", "inertia");
  if (!inertia) throw ValidationError(source + ": inertia required (3 or 9 values)");
  if (inertia->size() == 3) {
    s.inertia = Vec3(Eigen::Map<const Vec3>(inertia->data())).asDiagonal();
  } else if (inertia->size() == 9) {
    s.inertia = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(inertia->data());
  } else {
    r.fail("spacecraft", "inertia", "expected 3 (diagonal) or 9 (row-major) values");
  }

  if (const auto kind = r.raw("controller", "kind")) {
    const auto k = parse_controller_kind(*kind);
    if (!k) r.fail("controller", "kind", "unknown controller kind '" + *kind + "'");
    s.kind = *k;
  }
  s.k1 = r.number("controller", "k1").value_or(0.0);
  if (!(s.k1 > 0.0)) throw ValidationError(source + ": k1 required and > 0");
  s.k2 = r.number("controller", "k2").value_or(0.0);
  if (!(s.k2 > 0.0)) throw ValidationError(source + ": k2 required and > 0");
  s.epsilon = r.required("controller", "epsilon", "epsilon required and >= 0");
  s.alpha = r.number("controller", "alpha");
  s.lambda = r.number("controller", "lambda");
  s.T = r.number("controller", "T");
  s.delta0 = r.fixed_vector<4>("controller", "delta0");
  if (is_zoh(s.kind) && !s.T) throw ValidationError(source + ": T required for " + to_string(s.kind));

  s.q0 = r.fixed_vector<4>("initial", "q0").value_or(s.q0);
  s.omega0 = r.fixed_vector<3>("initial", "omega0").value_or(s.omega0);

  const bool zoh_period = is_zoh(s.kind) && s.T && *s.T > 0.0;
  s.h = r.number("simulation", "h").value_or(zoh_period ? *s.T / 200.0 : 0.1);
  if (const auto tf = r.number("simulation", "t_final")) {
    s.t_final = *tf;
  } else {
    const double ten_orbits = 10.0 * orbital_period(orbit_of(s));
    const double grid = zoh_period ? *s.T : s.h;
    s.t_final = std::isfinite(ten_orbits) && grid > 0.0 ? grid * std::ceil(ten_orbits / grid) : 0.0;
  }
  if (const auto n = r.integer("simulation", "record_every")) {
    if (*n < 1 || *n > 1'000'000'000) r.fail("simulation", "record_every", "must be >= 1");
    s.record_every = static_cast<int>(*n);
  }

  s.scan_step = r.number("design", "scan_step").value_or(s.scan_step);
  s.bisect_tol = r.number("design", "bisect_tol").value_or(s.bisect_tol);
  s.scan_max = r.number("design", "scan_max").value_or(s.scan_max);
  s.hurwitz_margin = r.number("design", "hurwitz_margin").value_or(s.hurwitz_margin);
  if (const auto m = r.raw("design", "averaging")) {
    if (*m == "phase") s.averaging = AveragingMethod::phase;
    else if (*m == "sum") s.averaging = AveragingMethod::sample_sum;
    else r.fail("design", "averaging", "expected 'phase' or 'sum'");
  }
  s.quad_substeps = static_cast<int>(r.integer("design", "quad_substeps").value_or(s.quad_substeps));
  s.phase_points = static_cast<int>(r.integer("design", "phase_points").value_or(s.phase_points));
  s.avg_samples = r.integer("design", "avg_samples").value_or(s.avg_samples);
  s.horizon_orbits = r.number("design", "horizon_orbits").value_or(s.horizon_orbits);
  s.sample_offset = r.integer("design", "sample_offset").value_or(s.sample_offset);

  r.reject_unknown();
  validate_scenario(s);
  return s;
}

inline Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

/// 17 significant digits, so that parsing the text gives back the same double.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {
template <typename Derived>
std::string join(const Eigen::DenseBase<Derived>& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v(i));
  }
  return out;
}
}  // namespace detail

/// Writes every field, defaults included; parse_scenario_text inverts it.
inline std::string serialize_scenario(const Scenario& s) {
  std::ostringstream o;
  auto kv = [&](const char* key, const std::string& value) { o << key << " = " << value << "\n"; };
  auto num = [&](const char* key, double x) { kv(key, format_double(x)); };

  o << "[orbit]\n";
  num("altitude_km", s.altitude_km);
  num("earth_radius_km", s.earth_radius_km);
  num("inclination_deg", s.inclination_deg);
  num("raan_deg", s.raan_deg);
  num("phase0_rad", s.phase0_rad);
  num("mu_earth", s.mu_earth);
  num("dipole_strength", s.dipole_strength);

  o << "\n[spacecraft]\n";
  const Eigen::Matrix<double, 3, 3, Eigen::RowMajor> j = s.inertia;
  kv("inertia", detail::join(Eigen::Map<const Eigen::Matrix<double, 9, 1>>(j.data())));

  o << "\n[controller]\n";
  kv("kind", to_string(s.kind));
  num("k1", s.k1);
  num("k2", s.k2);
  if (s.alpha) num("alpha", *s.alpha);
  if (s.lambda) num("lambda", *s.lambda);
  num("epsilon", s.epsilon);
  if (s.T) num("T", *s.T);
  if (s.delta0) kv("delta0", detail::join(*s.delta0));

  o << "\n[initial]\n";
  kv("q0", detail::join(s.q0));
  kv("omega0", detail::join(s.omega0));

  o << "\n[simulation]\n";
  num("h", s.h);
  num("t_final", s.t_final);
  kv("record_every", std::to_string(s.record_every));

  o << "\n[design]\n";
  num("scan_step", s.scan_step);
  num("bisect_tol", s.bisect_tol);
  num("scan_max", s.scan_max);
  num("hurwitz_margin", s.hurwitz_margin);
  kv("averaging", s.averaging == AveragingMethod::phase ? "phase" : "sum");
  kv("quad_substeps", std::to_string(s.quad_substeps));
  kv("phase_points", std::to_string(s.phase_points));
  kv("avg_samples", std::to_string(s.avg_samples));
  num("horizon_orbits", s.horizon_orbits);
  kv("sample_offset", std::to_string(s.sample_offset));
  return o.str();
}

}  // namespace magstab
