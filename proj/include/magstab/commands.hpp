#pragma once

// Implementations of the `design`, `simulate` and `lav` subcommands. They
// write human-readable summaries to the given stream and throw the toolkit
// error types; tools/magstab.cpp maps those to exit codes.

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "magstab/scenario.hpp"

namespace magstab {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitDesignFailure = 3,
  kExitDivergence = 4,
};

struct DesignReport {
  FeedbackKind kind = FeedbackKind::state;
  double Tstar = 0.0;
  bool Tstar_capped = false;
  double T = 0.0;
  double eps0 = 0.0;
  double epsilon = 0.0;
  double assumption1_margin = 0.0;
  Vec3 l_average_zero_eigenvalues = Vec3::Zero();
  Spectrum spectrum_at_T;
};

inline nlohmann::json to_json(const DesignReport& r) {
  nlohmann::json spectrum = nlohmann::json::array();
  for (const auto& l : r.spectrum_at_T) spectrum.push_back({l.real(), l.imag()});
  return {
      {"kind", r.kind == FeedbackKind::state ? "state" : "output"},
      {"Tstar", r.Tstar},
      {"Tstar_capped", r.Tstar_capped},
      {"T", r.T},
      {"eps0", r.eps0},
      {"epsilon", r.epsilon},
      {"epsilon_within_bound", r.epsilon <= r.eps0},
      {"assumption1_margin", r.assumption1_margin},
      {"l_average_zero_eigenvalues",
       {r.l_average_zero_eigenvalues(0), r.l_average_zero_eigenvalues(1),
        r.l_average_zero_eigenvalues(2)}},
      {"spectrum_at_T", spectrum},
  };
}

inline DesignReport cmd_design(const Scenario& s, FeedbackKind kind, std::ostream& out) {
  if (!s.T) throw ValidationError("design needs a sampling period T");
  const OrbitSpec orbit = orbit_of(s);
  const Gains gains = gains_of(s, kind);

  const SamplingDesign d =
      design_sampling(orbit, inertia_of(s), gains, *s.T, tstar_options_of(s));

  DesignReport r;
  r.kind = kind;
  r.Tstar = d.Tstar;
  r.Tstar_capped = d.Tstar_capped;
  r.T = d.T;
  r.eps0 = d.eps0;
  r.epsilon = s.epsilon;
  r.assumption1_margin = d.assumption1.margin;
  r.l_average_zero_eigenvalues =
      Eigen::SelfAdjointEigenSolver<Mat3>(d.l_average_zero, Eigen::EigenvaluesOnly).eigenvalues();
  r.spectrum_at_T = d.spectrum_at_T;

  out << "feedback:            " << (kind == FeedbackKind::state ? "state" : "output") << "\n"
      << "assumption 1 margin: " << format_double(r.assumption1_margin) << "\n"
      << "L_av^0 eigenvalues:  " << detail::join(r.l_average_zero_eigenvalues) << "\n"
      << "T*:                  " << format_double(r.Tstar) << " s"
      << (r.Tstar_capped ? " (scan limit, Hurwitz throughout)" : "") << "\n"
      << "T:                   " << format_double(r.T) << " s\n"
      << "max Re lambda(A(T)): " << format_double(max_real_part(r.spectrum_at_T)) << "\n"
      << "eps0:                " << format_double(r.eps0) << "\n"
      << "epsilon:             " << format_double(r.epsilon)
      << (r.epsilon <= r.eps0 ? " (<= eps0)" : " (exceeds eps0)") << "\n";
  return r;
}

inline constexpr const char* kCsvHeader = "t,q1,q2,q3,q4,wx,wy,wz,mx,my,mz,bbx,bby,bbz";

inline void write_csv(const Trajectory& traj, std::ostream& out) {
  out << kCsvHeader << "\n";
  for (const auto& s : traj.samples) {
    const double row[] = {s.t,        s.q.v(0),   s.q.v(1),   s.q.v(2),   s.q.s,
                          s.omega(0), s.omega(1), s.omega(2), s.m(0),     s.m(1),
                          s.m(2),     s.b_body(0), s.b_body(1), s.b_body(2)};
    for (std::size_t i = 0; i < std::size(row); ++i) {
      if (i) out << ',';
      out << format_double(row[i]);
    }
    out << '\n';
  }
}

inline Metrics cmd_simulate(const Scenario& s, const std::string& out_path, std::ostream& out) {
  const SimConfig cfg = sim_config_of(s);
  const Trajectory traj = run_closed_loop(cfg);
  {
    std::ofstream csv(out_path);
    if (!csv) throw ValidationError("cannot write '" + out_path + "'");
    write_csv(traj, csv);
  }
  const Metrics m = metrics(traj);
  out << "controller:     " << to_string(cfg.controller.kind) << "\n"
      << "samples:        " << traj.samples.size() << " -> " << out_path << "\n"
      << "final time:     " << format_double(m.final_time) << " s\n"
      << "final |omega|:  " << format_double(m.final_omega) << " rad/s\n"
      << "final |q_v|:    " << format_double(m.final_qv) << "\n"
      << "max |m|:        " << format_double(m.max_dipole) << " A m^2\n"
      << "settle time:    "
      << (m.settle_time ? format_double(*m.settle_time) + " s" : std::string("not settled"))
      << "\n";
  return m;
}

struct LavReport {
  Mat3 l_average = Mat3::Zero();
  Mat3 l_average_zero = Mat3::Zero();
  Vec3 zero_eigenvalues = Vec3::Zero();
  /// ||L_av(T) - L_av^0|| / ||L_av^0||.
  double relative_gap = 0.0;
};

inline LavReport cmd_lav(const Scenario& s, double period, std::ostream& out) {
  const OrbitSpec orbit = orbit_of(s);
  LavReport r;
  r.l_average = l_average(orbit, period, averaging_of(s));
  r.l_average_zero = l_average_zero(orbit);
  r.zero_eigenvalues =
      Eigen::SelfAdjointEigenSolver<Mat3>(r.l_average_zero, Eigen::EigenvaluesOnly).eigenvalues();
  const double scale = spectral_norm(r.l_average_zero);
  r.relative_gap = scale > 0.0 ? spectral_norm(r.l_average - r.l_average_zero) / scale : 0.0;

  auto print = [&](const Mat3& m) {
    for (int i = 0; i < 3; ++i) out << "  " << detail::join(m.row(i)) << "\n";
  };
  out << "L_av(T), T = " << format_double(period) << " s:\n";
  print(r.l_average);
  out << "L_av^0:\n";
  print(r.l_average_zero);
  out << "L_av^0 eigenvalues: " << detail::join(r.zero_eigenvalues) << "\n"
      << "min eigenvalue:     " << format_double(r.zero_eigenvalues(0)) << "\n"
      << "relative gap:       " << format_double(r.relative_gap) << "\n";
  return r;
}

}  // namespace magstab
