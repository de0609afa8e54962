// magstab: sampling-period design and closed-loop simulation of magnetic
// attitude control with piecewise-constant dipole moments.
//
//   magstab design   --config case.toml [--kind state|output] [--report r.json]
//   magstab simulate --config case.toml --out traj.csv
//   magstab lav      --config case.toml [--T 20]

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "magstab/commands.hpp"

namespace {

int run(const std::function<void()>& body) {
  using namespace magstab;
  try {
    body();
    return kExitOk;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DesignFailure& e) {
    std::cerr << "design failure: " << e.what() << "\n";
    return kExitDesignFailure;
  } catch (const SimulationDivergence& e) {
    std::cerr << "simulation diverged: " << e.what() << " (last valid t = " << e.last_valid_time()
              << " s)\n";
    return kExitDivergence;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitDesignFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace magstab;
  CLI::App app{"Magnetic attitude control with piecewise-constant dipole moments"};
  app.require_subcommand(1);

  std::string config;
  std::string kind;
  std::string report_path;
  auto* design = app.add_subcommand("design", "Assumption 1 check, T* search and eps0 bound");
  design->add_option("--config", config, "scenario file")->required();
  design->add_option("--kind", kind, "feedback kind (default: from the scenario controller)")
      ->check(CLI::IsMember({"state", "output"}));
  design->add_option("--report", report_path, "write the design report as JSON");

  std::string out_path;
  auto* simulate = app.add_subcommand("simulate", "closed-loop simulation to CSV");
  simulate->add_option("--config", config, "scenario file")->required();
  simulate->add_option("--out", out_path, "CSV output path")->required();

  std::optional<double> lav_period;
  auto* lav = app.add_subcommand("lav", "print L_av(T), L_av^0 and its eigenvalues");
  lav->add_option("--config", config, "scenario file")->required();
  lav->add_option("--T", lav_period, "sampling period (default: scenario T)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  return run([&] {
    const Scenario s = parse_scenario(config);
    if (design->parsed()) {
      FeedbackKind k = is_output_feedback(s.kind) ? FeedbackKind::output : FeedbackKind::state;
      if (!kind.empty()) k = kind == "state" ? FeedbackKind::state : FeedbackKind::output;
      const DesignReport r = cmd_design(s, k, std::cout);
      if (!report_path.empty()) {
        std::ofstream f(report_path);
        if (!f) throw ValidationError("cannot write '" + report_path + "'");
        f << to_json(r).dump(2) << "\n";
      }
    } else if (simulate->parsed()) {
      cmd_simulate(s, out_path, std::cout);
    } else {
      const double period = lav_period ? *lav_period : s.T.value_or(0.0);
      if (!(period > 0.0)) throw ValidationError("lav needs --T or a scenario T > 0");
      cmd_lav(s, period, std::cout);
    }
  });
}
