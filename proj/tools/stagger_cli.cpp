// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "stagger/stagger.hpp"

namespace {

constexpr int usage_exit = 64;

stagger::SimConfig load_config(const std::string& path, std::optional<unsigned long> seed) {
  std::ifstream in(path);
  if (!in) throw stagger::Error(stagger::ErrorKind::io, "cannot read config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  stagger::SimConfig c = stagger::parse_config(text.str());
  if (seed) c.seed = *seed;
  return c;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staggered explicit elastodynamics with dissipative internal variables"};
  app.require_subcommand(0, 1);
  std::optional<unsigned long> seed;
  bool quiet = false;
  std::string out_dir;
  app.add_option("--seed", seed, "seed for randomized checks");
  app.add_flag("--quiet", quiet, "suppress the summary");
  app.add_option("--out-dir", out_dir, "output directory, overrides output.out_dir");
  bool check_flag = false;
  app.add_flag("--check", check_flag, "run the acceptance suite");

  std::string config_path;
  int levels = 4;
  auto* run = app.add_subcommand("run", "run a simulation");
  run->add_option("config", config_path, "configuration file")->required();
  auto* cfl = app.add_subcommand("cfl", "print the largest stable time step");
  cfl->add_option("config", config_path, "configuration file")->required();
  auto* conv = app.add_subcommand("converge", "time-step refinement study");
  conv->add_option("config", config_path, "configuration file")->required();
  conv->add_option("--levels", levels, "number of refinement levels")->check(CLI::Range(2, 12));
  auto* check = app.add_subcommand("check", "run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : usage_exit;
  }

  if (!check_flag && app.get_subcommands().empty()) {
    std::cerr << app.help();
    return usage_exit;
  }

  try {
    if (*run) {
      const stagger::SimConfig c = load_config(config_path, seed);
      const stagger::RunSummary r = stagger::simulate(c, {quiet, out_dir});
      if (!quiet) std::cout << stagger::format_summary(r);
      else if (r.exit_code != 0) std::cerr << r.message << "\n";
      return r.exit_code;
    }
    if (*cfl) {
      const stagger::SimConfig c = load_config(config_path, seed);
      const stagger::Discretization d = stagger::make_discretization(c);
      const auto m = stagger::make_material(c.material);
      const stagger::CflEstimate e = stagger::estimate_cfl(d, *m, c.integrator.eta);
      std::cout << "tau_max: " << stagger::detail::fmt(e.tau_max) << "\nlambda: " << stagger::detail::fmt(e.lambda)
                << "\neta: " << stagger::detail::fmt(c.integrator.eta) << "\n";
      if (c.integrator.tau && *c.integrator.tau > e.tau_max) {
        std::cout << "configured tau " << stagger::detail::fmt(*c.integrator.tau) << " exceeds tau_max\n";
        return static_cast<int>(stagger::ErrorKind::cfl);
      }
      return 0;
    }
    if (*conv) {
      const stagger::SimConfig c = load_config(config_path, seed);
      const stagger::ConvergenceReport rep = stagger::converge(c, levels);
      std::cout << rep.table() << "\n" << stagger::convergence_rows(rep);
      return 0;
    }
    if (*check || check_flag) {
      bool ok = true;
      stagger::acceptance::run_all(seed.value_or(1), [&](const stagger::acceptance::Result& r) {
        ok = ok && r.pass;
        if (!quiet || !r.pass) std::cout << stagger::acceptance::format(r) << std::endl;
      });
      return ok ? 0 : 1;
    }
  } catch (const stagger::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return usage_exit;
}
