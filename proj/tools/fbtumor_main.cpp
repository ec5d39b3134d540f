// fbtumor: spherically symmetric free-boundary tumor solver.
//
// Command-line front end. All argument handling lives here; the work is done
// by fbtumor::cli::run so tests can drive the same code without a process.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fbtumor/cli.hpp"

namespace {

void add_param_flags(CLI::App* cmd, fbtumor::cli::RunConfig& cfg) {
  cmd->add_option("--config", cfg.config_path, "JSON parameter file");
  cmd->add_option("--sigma-bar", cfg.sigma_bar, "external nutrient level");
  cmd->add_option("--beta", cfg.beta, "boundary transfer coefficient");
  cmd->add_option("--nu", cfg.nu, "necrotic dissolution rate");
  cmd->add_option("--sigma-D", cfg.sigma_D, "necrotic threshold concentration");
  cmd->add_option("--f-kind", cfg.f_kind, "consumption law: linear|michaelis_menten");
  cmd->add_option("--f-lambda", cfg.f_lambda, "linear consumption coefficient");
  cmd->add_option("--f-vmax", cfg.f_vmax, "Michaelis-Menten saturation rate");
  cmd->add_option("--f-k", cfg.f_k, "Michaelis-Menten half-saturation constant");
  cmd->add_option("--g-kind", cfg.g_kind, "proliferation law: linear");
  cmd->add_option("--g-mu", cfg.g_mu, "linear proliferation coefficient");
  cmd->add_option("--g-sigma-tilde", cfg.g_sigma_tilde, "proliferation break-even level");
  cmd->add_option("--tol", cfg.tol, "solver tolerance");
  cmd->add_option("--out", cfg.out_path, "write the primary artifact here instead of stdout");
  cmd->add_option("--format", cfg.format, "output format: csv|json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"free-boundary tumor growth solver"};
  app.require_subcommand(1);

  fbtumor::cli::RunConfig cfg;

  CLI::App* validate = app.add_subcommand("validate", "check parameters against the model assumptions");
  add_param_flags(validate, cfg);

  CLI::App* profile = app.add_subcommand("profile", "solve the nutrient profile at a fixed radius");
  add_param_flags(profile, cfg);
  profile->add_option("--R", cfg.R, "tumor radius")->required();
  profile->add_option("--eta", cfg.eta, "necrotic interface in scaled coordinates");
  profile->add_flag("--physical", cfg.physical,
                    "assemble the full state and emit sigma(r) on [0, R]");

  CLI::App* crit = app.add_subcommand("critical-radius", "radius where a necrotic core first forms");
  add_param_flags(crit, cfg);

  CLI::App* stationary = app.add_subcommand("stationary", "dormant state and its classification");
  add_param_flags(stationary, cfg);

  CLI::App* thresholds = app.add_subcommand("thresholds", "nutrient thresholds separating the dormant regimes");
  add_param_flags(thresholds, cfg);

  CLI::App* evolve = app.add_subcommand("evolve", "integrate the radius forward in time");
  add_param_flags(evolve, cfg);
  evolve->add_option("--R0", cfg.R0, "initial radius")->required();
  evolve->add_option("--t-end", cfg.t_end, "integration horizon")->required();
  evolve->add_option("--eps", cfg.convergence_eps, "relative stationary-convergence window");
  evolve->add_option("--max-steps", cfg.max_steps, "step budget");

  CLI::App* fate = app.add_subcommand("fate", "long-run outcome from an initial radius");
  add_param_flags(fate, cfg);
  fate->add_option("--R0", cfg.R0, "initial radius")->required();
  fate->add_option("--eps", cfg.convergence_eps, "relative stationary-convergence window");
  fate->add_option("--max-steps", cfg.max_steps, "step budget");

  CLI::App* sweep = app.add_subcommand("sweep", "run one command across a parameter grid");
  add_param_flags(sweep, cfg);
  sweep->add_option("--axis", cfg.axis, "parameter to vary: sigma_bar|beta|nu|R0")->required();
  sweep->add_option("--from", cfg.from, "first grid value")->required();
  sweep->add_option("--to", cfg.to, "last grid value")->required();
  sweep->add_option("--count", cfg.count, "number of grid points")->required();
  sweep->add_option("--command", cfg.sweep_command,
                    "operation per grid point: stationary|critical-radius|fate")
      ->required();
  sweep->add_option("--R0", cfg.R0, "initial radius for fate sweeps");
  sweep->add_option("--eps", cfg.convergence_eps, "relative stationary-convergence window");
  sweep->add_option("--max-steps", cfg.max_steps, "step budget per grid point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : fbtumor::cli::kExitBadConfig;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  return fbtumor::cli::run(cfg, std::cout, std::cerr);
}
