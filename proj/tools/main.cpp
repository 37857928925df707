#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "msts: multivariate structural time series modeling and signal "
      "extraction"};
  app.require_subcommand(1);
  msts::cli::CommandOptions opt;

  long seed_arg = -1;
  int window_arg = -1, grid_arg = -1, horizon_arg = -1, span_arg = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out-dir", opt.out_dir, "output directory");
    sub->add_flag("--quiet", opt.quiet, "suppress console reports");
  };

  CLI::App* fit = app.add_subcommand("fit", "fit a declared model");
  fit->add_option("--config", opt.config_path, "configuration file")
      ->required();
  fit->add_option("--method", opt.method, "mle or mom");
  add_common(fit);

  CLI::App* diagnose =
      app.add_subcommand("diagnose", "residual diagnostics of a fit");
  diagnose->add_option("--bundle", opt.bundle_path, "fit bundle")->required();
  add_common(diagnose);

  CLI::App* extract =
      app.add_subcommand("extract", "signal extraction from a fit");
  extract->add_option("--bundle", opt.bundle_path, "fit bundle")->required();
  extract->add_option("--config", opt.config_path,
                      "configuration with an extract section");
  extract->add_option("--window", window_arg, "filter truncation half-width");
  extract->add_option("--grid", grid_arg, "frequency mesh size");
  extract->add_option("--horizon", horizon_arg, "signal cast horizon");
  extract->add_flag("--frf", opt.want_frf, "emit frequency response meshes");
  extract->add_flag("--wk-coeffs", opt.want_wk_coeffs,
                    "emit filter coefficient files");
  add_common(extract);

  CLI::App* cast = app.add_subcommand("cast", "forecasts and aftcasts");
  cast->add_option("--bundle", opt.bundle_path, "fit bundle")->required();
  cast->add_option("--span", span_arg, "aftcast/forecast span");
  add_common(cast);

  CLI::App* filters =
      app.add_subcommand("filters", "seasonal adjustment filter files");
  filters->add_option("--config", opt.config_path, "configuration file")
      ->required();
  add_common(filters);

  CLI::App* simulate = app.add_subcommand("simulate", "simulate a model");
  simulate->add_option("--config", opt.config_path, "configuration file")
      ->required();
  simulate->add_option("--seed", seed_arg, "random seed");
  add_common(simulate);

  CLI11_PARSE(app, argc, argv);
  if (window_arg >= 0) opt.window = window_arg;
  if (grid_arg > 0) opt.grid = grid_arg;
  if (horizon_arg >= 0) opt.horizon = horizon_arg;
  if (span_arg >= 0) opt.span = span_arg;
  if (seed_arg >= 0) opt.seed = seed_arg;

  try {
    if (fit->parsed()) return msts::cli::cmd_fit(opt);
    if (diagnose->parsed()) return msts::cli::cmd_diagnose(opt);
    if (extract->parsed()) return msts::cli::cmd_extract(opt);
    if (cast->parsed()) return msts::cli::cmd_cast(opt);
    if (filters->parsed()) return msts::cli::cmd_filters(opt);
    if (simulate->parsed()) return msts::cli::cmd_simulate(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
