#include "cli.hpp"

#include <algorithm>
#include <ostream>

#include "commands.hpp"
#include "ivspline/errors.hpp"
#include "ivspline/version.hpp"

namespace ivspline::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Smoothing-spline instrumental variable regression", "ivspline"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  FitOptions fit_opts;
  SimulateOptions sim_opts;
  PlotOptions plot_opts;
  CLI::App* fit = app.add_subcommand("fit", "Fit a curve to a CSV dataset");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo study on simulated data");
  CLI::App* plot = app.add_subcommand("plot", "Overlay curve CSV files in one SVG");
  add_fit_options(*fit, fit_opts);
  add_simulate_options(*simulate, sim_opts);
  add_plot_options(*plot, plot_opts);

  try {
    // CLI11 consumes the vector from the back.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInput;
  }

  try {
    if (fit->parsed()) return run_fit(fit_opts, args, out);
    if (simulate->parsed()) return run_simulate(sim_opts, args, out);
    return run_plot(plot_opts, out);
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace ivspline::cli
