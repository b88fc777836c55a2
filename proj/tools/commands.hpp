#pragma once

#include <CLI11.hpp>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ivspline::cli {

struct FitOptions {
  std::string input;
  std::string y = "y";
  std::string z = "z";
  std::vector<std::string> w{"w"};
  double lambda = 0.0;
  bool cv = false;
  std::string monotone = "none";
  std::uint64_t seed = 0;
  double variance = 1.0;
  bool raw_instruments = false;
  int grid_points = 200;
  std::string grid_out;
  std::string out;
};

struct SimulateOptions {
  int g = 1;
  long n = 200;
  double rho_ev = 0.5;
  double rho_wz = 0.9;
  int reps = 200;
  std::uint64_t seed = 0;
  bool constrained = false;
  unsigned threads = 0;
  std::string out_dir = ".";
};

struct PlotOptions {
  std::vector<std::string> inputs;
  std::string out;
  std::string title;
};

void add_fit_options(CLI::App& cmd, FitOptions& opts);
void add_simulate_options(CLI::App& cmd, SimulateOptions& opts);
void add_plot_options(CLI::App& cmd, PlotOptions& opts);

int run_fit(const FitOptions& opts, const std::vector<std::string>& argv, std::ostream& out);
int run_simulate(const SimulateOptions& opts, const std::vector<std::string>& argv, std::ostream& out);
int run_plot(const PlotOptions& opts, std::ostream& out);

}  // namespace ivspline::cli
