#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "cli.hpp"
#include "commands.hpp"
#include "ivspline/errors.hpp"
#include "ivspline/monotone.hpp"
#include "ivspline/selection.hpp"
#include "ivspline/solver.hpp"
#include "ivspline/version.hpp"

namespace ivspline::cli {

namespace {

using json = nlohmann::ordered_json;

std::vector<std::string> split_columns(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const std::string& item : raw) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

/// Sorted knots merged with equispaced points across the knot range.
std::vector<double> curve_points(const Eigen::VectorXd& knots, int extra) {
  std::vector<double> zs = to_vector(knots);
  const double lo = knots.minCoeff();
  const double hi = knots.maxCoeff();
  for (int k = 0; k < extra; ++k) zs.push_back(lo + (hi - lo) * k / std::max(1, extra - 1));
  std::sort(zs.begin(), zs.end());
  zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
  return zs;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError(ErrorKind::schema, "cannot write \"" + path + "\"");
  f << text;
}

}  // namespace

void add_fit_options(CLI::App& cmd, FitOptions& opts) {
  cmd.add_option("--input", opts.input, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  cmd.add_option("--y", opts.y, "outcome column")->capture_default_str();
  cmd.add_option("--z", opts.z, "endogenous regressor column")->capture_default_str();
  cmd.add_option("--w", opts.w, "instrument column(s); repeat or separate with commas")->capture_default_str();
  auto* lambda = cmd.add_option("--lambda", opts.lambda, "smoothing parameter")->check(CLI::PositiveNumber);
  auto* cv = cmd.add_flag("--cv", opts.cv, "choose lambda by 2-fold cross-validation");
  lambda->excludes(cv);
  cmd.add_option("--monotone", opts.monotone, "shape restriction")
      ->check(CLI::IsMember({"none", "increasing", "decreasing"}))
      ->capture_default_str();
  cmd.add_option("--seed", opts.seed, "fold assignment seed")->capture_default_str();
  cmd.add_option("--kernel-variance", opts.variance, "variance of the Laplace weight")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_flag("--raw-instruments", opts.raw_instruments, "do not standardize instruments");
  cmd.add_option("--grid-points", opts.grid_points, "equispaced curve points added to the knots")
      ->check(CLI::Range(2, 100000))
      ->capture_default_str();
  cmd.add_option("--grid-out", opts.grid_out, "curve CSV (z,ghat,ghat_prime)");
  cmd.add_option("--out", opts.out, "fit artifact (JSON)")->required();
}

int run_fit(const FitOptions& opts, const std::vector<std::string>& argv, std::ostream& out) {
  if (!opts.cv && !(opts.lambda > 0.0)) {
    throw InputError(ErrorKind::invalid_argument, "give either --lambda or --cv");
  }
  ColumnMap columns{opts.y, opts.z, split_columns(opts.w)};
  if (columns.w.empty()) throw InputError(ErrorKind::invalid_argument, "no instrument columns given");
  const Dataset ds = load_csv(opts.input, columns);

  KernelSpec spec;
  spec.variance = opts.variance;
  spec.standardize = !opts.raw_instruments;

  json artifact;
  double lambda = opts.lambda;
  if (opts.cv) {
    CvConfig cfg;
    cfg.seed = opts.seed;
    const CvResult cv = cross_validate(ds, spec, cfg);
    lambda = cv.lambda_star;
    json curve = json::array();
    for (const CvPoint& pt : cv.curve) curve.push_back({pt.lambda, pt.valid ? json(pt.criterion) : json(nullptr)});
    artifact["cv"] = {{"folds", cfg.folds},
                      {"seed", cfg.seed},
                      {"lambda_star", cv.lambda_star},
                      {"criterion_weights", cv.criterion_weights},
                      {"fold_assignment", cv.fold_assignment},
                      {"curve", curve}};
  }

  const IvSplineProblem problem(ds, spec);
  SplineFit fit;
  if (opts.monotone == "none") {
    fit = problem.fit(lambda);
  } else {
    const auto dir = opts.monotone == "increasing" ? MonotoneDirection::increasing : MonotoneDirection::decreasing;
    const MonotoneFit mf = fit_monotone(problem, lambda, dir);
    fit = mf.fit;
    json active = json::array();
    for (Eigen::Index k : mf.weights.active_constraints) active.push_back(k);
    artifact["monotone"] = {{"direction", opts.monotone},
                            {"weights", to_vector(mf.weights.p)},
                            {"objective", mf.weights.objective},
                            {"kkt_residual", mf.weights.kkt_residual},
                            {"active_constraints", active},
                            {"phase_one_used", mf.weights.phase_one_used}};
  }

  const std::vector<double> zs = curve_points(fit.knots, opts.grid_points);
  json curve = json::array();
  for (double z : zs) curve.push_back({z, evaluate(fit, z), evaluate_derivative(fit, z)});

  json result;
  result["lambda"] = fit.lambda;
  result["lambda_source"] = opts.cv ? "cv" : "fixed";
  result["a"] = {fit.a(0), fit.a(1)};
  result["delta"] = to_vector(fit.delta);
  result["knots"] = to_vector(fit.knots);
  result["kernel"] = {{"family", "laplace"}, {"variance", spec.variance}, {"standardize", spec.standardize}};
  result["diagnostics"] = {{"mn_value", fit.diagnostics.mn_value},
                           {"roughness", fit.diagnostics.roughness},
                           {"constraint_residual", fit.diagnostics.constraint_residual},
                           {"jitter_applied", fit.diagnostics.jitter_applied},
                           {"condition_estimate", fit.diagnostics.condition_estimate}};
  for (auto& [key, value] : artifact.items()) result[key] = value;
  result["curve"] = curve;
  result["provenance"] = {{"command", "fit"}, {"argv", argv}, {"seed", opts.seed}, {"version", kVersion}};

  write_text(opts.out, result.dump(2) + "\n");
  if (!opts.grid_out.empty()) {
    std::string csv = "z,ghat,ghat_prime\n";
    char buf[128];
    for (const auto& row : curve) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", row[0].get<double>(), row[1].get<double>(),
                    row[2].get<double>());
      csv += buf;
    }
    write_text(opts.grid_out, csv);
  }

  out << "n=" << ds.size() << " lambda=" << fit.lambda << " mn=" << fit.diagnostics.mn_value
      << " roughness=" << fit.diagnostics.roughness << '\n';
  return kExitOk;
}

}  // namespace ivspline::cli
