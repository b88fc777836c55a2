#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>

#include "cli.hpp"
#include "commands.hpp"
#include "ivspline/errors.hpp"
#include "ivspline/simlab.hpp"
#include "ivspline/version.hpp"

namespace ivspline::cli {

namespace {

using json = nlohmann::ordered_json;

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

void add_simulate_options(CLI::App& cmd, SimulateOptions& opts) {
  cmd.add_option("--g", opts.g, "test function")->check(CLI::IsMember({1, 2, 3}))->capture_default_str();
  cmd.add_option("--n", opts.n, "sample size")->check(CLI::Range(3L, 1000000L))->capture_default_str();
  // Range checks on rho are left to the simulation config so the open interval is enforced exactly.
  cmd.add_option("--rho-ev", opts.rho_ev, "corr(eps, V), in (-1, 1)")->capture_default_str();
  cmd.add_option("--rho-wz", opts.rho_wz, "corr(W, Z), in (-1, 1)")->capture_default_str();
  cmd.add_option("--reps", opts.reps, "replications")->check(CLI::Range(2, 1000000))->capture_default_str();
  cmd.add_option("--seed", opts.seed, "master seed")->capture_default_str();
  cmd.add_flag("--constrained", opts.constrained, "also run the increasing-monotone estimator");
  cmd.add_option("--threads", opts.threads, "worker threads, 0 = all cores")->capture_default_str();
  cmd.add_option("--out-dir", opts.out_dir, "output directory")->capture_default_str();
}

int run_simulate(const SimulateOptions& opts, const std::vector<std::string>& argv, std::ostream& out) {
  DgpConfig dgp;
  dgp.n = opts.n;
  dgp.rho_ev = opts.rho_ev;
  dgp.rho_wz = opts.rho_wz;
  dgp.g = opts.g == 1 ? TestFunction::g1 : opts.g == 2 ? TestFunction::g2 : TestFunction::g3;
  dgp.seed = opts.seed;
  dgp.validate();

  std::error_code ec;
  std::filesystem::create_directories(opts.out_dir, ec);
  if (ec) throw InputError(ErrorKind::schema, "cannot create \"" + opts.out_dir + "\"");

  std::vector<EstimatorKind> kinds{EstimatorKind::unconstrained};
  if (opts.constrained) kinds.push_back(EstimatorKind::constrained);
  McOptions mc;
  mc.cv.seed = opts.seed;
  mc.threads = opts.threads;
  const std::vector<McReport> reports = monte_carlo(dgp, kinds, opts.reps, mc);

  // Thread count and output location do not change results, so they are left
  // out of the provenance and repeated runs stay byte-identical.
  std::vector<std::string> flags;
  for (std::size_t i = 0; i < argv.size(); ++i) {
    const std::string& a = argv[i];
    if (a == "--threads" || a == "--out-dir") {
      ++i;
      continue;
    }
    if (a.rfind("--threads=", 0) == 0 || a.rfind("--out-dir=", 0) == 0) continue;
    flags.push_back(a);
  }

  json summary;
  summary["config"] = {{"g", opts.g},     {"n", opts.n},       {"rho_ev", opts.rho_ev},
                       {"rho_wz", opts.rho_wz}, {"reps", opts.reps}, {"seed", opts.seed}};
  summary["grid"] = {{"points", 100}, {"from", -2.0}, {"to", 2.0}};
  json estimators = json::array();
  for (const McReport& r : reports) {
    const std::string file = "report_" + r.estimator_tag + ".csv";
    write_report_csv(r, (std::filesystem::path(opts.out_dir) / file).string());
    estimators.push_back({{"estimator", r.estimator_tag},
                          {"bias_sq", r.bias_sq},
                          {"variance", r.variance},
                          {"mse", r.mse},
                          {"replications", r.replications},
                          {"failures", r.failures},
                          {"variance_divisor", r.variance_divisor},
                          {"median_lambda", median(r.lambdas)},
                          {"report", file}});
    out << r.estimator_tag << ": bias_sq=" << r.bias_sq << " variance=" << r.variance << " mse=" << r.mse
        << " (" << r.replications << " ok, " << r.failures << " failed)\n";
  }
  summary["estimators"] = estimators;
  summary["provenance"] = {{"command", "simulate"}, {"argv", flags}, {"seed", opts.seed}, {"version", kVersion}};

  const auto path = std::filesystem::path(opts.out_dir) / "summary.json";
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError(ErrorKind::schema, "cannot write \"" + path.string() + "\"");
  f << summary.dump(2) << '\n';
  return kExitOk;
}

}  // namespace ivspline::cli
