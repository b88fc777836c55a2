#include "ivspline/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include "ivspline/errors.hpp"

namespace ivspline {

namespace {

// minimize t f(x) - sum_{i < positive} log x_i - sum_k log(C x + d)_k
// subject to eq' x = 1.
struct BarrierProblem {
  Eigen::Index positive = 0;
  Eigen::MatrixXd c;
  Eigen::VectorXd d;
  Eigen::VectorXd eq;
  std::function<double(const Eigen::VectorXd&)> value;
  // Gradient and the diagonal of a diagonal Hessian.
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::VectorXd&)> derivatives;
};

struct CenterResult {
  int steps = 0;
  double decrement_sq = 0.0;
  bool converged = false;
};

bool interior(const BarrierProblem& bp, const Eigen::VectorXd& x) {
  return (x.head(bp.positive).array() > 0.0).all() && ((bp.c * x + bp.d).array() > 0.0).all();
}

double barrier_value(const BarrierProblem& bp, const Eigen::VectorXd& x, double t) {
  if (!interior(bp, x)) return std::numeric_limits<double>::infinity();
  return t * bp.value(x) - x.head(bp.positive).array().log().sum() - (bp.c * x + bp.d).array().log().sum();
}

double max_step(const Eigen::VectorXd& slack, const Eigen::VectorXd& direction) {
  double s = 1.0;
  for (Eigen::Index k = 0; k < direction.size(); ++k)
    if (direction(k) < 0.0) s = std::min(s, -0.99 * slack(k) / direction(k));
  return s;
}

// Equality-constrained damped Newton for one barrier weight t.
CenterResult center(const BarrierProblem& bp, Eigen::VectorXd& x, double t, double decrement_stop, int max_steps) {
  const Eigen::Index dim = x.size();
  const Eigen::Index pos = bp.positive;
  CenterResult res;
  Eigen::VectorXd grad(dim), hess_diag(dim);
  Eigen::MatrixXd h(dim, dim);
  for (res.steps = 0; res.steps < max_steps; ++res.steps) {
    const Eigen::VectorXd slack = bp.c * x + bp.d;
    const Eigen::VectorXd inv_slack = slack.cwiseInverse();
    bp.derivatives(x, grad, hess_diag);

    Eigen::VectorXd g = t * grad - bp.c.transpose() * inv_slack;
    g.head(pos) -= x.head(pos).cwiseInverse();
    // Components along eq only move the multiplier; dropping them avoids
    // cancellation once t is large.
    g -= bp.eq * (bp.eq.dot(g) / bp.eq.squaredNorm());
    const Eigen::MatrixXd scaled = inv_slack.asDiagonal() * bp.c;
    h.setZero();
    h.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
    h.diagonal() += t * hess_diag;
    h.diagonal().head(pos) += x.head(pos).cwiseInverse().cwiseAbs2();

    Eigen::LDLT<Eigen::MatrixXd> ldlt(h.selfadjointView<Eigen::Lower>());
    const Eigen::VectorXd hinv_g = ldlt.solve(g);
    const Eigen::VectorXd hinv_a = ldlt.solve(bp.eq);
    const double nu = -bp.eq.dot(hinv_g) / bp.eq.dot(hinv_a);
    const Eigen::VectorXd step = -(hinv_g + nu * hinv_a);
    if (!step.allFinite()) break;

    // Decrement in units of the objective f, i.e. divided by t, so the stopping
    // rule does not tighten as t grows past what double precision resolves.
    res.decrement_sq = step.dot(h.selfadjointView<Eigen::Lower>() * step) / t;
    if (res.decrement_sq / 2.0 <= decrement_stop) {
      res.converged = true;
      return res;
    }

    double s = std::min(max_step(x.head(pos), step.head(pos)), max_step(slack, bp.c * step));
    if (res.decrement_sq * t < 1e-6) {
      // Inside the quadratic region rounding in phi swamps the Armijo test.
      x += s * step;
    } else {
      const double phi = barrier_value(bp, x, t);
      while (s > 1e-12) {
        if (barrier_value(bp, x + s * step, t) <= phi - 0.25 * s * res.decrement_sq * t) break;
        s *= 0.5;
      }
      if (s <= 1e-12) break;
      x += s * step;
    }
    // Re-project onto the equality constraint against drift.
    x += bp.eq * ((1.0 - bp.eq.dot(x)) / bp.eq.squaredNorm());
  }
  return res;
}

Eigen::MatrixXd drop_null_rows(const Eigen::MatrixXd& g, std::vector<Eigen::Index>& kept) {
  const double scale = g.size() > 0 ? g.cwiseAbs().maxCoeff() : 0.0;
  kept.clear();
  for (Eigen::Index k = 0; k < g.rows(); ++k)
    if (scale > 0.0 && g.row(k).cwiseAbs().maxCoeff() > 1e-14 * scale) kept.push_back(k);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(kept.size()), g.cols());
  for (std::size_t r = 0; r < kept.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = g.row(kept[r]);
  return out;
}

// Maximizes the smallest normalized slack over the simplex; returns a strictly
// feasible point or throws InfeasibleError.
Eigen::VectorXd phase_one(const Eigen::MatrixXd& g, const std::vector<Eigen::Index>& kept, const TiltOptions& opt,
                          int& steps) {
  const Eigen::Index n = g.cols();
  const Eigen::Index m = g.rows();
  Eigen::MatrixXd gn = g;
  for (Eigen::Index k = 0; k < m; ++k) gn.row(k) /= gn.row(k).cwiseAbs().maxCoeff();

  BarrierProblem bp;
  bp.positive = n;
  bp.c = Eigen::MatrixXd::Zero(m, n + 1);
  bp.c.leftCols(n) = gn;
  bp.c.col(n).setConstant(-1.0);
  bp.d = Eigen::VectorXd::Zero(m);
  bp.eq = Eigen::VectorXd::Ones(n + 1);
  bp.eq(n) = 0.0;
  bp.value = [n](const Eigen::VectorXd& x) { return -x(n); };
  bp.derivatives = [n](const Eigen::VectorXd&, Eigen::VectorXd& grad, Eigen::VectorXd& hess_diag) {
    grad.setZero();
    grad(n) = -1.0;
    hess_diag.setZero();
  };

  Eigen::VectorXd x(n + 1);
  x.head(n).setConstant(1.0 / static_cast<double>(n));
  x(n) = (gn * x.head(n)).minCoeff() - 1.0;

  double mu = opt.barrier_start;
  for (int outer = 0; outer < opt.max_outer && mu >= opt.barrier_stop; ++outer, mu *= opt.barrier_shrink) {
    steps += center(bp, x, 1.0 / mu, opt.decrement_stop, opt.max_inner).steps;
    if (x(n) > 0.0) return x.head(n);
  }

  const Eigen::VectorXd slack = gn * x.head(n);
  Eigen::Index worst = 0;
  slack.minCoeff(&worst);
  const auto knot = kept[static_cast<std::size_t>(worst)];
  std::ostringstream msg;
  msg << "monotonicity constraints are infeasible; most violated constraint is the derivative at knot " << knot
      << " (best normalized slack " << slack(worst) << ")";
  throw InfeasibleError(msg.str(), static_cast<int>(knot), slack(worst));
}

Eigen::VectorXd objective_gradient(const Eigen::VectorXd& p) {
  const double root_n = std::sqrt(static_cast<double>(p.size()));
  return (-root_n / 2.0) * p.cwiseSqrt().cwiseInverse();
}

// Max-norm KKT residual for multipliers nu (simplex) and v (constraints).
double kkt_residual(const Eigen::MatrixXd& g, const Eigen::VectorXd& p, double nu, const Eigen::VectorXd& v,
                    double complementarity) {
  const Eigen::VectorXd grad = objective_gradient(p);
  const Eigen::VectorXd stationarity = grad - Eigen::VectorXd::Constant(p.size(), nu) - g.transpose() * v;
  const Eigen::VectorXd slack = g * p;
  double primal = std::max(std::abs(p.sum() - 1.0), std::max(0.0, -p.minCoeff()));
  if (slack.size() > 0) primal = std::max(primal, std::max(0.0, -slack.minCoeff()));
  const double dual = v.size() > 0 ? std::max(0.0, -v.minCoeff()) : 0.0;
  return std::max({stationarity.cwiseAbs().maxCoeff() / (1.0 + grad.cwiseAbs().maxCoeff()), complementarity, primal,
                   dual});
}

struct Polished {
  Eigen::VectorXd p;
  double nu = 0.0;
  Eigen::VectorXd v;
};

// Newton on the equality-constrained problem with the active set held fixed.
std::optional<Polished> solve_active(const Eigen::MatrixXd& g, const std::vector<Eigen::Index>& active,
                                     Eigen::VectorXd p) {
  const Eigen::Index n = p.size();
  const auto na = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd b(na + 1, n);
  b.row(0).setOnes();
  for (Eigen::Index r = 0; r < na; ++r) b.row(r + 1) = g.row(active[static_cast<std::size_t>(r)]);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(na + 1);
  rhs(0) = 1.0;

  const double root_n = std::sqrt(static_cast<double>(n));
  Eigen::VectorXd y;
  for (int iter = 0; iter < 50; ++iter) {
    const Eigen::VectorXd grad = objective_gradient(p);
    const Eigen::VectorXd hinv = (4.0 / root_n) * p.array().pow(1.5).matrix();
    const Eigen::MatrixXd bh = b * hinv.asDiagonal();
    const Eigen::MatrixXd schur = bh * b.transpose();
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(schur);
    if (qr.rank() < schur.rows()) return std::nullopt;
    y = qr.solve(rhs - b * p + bh * grad);
    const Eigen::VectorXd step = hinv.cwiseProduct(b.transpose() * y - grad);
    if (!step.allFinite()) return std::nullopt;
    const double s = max_step(p, step);
    p += s * step;
    if (s == 1.0 && step.cwiseAbs().maxCoeff() <= 1e-15 * p.cwiseAbs().maxCoeff()) break;
  }
  Polished out{p, y(0), Eigen::VectorXd::Zero(g.rows())};
  for (Eigen::Index r = 0; r < na; ++r) out.v(active[static_cast<std::size_t>(r)]) = y(r + 1);
  return out;
}

// Refines the barrier solution by guessing the active set from the
// central-path duals and correcting it one constraint at a time.
std::optional<Polished> polish(const Eigen::MatrixXd& g, const Eigen::VectorXd& p, double mu) {
  const Eigen::Index m = g.rows();
  const Eigen::VectorXd slack = g * p;
  const double grad_scale = objective_gradient(p).cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> active;
  for (Eigen::Index k = 0; k < m; ++k) {
    const double normalized_dual = mu / slack(k) * g.row(k).cwiseAbs().sum() / grad_scale;
    if (normalized_dual > 1e-3) active.push_back(k);
  }
  const double tol = 1e-13 * (m > 0 ? g.cwiseAbs().rowwise().sum().maxCoeff() : 0.0);
  for (int round = 0; round < 20; ++round) {
    auto pol = solve_active(g, active, p);
    if (!pol || (pol->p.array() <= 0.0).any()) return std::nullopt;
    Eigen::Index worst_dual = 0;
    const double min_dual = m > 0 ? pol->v.minCoeff(&worst_dual) : 0.0;
    if (min_dual < 0.0) {
      active.erase(std::find(active.begin(), active.end(), worst_dual));
      continue;
    }
    const Eigen::VectorXd s = g * pol->p;
    Eigen::Index worst_slack = 0;
    if (m > 0 && s.minCoeff(&worst_slack) < -tol) {
      active.push_back(worst_slack);
      continue;
    }
    return pol;
  }
  return std::nullopt;
}

}  // namespace

double tilt_objective(const Eigen::VectorXd& p) {
  const double n = static_cast<double>(p.size());
  return n - (n * p.array().max(0.0)).sqrt().sum();
}

TiltWeights solve_tilt(const Eigen::MatrixXd& constraints, const TiltOptions& opt) {
  const Eigen::Index n = constraints.cols();
  if (n < 1) throw InputError(ErrorKind::size, "tilt: no observations");
  const double nd = static_cast<double>(n);
  std::vector<Eigen::Index> kept;
  const Eigen::MatrixXd g = drop_null_rows(constraints, kept);
  const Eigen::Index m = g.rows();

  TiltWeights out;
  Eigen::VectorXd p = Eigen::VectorXd::Constant(n, 1.0 / nd);
  if (opt.start) {
    if (opt.start->size() != n) throw InputError(ErrorKind::dimension, "tilt: start vector length mismatch");
    p = *opt.start / opt.start->sum();
    if ((p.array() <= 0.0).any() || (m > 0 && (g * p).minCoeff() <= 0.0)) {
      throw InputError(ErrorKind::invalid_argument, "tilt: start vector is not strictly feasible");
    }
  } else if (m > 0 && (g * p).minCoeff() <= 0.0) {
    p = phase_one(g, kept, opt, out.newton_steps);
    out.phase_one_used = true;
  }

  BarrierProblem bp;
  bp.positive = n;
  bp.c = g;
  bp.d = Eigen::VectorXd::Zero(m);
  bp.eq = Eigen::VectorXd::Ones(n);
  bp.value = [](const Eigen::VectorXd& x) { return tilt_objective(x); };
  bp.derivatives = [](const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::VectorXd& hess_diag) {
    grad = objective_gradient(x);
    hess_diag = -0.5 * grad.cwiseProduct(x.cwiseInverse());
  };

  double mu = opt.barrier_start;
  CenterResult last;
  int outer = 0;
  for (; outer < opt.max_outer; ++outer) {
    last = center(bp, p, 1.0 / mu, opt.decrement_stop, opt.max_inner);
    out.newton_steps += last.steps;
    if (mu < opt.barrier_stop && last.converged) break;
    mu *= opt.barrier_shrink;
  }
  if (outer == opt.max_outer || !p.allFinite()) {
    std::ostringstream msg;
    msg << "tilt solver stalled after " << out.newton_steps << " Newton steps (barrier " << mu << ", decrement^2 "
        << last.decrement_sq << ", objective " << tilt_objective(p) << ")";
    throw SolverError(ErrorKind::solver_stall, msg.str());
  }

  // Central-path duals: v_k = mu / s_k.
  const Eigen::VectorXd slack = g * p;
  Eigen::VectorXd v = mu * slack.cwiseInverse();
  Eigen::VectorXd resid = objective_gradient(p) - g.transpose() * v - mu * p.cwiseInverse();
  double nu = resid.mean();
  out.p = p;
  out.kkt_residual = kkt_residual(g, p, nu, v, mu);

  if (const auto pol = polish(g, p, mu)) {
    const double r = kkt_residual(g, pol->p, pol->nu, pol->v, 0.0);
    if (r <= out.kkt_residual) {
      out.p = pol->p;
      out.kkt_residual = r;
    }
  }
  out.objective = tilt_objective(out.p);

  const Eigen::VectorXd final_slack = g * out.p;
  for (Eigen::Index k = 0; k < m; ++k)
    if (final_slack(k) <= 1e-7 * g.row(k).cwiseAbs().sum()) out.active_constraints.push_back(kept[static_cast<std::size_t>(k)]);
  return out;
}

Eigen::MatrixXd derivative_smoother_matrix(const IvSplineProblem& problem, double lambda) {
  const Eigen::Index n = problem.size();
  const Eigen::MatrixXd op = problem.coefficient_operator(lambda);
  Eigen::MatrixXd l = problem.design().d * op.topRows(n);
  l.rowwise() += op.row(n + 1);
  return l;
}

Eigen::MatrixXd derivative_smoother_matrix(const Dataset& ds, double lambda, const KernelSpec& spec) {
  check_lambda(lambda);
  return derivative_smoother_matrix(IvSplineProblem(ds, spec), lambda);
}

TiltWeights tilt(const IvSplineProblem& problem, double lambda, MonotoneDirection dir, const TiltOptions& options) {
  const Eigen::MatrixXd l = derivative_smoother_matrix(problem, lambda);
  const Eigen::MatrixXd g = direction_sign(dir) * (l * problem.data().y.asDiagonal());
  return solve_tilt(g, options);
}

TiltWeights tilt(const Dataset& ds, double lambda, const KernelSpec& spec, MonotoneDirection dir,
                 const TiltOptions& options) {
  check_lambda(lambda);
  return tilt(IvSplineProblem(ds, spec), lambda, dir, options);
}

MonotoneFit fit_monotone(const IvSplineProblem& problem, double lambda, MonotoneDirection dir,
                         const TiltOptions& options) {
  MonotoneFit out;
  out.weights = tilt(problem, lambda, dir, options);
  const double n = static_cast<double>(problem.size());
  const Eigen::VectorXd tilted = n * out.weights.p.cwiseProduct(problem.data().y);
  out.fit = problem.fit(lambda, tilted);
  return out;
}

SplineFit fit_monotone(const Dataset& ds, double lambda, const KernelSpec& spec, MonotoneDirection dir) {
  check_lambda(lambda);
  return fit_monotone(IvSplineProblem(ds, spec), lambda, dir).fit;
}

}  // namespace ivspline
