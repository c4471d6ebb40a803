#pragma once

/**
 * @file
 * @brief Levenberg-Marquardt for min g(x)^T g(x) with the accept/reject
 * damping rule: lambda / 10 after a decrease, lambda * 10 otherwise.
 *
 * Step: x - (J^T J + lambda I)^{-1} J^T g, solved with a sparse LDL^T
 * factorization (J is block banded).
 *
 * Where the residual at the minimum is far from zero the Gauss-Newton
 * matrix can misjudge the curvature badly in a few directions, and the
 * damping rule then settles into slow linear convergence.  When a damped
 * trial changes the objective by less than `newton_trigger` (relative) the
 * solver tries Newton steps with a Hessian obtained by differencing the
 * analytic gradient J^T g.  A failed Newton step hands control back to the
 * damped iteration, which then runs 1, 2, 4, ... accepted steps before the
 * next attempt.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "../errors.hpp"
#include "assemble.hpp"

namespace rotinterp::minaccel {

struct LmOptions
{
  double lambda0{0.01};
  double lambda_min{1e-12};
  double lambda_max{1e12};
  double gradient_tolerance{1e-10};  ///< on ||J^T g||_inf
  double stall_tolerance{1e-14};     ///< relative objective decrease
  int stall_steps{5};                ///< consecutive accepted steps below it
  int max_iterations{500};
  bool newton_steps{true};       ///< allow Newton steps with a differenced Hessian
  double newton_trigger{1e-3};   ///< relative objective change that prompts one
  int newton_rejects{6};         ///< consecutive rejected Newton trials before falling back
};

struct LmTraceEntry
{
  int iteration;
  double objective;  ///< at the trial point (inf if it left the domain)
  double lambda;     ///< damping used for this trial (0 for Newton steps)
  bool accepted;
  bool newton{false};
};

enum class LmStop
{
  gradient,   ///< ||J^T g||_inf below tolerance
  stalled,    ///< relative decrease below tolerance on consecutive steps
  step_floor,     ///< rejected step smaller than rounding of x
  rounding_floor  ///< ||J^T g|| near eps ||H|| ||x|| and Newton steps stop contracting
};

inline const char * stop_name(LmStop s)
{
  switch (s) {
    case LmStop::gradient:
      return "gradient";
    case LmStop::stalled:
      return "stalled";
    case LmStop::step_floor:
      return "step_floor";
    case LmStop::rounding_floor:
      return "rounding_floor";
  }
  return "unknown";
}

struct LmResult
{
  Eigen::VectorXd x;
  double objective{0.0};
  double gradient_norm{0.0};
  int iterations{0};
  LmStop reason{LmStop::gradient};
  std::vector<LmTraceEntry> trace;
};

/// Iteration cap reached; carries the best iterate and the trace.
class LmNonConvergence : public ConvergenceError
{
public:
  LmNonConvergence(const std::string & what, LmResult best) : ConvergenceError(what), best_(std::move(best)) {}
  [[nodiscard]] const LmResult & best() const { return best_; }

private:
  LmResult best_;
};

/// g (and J when the flag is set) at x.
using ResidualFunction = std::function<ResidualSystem(const Eigen::VectorXd &, bool)>;

inline double inf_norm(const Eigen::VectorXd & v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

/**
 * Hessian of g^T g / 2 by central differences of J^T g.  Its sparsity is
 * that of J^T J; columns are grouped by a greedy distance-2 colouring so
 * that each group needs a single pair of gradient evaluations.
 */
inline Eigen::SparseMatrix<double> fd_hessian(const ResidualFunction & f,
                                              const Eigen::VectorXd & x,
                                              const Eigen::SparseMatrix<double> & jac,
                                              double rel_step = 1e-6)
{
  using SpMat        = Eigen::SparseMatrix<double>;
  const SpMat jtj    = SpMat(jac.transpose() * jac);
  const auto n       = static_cast<int>(x.size());
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    for (SpMat::InnerIterator it(jtj, c); it; ++it) {
      adj[static_cast<std::size_t>(c)].push_back(static_cast<int>(it.row()));
    }
  }
  std::vector<int> color(static_cast<std::size_t>(n), -1);
  int colors = 0;
  for (int c = 0; c < n; ++c) {
    std::vector<char> used(static_cast<std::size_t>(colors) + 1, 0);
    for (int a : adj[static_cast<std::size_t>(c)]) {
      for (int b : adj[static_cast<std::size_t>(a)]) {
        if (color[static_cast<std::size_t>(b)] >= 0) {
          used[static_cast<std::size_t>(color[static_cast<std::size_t>(b)])] = 1;
        }
      }
    }
    int k = 0;
    while (used[static_cast<std::size_t>(k)] != 0) {
      ++k;
    }
    color[static_cast<std::size_t>(c)] = k;
    colors                             = std::max(colors, k + 1);
  }

  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < colors; ++k) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (int c = 0; c < n; ++c) {
      if (color[static_cast<std::size_t>(c)] == k) {
        d(c) = rel_step * std::max(1.0, std::abs(x(c)));
      }
    }
    const ResidualSystem sp = f(x + d, true);
    const ResidualSystem sm = f(x - d, true);
    const Eigen::VectorXd dg =
        Eigen::VectorXd(sp.jac.transpose() * sp.g) - Eigen::VectorXd(sm.jac.transpose() * sm.g);
    for (int c = 0; c < n; ++c) {
      if (color[static_cast<std::size_t>(c)] == k) {
        for (int r : adj[static_cast<std::size_t>(c)]) {
          trip.emplace_back(r, c, dg(r) / (2.0 * d(c)));
        }
      }
    }
  }
  SpMat h(n, n);
  h.setFromTriplets(trip.begin(), trip.end());
  const SpMat ht = h.transpose();
  return 0.5 * (h + ht);
}

/**
 * A trial point outside the projection domain counts as a rejected step.
 * A failure at the starting point is re-raised.
 */
inline LmResult lm_solve(const ResidualFunction & f, Eigen::VectorXd x0, const LmOptions & opt = {})
{
  using SpMat          = Eigen::SparseMatrix<double>;
  constexpr double inf = std::numeric_limits<double>::infinity();
  LmResult res;
  res.x                = std::move(x0);
  ResidualSystem sys   = f(res.x, true);
  res.objective        = sys.objective();
  Eigen::VectorXd grad = sys.jac.transpose() * sys.g;
  res.gradient_norm    = inf_norm(grad);
  const auto n         = res.x.size();

  double lambda           = opt.lambda0;
  int stall               = 0;
  bool newton             = false;
  int newton_wait         = 0;  // accepted damped steps before the next Newton attempt
  int newton_backoff      = 1;
  int newton_rejects      = 0;
  double last_newton_step = inf;
  double mu               = 0.0;  // damping of the Newton steps
  double mu_scale         = 1.0;
  double floor            = 0.0;
  bool hess_valid         = false;
  SpMat hess;

  SpMat eye(n, n);
  eye.setIdentity();
  Eigen::SimplicialLDLT<SpMat> ldlt;

  const auto adopt = [&](Eigen::VectorXd x, double obj, ResidualSystem && next) {
    res.x             = std::move(x);
    res.objective     = obj;
    sys               = std::move(next);
    grad              = sys.jac.transpose() * sys.g;
    res.gradient_norm = inf_norm(grad);
  };

  for (int it = 1; it <= opt.max_iterations; ++it) {
    if (res.gradient_norm <= opt.gradient_tolerance) {
      res.reason = LmStop::gradient;
      return res;
    }
    res.iterations = it;

    if (newton) {
      if (!hess_valid) {
        hess = fd_hessian(f, res.x, sys.jac);
        // ||J^T g|| that rounding of x alone can produce.
        Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(n);
        for (int c = 0; c < hess.outerSize(); ++c) {
          for (SpMat::InnerIterator h_it(hess, c); h_it; ++h_it) {
            row_sum(h_it.row()) += std::abs(h_it.value());
          }
        }
        floor = 100.0 * std::numeric_limits<double>::epsilon() * inf_norm(row_sum) * std::max(1.0, inf_norm(res.x));
        mu_scale   = inf_norm(Eigen::VectorXd(hess.diagonal()));
        hess_valid = true;
      }
      const bool at_floor = res.gradient_norm <= floor;

      bool ok          = false;
      double step_norm = 0.0;
      double trial_obj = inf;
      ldlt.compute(SpMat(hess + mu * eye));
      if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) {
        const Eigen::VectorXd step  = ldlt.solve(grad);
        const Eigen::VectorXd trial = res.x - step;
        step_norm                   = inf_norm(step);
        try {
          ResidualSystem trial_sys = f(trial, true);
          trial_obj                = trial_sys.objective();
          const double trial_grad  = inf_norm(Eigen::VectorXd(trial_sys.jac.transpose() * trial_sys.g));
          // Close to the minimum the objective only moves at rounding level
          // and the gradient is the better judge; at the floor the stiff
          // components cannot shrink further but soft ones still can.
          const bool by_gradient = trial_grad < res.gradient_norm || (at_floor && trial_grad <= floor);
          ok = std::isfinite(trial_obj) &&
               (trial_obj < res.objective || (by_gradient && trial_obj <= res.objective * (1.0 + 1e-12)));
          if (ok) {
            adopt(trial, trial_obj, std::move(trial_sys));
          }
        } catch (const ProjectionDomainError &) {
          trial_obj = inf;
        }
      }
      res.trace.push_back({it, trial_obj, mu, ok, true});
      if (at_floor && (!ok || step_norm >= 0.5 * last_newton_step)) {
        res.reason = LmStop::rounding_floor;
        return res;
      }
      if (ok) {
        hess_valid       = false;
        last_newton_step = mu == 0.0 ? step_norm : inf;
        mu               = mu <= 1e-6 * mu_scale ? 0.0 : mu / 10.0;
        newton_rejects   = 0;
        newton_backoff   = 1;
        continue;
      }
      last_newton_step = inf;
      mu               = mu == 0.0 ? 1e-6 * mu_scale : mu * 10.0;
      if (++newton_rejects < opt.newton_rejects) {
        continue;
      }
      newton         = false;
      newton_rejects = 0;
      newton_wait    = newton_backoff;
      newton_backoff *= 2;
      if (res.gradient_norm <= 1e3 * opt.gradient_tolerance) {
        res.reason = LmStop::stalled;
        return res;
      }
      continue;
    }

    const SpMat lhs = SpMat(sys.jac.transpose() * sys.jac) + lambda * eye;
    ldlt.compute(lhs);
    if (ldlt.info() != Eigen::Success) {
      throw SingularityError("lm_solve: damped normal matrix could not be factored");
    }
    const Eigen::VectorXd step  = ldlt.solve(grad);
    const Eigen::VectorXd trial = res.x - step;

    double trial_obj = inf;
    ResidualSystem trial_sys;
    bool in_domain = true;
    try {
      trial_sys = f(trial, true);
      trial_obj = trial_sys.objective();
    } catch (const ProjectionDomainError &) {
      in_domain = false;
    }
    const bool accepted = in_domain && std::isfinite(trial_obj) && trial_obj < res.objective;
    res.trace.push_back({it, trial_obj, lambda, accepted, false});
    const bool small_change = in_domain && std::abs(trial_obj - res.objective) <= opt.newton_trigger * res.objective;
    mu                      = 0.0;

    if (accepted) {
      const double decrease = res.objective - trial_obj;
      stall                 = decrease <= opt.stall_tolerance * res.objective ? stall + 1 : 0;
      newton_wait           = std::max(newton_wait - 1, 0);
      newton                = opt.newton_steps && newton_wait == 0 && small_change;
      hess_valid            = false;
      adopt(trial, trial_obj, std::move(trial_sys));
      lambda = std::max(lambda / 10.0, opt.lambda_min);
      if (stall >= opt.stall_steps) {
        res.reason = LmStop::stalled;
        return res;
      }
    } else {
      newton = opt.newton_steps && newton_wait == 0 && small_change;
      if (step.norm() <= 1e-14 * (res.x.norm() + 1e-14)) {
        res.reason = LmStop::step_floor;
        return res;
      }
      lambda = std::min(lambda * 10.0, opt.lambda_max);
    }
  }
  if (res.gradient_norm <= opt.gradient_tolerance) {
    res.reason = LmStop::gradient;
    return res;
  }
  throw LmNonConvergence("lm_solve: no convergence within " + std::to_string(opt.max_iterations) + " iterations",
                         res);
}

}  // namespace rotinterp::minaccel
