#pragma once

/**
 * @file
 * @brief Workflows behind the `rotinterp` command-line tool.
 *
 * Sample CSV columns: t, then r11..r33 (row by row) or qw,qx,qy,qz, then
 * the angular velocity wx,wy,wz and its derivative ax,ay,az in the body
 * frame, then optionally the sphere trace sx,sy,sz = R(t) v_0.  The
 * angular velocity is vee(R^T dR/dt) for both representations, i.e. twice
 * the quaternion rate Im(u^{-1} du/dt).
 */

#include <cmath>
#include <cstdio>
#include <exception>
#include <future>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../errors.hpp"
#include "../interp_matrix.hpp"
#include "../interp_quat.hpp"
#include "../minaccel/lm.hpp"
#include "../minaccel/solve.hpp"
#include "spec.hpp"

namespace rotinterp::harness {

enum ExitCode : int
{
  exit_ok          = 0,
  exit_failure     = 1,
  exit_spec        = 2,
  exit_convergence = 3,
  exit_domain      = 4,
};

/// Exit code for an exception escaping a command.
inline int exit_code_for(const std::exception & e)
{
  if (dynamic_cast<const SpecError *>(&e) != nullptr || dynamic_cast<const PreconditionError *>(&e) != nullptr ||
      dynamic_cast<const DimensionError *>(&e) != nullptr || dynamic_cast<const json::exception *>(&e) != nullptr) {
    return exit_spec;
  }
  if (dynamic_cast<const ConvergenceError *>(&e) != nullptr) {
    return exit_convergence;
  }
  if (dynamic_cast<const ProjectionDomainError *>(&e) != nullptr ||
      dynamic_cast<const ZeroQuaternionError *>(&e) != nullptr ||
      dynamic_cast<const SingularityError *>(&e) != nullptr ||
      dynamic_cast<const IllConditionedLogError *>(&e) != nullptr) {
    return exit_domain;
  }
  return exit_failure;
}

/// %.17g
inline std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CurveSample
{
  double t;
  Mat3 r;
  std::optional<Quaternion> u;  ///< set for quaternion curves
  Vec3 omega;
  Vec3 omega_dot;
};

inline std::string sample_header(minaccel::Method m, bool sphere)
{
  std::string h = "t";
  if (m == minaccel::Method::matrix) {
    for (int i = 1; i <= 3; ++i) {
      for (int j = 1; j <= 3; ++j) {
        h += ",r" + std::to_string(i) + std::to_string(j);
      }
    }
  } else {
    h += ",qw,qx,qy,qz";
  }
  h += ",wx,wy,wz,ax,ay,az";
  if (sphere) {
    h += ",sx,sy,sz";
  }
  return h;
}

inline void write_samples(std::ostream & out,
                          minaccel::Method m,
                          const std::vector<CurveSample> & samples,
                          const std::optional<Vec3> & v0)
{
  out << sample_header(m, v0.has_value()) << '\n';
  for (const CurveSample & s : samples) {
    out << num(s.t);
    if (m == minaccel::Method::matrix) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          out << ',' << num(s.r(i, j));
        }
      }
    } else {
      out << ',' << num(s.u->w) << ',' << num(s.u->xyz(0)) << ',' << num(s.u->xyz(1)) << ',' << num(s.u->xyz(2));
    }
    for (int i = 0; i < 3; ++i) {
      out << ',' << num(s.omega(i));
    }
    for (int i = 0; i < 3; ++i) {
      out << ',' << num(s.omega_dot(i));
    }
    if (v0) {
      const Vec3 p = s.r * *v0;
      out << ',' << num(p(0)) << ',' << num(p(1)) << ',' << num(p(2));
    }
    out << '\n';
  }
}

/// Abscissae s = i / m on each element, plus the final knot.
template <typename F>
std::vector<CurveSample> sample_elements(const Partition & part, int per_element, F && eval_on)
{
  if (per_element < 1) {
    throw SpecError("samples-per-element must be at least 1");
  }
  std::vector<CurveSample> out;
  for (int k = 0; k < part.elements(); ++k) {
    for (int i = 0; i < per_element; ++i) {
      const double s = static_cast<double>(i) / per_element;
      out.push_back(eval_on(k, s, part.global(k, s)));
    }
  }
  out.push_back(eval_on(part.elements() - 1, 1.0, part.back()));
  return out;
}

inline CurveSample from_matrix(double t, const RotationSample<3> & r)
{
  return {t, r.r, std::nullopt, vee(r.omega), vee(r.omega_dot)};
}

inline CurveSample from_quat(double t, const QuatSample & q)
{
  return {t, quat_to_matrix(q.u), q.u, 2.0 * q.omega, 2.0 * q.omega_dot};
}

namespace detail {

inline Quaternion quat_of(const Mat3 & r) { return matrix_to_quat(r); }

/// u_dot = u (0, w / 2) for the angular velocity w = vee(R^T dR).
inline Quaternion quat_rate_of(const Mat3 & r, const Mat3 & r_dot)
{
  return matrix_to_quat(r) * Quaternion::pure(0.5 * vee(skew_part((r.transpose() * r_dot).eval())));
}

}  // namespace detail

/// Samples of the interpolant described by `spec`.
inline std::vector<CurveSample> run_interp(const InterpSpec & spec, int per_element)
{
  const Partition & part = spec.partition;
  const double nan       = std::numeric_limits<double>::quiet_NaN();
  const Vec3 no_acc(nan, nan, nan);

  if (spec.mode == InterpMode::lagrange) {
    const AnalyticCurve & c = *spec.curve;
    if (spec.method == minaccel::Method::matrix) {
      const auto curve = interpolate_lagrange<3>(part, spec.degree, c.r);
      return sample_elements(part, per_element, [&](int, double, double t) {
        const auto [r, r_dot] = curve.evaluate_with_velocity(t);
        return CurveSample{t, r, std::nullopt, vee(skew_part((r.transpose() * r_dot).eval())), no_acc};
      });
    }
    const auto curve = interpolate_quat_lagrange(part, spec.degree, [&](double t) { return detail::quat_of(c.r(t)); });
    const LagrangeBasis basis(spec.degree);
    return sample_elements(part, per_element, [&](int k, double s, double t) {
      const auto phi  = basis.values(s);
      const auto dphi = basis.derivatives(s);
      Quaternion q    = Quaternion::zero();
      Quaternion dq   = Quaternion::zero();
      for (int i = 0; i <= spec.degree; ++i) {
        const Quaternion & node = curve.nodes()[static_cast<std::size_t>(k * spec.degree + i)];
        q += phi[static_cast<std::size_t>(i)] * node;
        dq += (dphi[static_cast<std::size_t>(i)] / part.width(k)) * node;
      }
      const Quaternion u = project_s3(q);
      return CurveSample{t, quat_to_matrix(u), u, 2.0 * (quat_inv(q) * dq).xyz, no_acc};
    });
  }

  if (spec.method == minaccel::Method::matrix) {
    std::optional<HermiteRotationCurve<3>> curve;
    if (spec.curve) {
      curve.emplace(interpolate_hermite<3>(part, spec.curve->r, spec.curve->r_dot));
    } else {
      std::vector<Mat3> vel;
      for (const Vec3 & w : spec.omega) {
        vel.push_back(hat(w));
      }
      curve.emplace(part, spec.rotations, std::move(vel));
    }
    return sample_elements(part, per_element,
                           [&](int k, double s, double t) { return from_matrix(t, curve->evaluate_on(k, s)); });
  }

  std::optional<HermiteQuatCurve> curve;
  if (spec.curve) {
    const AnalyticCurve & c = *spec.curve;
    curve.emplace(interpolate_quat_hermite(
        part, [&](double t) { return detail::quat_of(c.r(t)); },
        [&](double t) { return detail::quat_rate_of(c.r(t), c.r_dot(t)); }));
  } else {
    std::vector<Quaternion> u;
    std::vector<Vec3> w;
    for (std::size_t k = 0; k < spec.rotations.size(); ++k) {
      u.push_back(matrix_to_quat(spec.rotations[k]));
      w.push_back(0.5 * spec.omega[k]);
    }
    curve.emplace(part, std::move(u), std::move(w));
  }
  return sample_elements(part, per_element,
                         [&](int k, double s, double t) { return from_quat(t, curve->evaluate_on(k, s)); });
}

inline std::vector<CurveSample> sample_solution(const minaccel::SolutionCurve & curve, int per_element)
{
  return sample_elements(curve.partition(), per_element, [&](int k, double s, double t) {
    return curve.method() == minaccel::Method::matrix ? from_matrix(t, curve.matrix_curve().evaluate_on(k, s))
                                                      : from_quat(t, curve.quat_curve().evaluate_on(k, s));
  });
}

inline json trace_json(const minaccel::MinAccelSolution & sol)
{
  json steps = json::array();
  for (const minaccel::LmTraceEntry & e : sol.lm.trace) {
    steps.push_back({{"iteration", e.iteration},
                     {"objective", std::isfinite(e.objective) ? json(e.objective) : json(nullptr)},
                     {"lambda", e.lambda},
                     {"accepted", e.accepted},
                     {"newton", e.newton}});
  }
  return {{"method", minaccel::method_name(sol.problem.method)},
          {"n", sol.problem.elements()},
          {"periodic", sol.problem.periodic},
          {"iterations", sol.lm.iterations},
          {"objective", sol.lm.objective},
          {"gradient_norm", sol.lm.gradient_norm},
          {"stop", minaccel::stop_name(sol.lm.reason)},
          {"trace", steps}};
}

/// Largest |R(tau_j) v_0 - v_j| over the targets.
inline double constraint_residual(const minaccel::MinAccelSolution & sol)
{
  double worst = 0.0;
  for (const minaccel::Target & t : sol.problem.targets) {
    worst = std::max(worst, (sol.curve.rotation(t.time) * sol.problem.v0() - t.direction).norm());
  }
  return worst;
}

inline minaccel::MinAccelSolution run_minaccel(const MinAccelSpec & spec)
{
  return minaccel::solve_minaccel_cascade(spec.problem, spec.lm);
}

/// The spec's problem on a uniform partition with n elements.
inline minaccel::MinAccelProblem with_elements(const MinAccelSpec & spec, int n)
{
  minaccel::MinAccelProblem p = spec.problem;
  p.partition                 = Partition::uniform(spec.problem.partition.front(), spec.problem.partition.back(), n);
  minaccel::target_knots(p);
  return p;
}

struct ConvergenceRow
{
  int n;
  double l2;
  double l2_order;  ///< NaN on the first row
  double h1;
  double h1_order;
};

struct ConvergenceTable
{
  std::vector<ConvergenceRow> rows;
  bool complete{true};
  std::string failure;
};

inline void write_table(std::ostream & out, const ConvergenceTable & table)
{
  out << "N,l2,l2_order,h1,h1_order\n";
  for (const ConvergenceRow & r : table.rows) {
    out << r.n << ',' << num(r.l2) << ',' << num(r.l2_order) << ',' << num(r.h1) << ',' << num(r.h1_order) << '\n';
  }
  if (!table.complete) {
    out << "# incomplete: " << table.failure << '\n';
  }
}

/**
 * Errors of the solutions at each N of `spec.converge_n` against the
 * solution at `spec.reference_n`.  The coarse solves run concurrently; rows
 * are in the order of the list.  With `self_test` a final row compares the
 * reference with itself.  A failed solve ends the table early and rethrows
 * after `on_partial` has seen the incomplete table.
 */
template <typename OnPartial>
ConvergenceTable run_converge(const MinAccelSpec & spec, bool self_test, OnPartial && on_partial)
{
  const std::vector<int> & ns = spec.converge_n;
  if (ns.empty()) {
    throw SpecError("converge: empty N list");
  }
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 1 || (i > 0 && ns[i] != 2 * ns[i - 1])) {
      throw SpecError("converge: N list must be dyadic (each entry twice the previous)");
    }
  }
  if (ns.back() >= spec.reference_n) {
    throw SpecError("converge: largest N must be below the reference N");
  }
  std::vector<minaccel::MinAccelProblem> problems;
  for (int n : ns) {
    problems.push_back(with_elements(spec, n));
  }
  const minaccel::MinAccelProblem ref_problem = with_elements(spec, spec.reference_n);

  ConvergenceTable table;
  const auto fail = [&](const std::exception & e) {
    table.complete = false;
    table.failure  = e.what();
    on_partial(table);
  };

  std::optional<minaccel::MinAccelSolution> ref;
  try {
    ref.emplace(minaccel::solve_minaccel_cascade(ref_problem, spec.lm));
  } catch (const std::exception & e) {
    fail(e);
    throw;
  }

  std::vector<std::future<minaccel::MinAccelSolution>> jobs;
  for (const auto & p : problems) {
    jobs.push_back(std::async(std::launch::async, [&spec, p] { return minaccel::solve_minaccel_cascade(p, spec.lm); }));
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      const minaccel::MinAccelSolution sol = jobs[i].get();
      const minaccel::ErrorNorms e         = minaccel::measure_error(sol.curve, ref->curve);
      ConvergenceRow row{ns[i], e.l2, nan, e.h1, nan};
      if (!table.rows.empty()) {
        row.l2_order = std::log2(table.rows.back().l2 / e.l2);
        row.h1_order = std::log2(table.rows.back().h1 / e.h1);
      }
      table.rows.push_back(row);
    } catch (const std::exception & e) {
      for (std::size_t k = i + 1; k < jobs.size(); ++k) {
        try {
          jobs[k].get();
        } catch (...) {
        }
      }
      fail(e);
      throw;
    }
  }
  if (self_test) {
    const minaccel::ErrorNorms e = minaccel::measure_error(ref->curve, ref->curve);
    table.rows.push_back({spec.reference_n, e.l2, nan, e.h1, nan});
  }
  on_partial(table);
  return table;
}

inline ConvergenceTable run_converge(const MinAccelSpec & spec, bool self_test = false)
{
  return run_converge(spec, self_test, [](const ConvergenceTable &) {});
}

}  // namespace rotinterp::harness
