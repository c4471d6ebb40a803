#pragma once

/**
 * @file
 * @brief End-to-end minimum-acceleration solve, the resulting C^1 curve,
 * and L^2 / H^1 error measurement against a reference curve.
 */

#include <cmath>
#include <iterator>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "../interp_matrix.hpp"
#include "../interp_quat.hpp"
#include "assemble.hpp"
#include "lm.hpp"
#include "problem.hpp"
#include "quadrature.hpp"

namespace rotinterp::minaccel {

/// Decoded solution curve in the representation the problem was solved in.
class SolutionCurve
{
public:
  SolutionCurve(const MinAccelProblem & p, const NodalData & nodes) : method_(p.method)
  {
    if (method_ == Method::matrix) {
      std::vector<Mat3> vel;
      for (const Vec3 & w : nodes.omega) {
        vel.push_back(hat(w));
      }
      matrix_.emplace(p.partition, nodes.rotations, std::move(vel));
    } else {
      quat_.emplace(p.partition, nodes.quaternions, nodes.omega, false);
    }
  }

  [[nodiscard]] Method method() const { return method_; }
  [[nodiscard]] const Partition & partition() const
  {
    return matrix_ ? matrix_->partition() : quat_->partition();
  }
  [[nodiscard]] const HermiteRotationCurve<3> & matrix_curve() const { return *matrix_; }
  [[nodiscard]] const HermiteQuatCurve & quat_curve() const { return *quat_; }

  /// Rotation matrix at t (either representation).
  [[nodiscard]] Mat3 rotation(double t) const
  {
    return matrix_ ? matrix_->evaluate(t).r : quat_to_matrix(quat_->evaluate(t).u);
  }

  /// Embedded value and its t-derivative as flat vectors: the 9 matrix
  /// entries for the matrix method, the 4 quaternion components otherwise.
  [[nodiscard]] std::pair<Eigen::VectorXd, Eigen::VectorXd> embedded_on(int k, double s) const
  {
    if (matrix_) {
      const RotationSample<3> r = matrix_->evaluate_on(k, s);
      return {Eigen::Map<const Eigen::VectorXd>(r.r.data(), 9), Eigen::Map<const Eigen::VectorXd>(r.r_dot.data(), 9)};
    }
    const QuatSample q = quat_->evaluate_on(k, s);
    return {q.u.vector(), q.u_dot.vector()};
  }

  [[nodiscard]] std::pair<Eigen::VectorXd, Eigen::VectorXd> embedded(double t) const
  {
    const int k = partition().locate(t);
    return embedded_on(k, partition().local(k, t));
  }

private:
  Method method_;
  std::optional<HermiteRotationCurve<3>> matrix_;
  std::optional<HermiteQuatCurve> quat_;
};

struct MinAccelSolution
{
  MinAccelProblem problem;
  ReferenceSequence reference;
  NodalData nodes;
  LmResult lm;
  SolutionCurve curve;
};

namespace detail {

/// The b with exp_so3(b) = e closest to `hint`.  Solutions are a (theta +
/// 2 pi m) for the principal axis a and angle theta; the axis is taken
/// from (e + I) / 2 = a a^T near theta = pi.
inline Vec3 log_so3_near(const Mat3 & e, const Vec3 & hint)
{
  const Vec3 w       = vee((e - e.transpose()).eval());
  const double sin_t = 0.5 * w.norm();
  const double theta = std::atan2(sin_t, 0.5 * (e.trace() - 1.0));
  if (theta < 1e-4) {
    return log_so3(e);
  }
  Vec3 axis;
  if (std::numbers::pi - theta > 1e-3) {
    axis = w / (2.0 * sin_t);
  } else {
    const Mat3 aa = 0.5 * (e + Mat3::Identity());
    int col       = 0;
    aa.diagonal().maxCoeff(&col);
    axis = aa.col(col).normalized();
    const double ref = w.norm() > 1e-12 ? w.dot(axis) : hint.dot(axis);
    if (ref < 0.0) {
      axis = -axis;
    }
  }
  const double m = std::round((axis.dot(hint) - theta) / (2.0 * std::numbers::pi));
  return axis * (theta + 2.0 * std::numbers::pi * m);
}

/// The b with quat_exp(b) = e closest to `hint` (period 4 pi along the axis).
inline Vec3 quat_log_near(const Quaternion & e, const Vec3 & hint)
{
  const double n   = e.xyz.norm();
  const double phi = 2.0 * std::atan2(n, e.w);
  if (phi < 1e-4) {
    return quat_log(e);
  }
  Vec3 axis;
  if (n > 1e-12) {
    axis = e.xyz / n;
  } else if (hint.norm() > 0.0) {
    axis = hint.normalized();  // e = -1: every axis works at angle 2 pi
  } else {
    axis = Vec3::UnitX();
  }
  const double m = std::round((axis.dot(hint) - phi) / (4.0 * std::numbers::pi));
  return axis * (phi + 4.0 * std::numbers::pi * m);
}

}  // namespace detail

/**
 * Unknowns of `fine` that reproduce `coarse` at the fine knots: nodal
 * values and body rates are sampled from the coarse curve and expressed
 * relative to the fine reference sequence.  The logarithm branch at each
 * knot is the one nearest the previous knot's, so that a solution that
 * winds away from the reference is followed continuously.  Used to
 * warm-start refined solves.
 */
inline Eigen::VectorXd prolong(const SolutionCurve & coarse, const MinAccelProblem & fine)
{
  if (coarse.method() != fine.method) {
    throw PreconditionError("prolong: coarse and fine problems use different methods");
  }
  const UnknownLayout layout  = UnknownLayout(fine);
  const ReferenceSequence ref = build_reference(fine);
  UnknownCollections c        = UnknownCollections::zeros(layout.elements() + 1);
  Vec3 hint                   = Vec3::Zero();
  for (int k = 0; k <= layout.elements(); ++k) {
    const auto kk  = static_cast<std::size_t>(k);
    const double t = fine.partition.knot(k);
    Vec3 b         = Vec3::Zero();
    if (fine.method == Method::matrix) {
      const RotationSample<3> r = coarse.matrix_curve().evaluate(t);
      c.omega[kk]               = vee(r.omega);
      if (layout.y_size(k) > 0) {
        b = detail::log_so3_near((ref.rotations[kk].transpose() * r.r).eval(), hint);
      }
    } else {
      const QuatSample q = coarse.quat_curve().evaluate(t);
      c.omega[kk]        = q.omega;
      if (layout.y_size(k) > 0) {
        b = detail::quat_log_near(quat_conj(ref.quaternions[kk]) * q.u, hint);
      }
    }
    if (layout.y_size(k) > 0) {
      hint = b;
    }
    c.b[kk]    = b;
    c.beta[kk] = b.dot(fine.v0());
  }
  return pack(layout, c);
}

/// build_reference -> lm_solve -> decoded curve.  Starts from
/// `initial_guess` unless `x0` is given.
inline MinAccelSolution solve_minaccel(const MinAccelProblem & p,
                                       const LmOptions & opt            = {},
                                       std::optional<Eigen::VectorXd> x0 = std::nullopt)
{
  const UnknownLayout layout    = UnknownLayout(p);
  const ReferenceSequence ref   = build_reference(p);
  const ResidualFunction f      = [&](const Eigen::VectorXd & x, bool jac) { return assemble(p, layout, ref, x, jac); };
  LmResult lm                   = lm_solve(f, x0 ? *x0 : initial_guess(p, layout, ref), opt);
  NodalData nodes               = decode_nodes(p, layout, ref, lm.x);
  SolutionCurve curve(p, nodes);
  return {p, ref, std::move(nodes), std::move(lm), std::move(curve)};
}

/**
 * Problem on every other knot of `p`, or nullopt when that would drop a
 * target time or leave fewer than `min_elements` elements.
 */
inline std::optional<MinAccelProblem> coarsen(const MinAccelProblem & p, int min_elements)
{
  const int n = p.elements();
  if (n % 2 != 0 || n / 2 < min_elements) {
    return std::nullopt;
  }
  for (const Target & t : p.targets) {
    const int k = p.partition.knot_index(t.time);
    if (k < 0 || k % 2 != 0) {
      return std::nullopt;
    }
  }
  std::vector<double> knots;
  for (int k = 0; k <= n; k += 2) {
    knots.push_back(p.partition.knot(k));
  }
  MinAccelProblem coarse = p;
  coarse.partition       = Partition(std::move(knots));
  return coarse;
}

/**
 * Solve on the coarsest of the successively halved partitions (at least
 * `min_elements` elements) and warm-start each finer level from the one
 * below.  The damped iteration from `initial_guess` needs many more
 * iterations as N grows; this keeps each level to a handful.
 */
inline MinAccelSolution solve_minaccel_cascade(const MinAccelProblem & p,
                                               const LmOptions & opt = {},
                                               int min_elements      = 16)
{
  std::vector<MinAccelProblem> levels{p};
  while (auto c = coarsen(levels.back(), min_elements)) {
    levels.push_back(std::move(*c));
  }
  MinAccelSolution sol = solve_minaccel(levels.back(), opt);
  for (auto it = std::next(levels.rbegin()); it != levels.rend(); ++it) {
    sol = solve_minaccel(*it, opt, prolong(sol.curve, *it));
  }
  return sol;
}

struct ErrorNorms
{
  double l2;
  double h1;  ///< seminorm: derivative error only
};

/**
 * (int |X - X_ref|^2)^{1/2} and (int |X' - X_ref'|^2)^{1/2} in the
 * embedding of `curve` (Frobenius for matrices, R^4 for quaternions),
 * with a `points`-point Gauss rule on each element of `curve`'s partition.
 */
inline ErrorNorms measure_error(const SolutionCurve & curve, const SolutionCurve & reference, int points = 4)
{
  const QuadratureRule rule = gauss_legendre(points);
  const Partition & part    = curve.partition();
  double l2 = 0.0;
  double h1 = 0.0;
  for (int k = 0; k < part.elements(); ++k) {
    const double h = part.width(k);
    for (int q = 0; q < rule.size(); ++q) {
      const double t      = part.global(k, rule.nodes[static_cast<std::size_t>(q)]);
      const auto [x, dx]  = curve.embedded(t);
      const auto [y, dy]  = reference.embedded(t);
      const double w      = h * rule.weights[static_cast<std::size_t>(q)];
      l2 += w * (x - y).squaredNorm();
      h1 += w * (dx - dy).squaredNorm();
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

}  // namespace rotinterp::minaccel
