#pragma once

/**
 * @file
 * @brief SO(n)-valued interpolants obtained by interpolating entrywise in
 * R^{n x n} and projecting with the polar decomposition.
 *
 *  - `LagrangeRotationCurve`: continuous, degree r in {1, 2, 3}, nodes
 *    equispaced inside each element.  Equal to the chordal geodesic finite
 *    element argmin_Q sum_i phi_i(t) ||Q - R_i||_F^2.
 *  - `HermiteRotationCurve`: C^1, nodal values R_k and body velocities
 *    O_k, with dR(t_k) = R_k O_k.
 *
 * Both are equivariant: interpolating {U R_k V} gives U R(t) V.
 */

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "liegroup.hpp"
#include "partition.hpp"
#include "polar.hpp"
#include "types.hpp"

namespace rotinterp {

namespace detail {

template <int Dim>
void require_blend_in_domain(const Matrix<Dim> & a, int element, const char * who)
{
  const double det = a.determinant();
  if (!(det > 0.0)) {
    throw ProjectionDomainError(std::string(who) + ": blend determinant " + std::to_string(det) +
                                    " <= 0 on element " + std::to_string(element),
                                element,
                                det);
  }
}

}  // namespace detail

template <int Dim>
class LagrangeRotationCurve
{
public:
  /// `nodes` holds N r + 1 rotations: node i sits at local coordinate
  /// (i mod r) / r of element i / r, endpoints shared between elements.
  LagrangeRotationCurve(Partition partition, int degree, std::vector<RotationMatrix<Dim>> nodes)
      : partition_(std::move(partition)), basis_(degree), nodes_(std::move(nodes))
  {
    const auto expected = static_cast<std::size_t>(partition_.elements() * degree + 1);
    if (nodes_.size() != expected) {
      throw DimensionError("LagrangeRotationCurve: expected " + std::to_string(expected) + " nodes");
    }
  }

  [[nodiscard]] const Partition & partition() const { return partition_; }
  [[nodiscard]] int degree() const { return basis_.degree(); }
  [[nodiscard]] const std::vector<RotationMatrix<Dim>> & nodes() const { return nodes_; }

  [[nodiscard]] double node_time(int i) const
  {
    const int r = degree();
    const int k = std::min(i / r, partition_.elements() - 1);
    return partition_.global(k, static_cast<double>(i - k * r) / r);
  }

  /// Raw entrywise interpolant sum_i phi_i(t) R_i.
  [[nodiscard]] Matrix<Dim> blend(double t) const { return blend_with_derivative(t).first; }

  /// The blend and its t-derivative.
  [[nodiscard]] std::pair<Matrix<Dim>, Matrix<Dim>> blend_with_derivative(double t) const
  {
    const int k     = partition_.locate(t);
    const double s  = partition_.local(k, t);
    const double h  = partition_.width(k);
    const auto phi  = basis_.values(s);
    const auto dphi = basis_.derivatives(s);
    const int r     = degree();
    const auto & first = nodes_[static_cast<std::size_t>(k * r)];
    Matrix<Dim> a   = Matrix<Dim>::Zero(first.rows(), first.cols());
    Matrix<Dim> da  = a;
    for (int i = 0; i <= r; ++i) {
      const auto & ri = nodes_[static_cast<std::size_t>(k * r + i)];
      a += phi[static_cast<std::size_t>(i)] * ri;
      da += (dphi[static_cast<std::size_t>(i)] / h) * ri;
    }
    return {a, da};
  }

  /// P_SO(n)(sum_i phi_i(t) R_i).
  [[nodiscard]] RotationMatrix<Dim> evaluate(double t) const
  {
    const Matrix<Dim> a = blend(t);
    detail::require_blend_in_domain(a, partition_.locate(t), "eval_lagrange");
    return polar_newton<Dim>(a).q;
  }

  /// Value and t-derivative of the projected interpolant.
  [[nodiscard]] std::pair<RotationMatrix<Dim>, Matrix<Dim>> evaluate_with_velocity(double t) const
  {
    const auto [a, da] = blend_with_derivative(t);
    detail::require_blend_in_domain(a, partition_.locate(t), "eval_lagrange");
    const PolarFactors<Dim> f = polar_newton<Dim>(a);
    return {f.q, f.q * polar_derivative_lyapunov<Dim>(f, da)};
  }

private:
  Partition partition_;
  LagrangeBasis basis_;
  std::vector<RotationMatrix<Dim>> nodes_;
};

/// Value and derivatives of a C^1 rotation curve at one time.
template <int Dim>
struct RotationSample
{
  RotationMatrix<Dim> r;
  Matrix<Dim> r_dot;
  Matrix<Dim> r_ddot;
  SkewMatrix<Dim> omega;      ///< R^T dR
  SkewMatrix<Dim> omega_dot;  ///< d/dt (R^T dR) = skew(R^T ddR)
};

template <int Dim>
class HermiteRotationCurve
{
public:
  /// Entrywise Hermite blend A, A', A'' on one element.
  struct Blend
  {
    Matrix<Dim> a;
    Matrix<Dim> da;
    Matrix<Dim> dda;
  };

  HermiteRotationCurve(Partition partition,
                       std::vector<RotationMatrix<Dim>> rotations,
                       std::vector<SkewMatrix<Dim>> velocities)
      : partition_(std::move(partition)), rotations_(std::move(rotations)), velocities_(std::move(velocities))
  {
    const auto n = static_cast<std::size_t>(partition_.elements() + 1);
    if (rotations_.size() != n || velocities_.size() != n) {
      throw DimensionError("HermiteRotationCurve: need one rotation and one velocity per knot");
    }
  }

  [[nodiscard]] const Partition & partition() const { return partition_; }
  [[nodiscard]] const std::vector<RotationMatrix<Dim>> & rotations() const { return rotations_; }
  [[nodiscard]] const std::vector<SkewMatrix<Dim>> & velocities() const { return velocities_; }

  /// sum_i phi_i R_{k+i} + h psi_i R_{k+i} O_{k+i} and its t-derivatives,
  /// on element k at local coordinate s.
  [[nodiscard]] Blend blend_on(int k, double s) const
  {
    const double h     = partition_.width(k);
    const HermiteBasis b = hermite_basis(s);
    const auto & r0    = rotations_[static_cast<std::size_t>(k)];
    const auto & r1    = rotations_[static_cast<std::size_t>(k + 1)];
    const Matrix<Dim> v0 = r0 * velocities_[static_cast<std::size_t>(k)];
    const Matrix<Dim> v1 = r1 * velocities_[static_cast<std::size_t>(k + 1)];
    Blend out;
    out.a   = b.value[0] * r0 + b.value[1] * r1 + h * (b.value[2] * v0 + b.value[3] * v1);
    out.da  = (b.d1[0] * r0 + b.d1[1] * r1) / h + b.d1[2] * v0 + b.d1[3] * v1;
    out.dda = (b.d2[0] * r0 + b.d2[1] * r1) / (h * h) + (b.d2[2] * v0 + b.d2[3] * v1) / h;
    return out;
  }

  [[nodiscard]] Blend blend(double t) const
  {
    const int k = partition_.locate(t);
    return blend_on(k, partition_.local(k, t));
  }

  /// Evaluate on a given element; s = 0 / s = 1 give one-sided limits at
  /// the element's knots.
  [[nodiscard]] RotationSample<Dim> evaluate_on(int k, double s) const
  {
    const Blend bl = blend_on(k, s);
    detail::require_blend_in_domain(bl.a, k, "eval_hermite");
    const PolarJet<Dim> jet = polar_jet<Dim>(bl.a, bl.da, bl.dda);
    RotationSample<Dim> out;
    out.r         = jet.q;
    out.r_dot     = jet.q_dot();
    out.r_ddot    = jet.q_ddot();
    out.omega     = skew_part(jet.vel);
    out.omega_dot = skew_part(jet.acc);
    return out;
  }

  [[nodiscard]] RotationSample<Dim> evaluate(double t) const
  {
    const int k = partition_.locate(t);
    return evaluate_on(k, partition_.local(k, t));
  }

private:
  Partition partition_;
  std::vector<RotationMatrix<Dim>> rotations_;
  std::vector<SkewMatrix<Dim>> velocities_;
};

template <int Dim>
RotationMatrix<Dim> eval_lagrange(const LagrangeRotationCurve<Dim> & curve, double t)
{
  return curve.evaluate(t);
}

template <int Dim>
RotationSample<Dim> eval_hermite(const HermiteRotationCurve<Dim> & curve, double t)
{
  return curve.evaluate(t);
}

template <int Dim>
using RotationFunction = std::function<RotationMatrix<Dim>(double)>;

/// Lagrange interpolant of a sampled rotation function.
template <int Dim>
LagrangeRotationCurve<Dim> interpolate_lagrange(const Partition & partition, int degree, const RotationFunction<Dim> & r)
{
  std::vector<RotationMatrix<Dim>> nodes;
  nodes.reserve(static_cast<std::size_t>(partition.elements() * degree + 1));
  for (int k = 0; k < partition.elements(); ++k) {
    for (int i = 0; i < degree; ++i) {
      nodes.push_back(r(partition.global(k, static_cast<double>(i) / degree)));
    }
  }
  nodes.push_back(r(partition.back()));
  return LagrangeRotationCurve<Dim>(partition, degree, std::move(nodes));
}

/// Hermite interpolant from R(t) and dR(t); nodal velocities are
/// O_k = skew(R_k^T dR_k).
template <int Dim>
HermiteRotationCurve<Dim> interpolate_hermite(const Partition & partition,
                                              const RotationFunction<Dim> & r,
                                              const std::function<Matrix<Dim>(double)> & r_dot)
{
  std::vector<RotationMatrix<Dim>> rot;
  std::vector<SkewMatrix<Dim>> vel;
  for (double t : partition.knots()) {
    const RotationMatrix<Dim> rk = r(t);
    rot.push_back(rk);
    vel.push_back(skew_part((rk.transpose() * r_dot(t)).eval()));
  }
  return HermiteRotationCurve<Dim>(partition, std::move(rot), std::move(vel));
}

}  // namespace rotinterp
