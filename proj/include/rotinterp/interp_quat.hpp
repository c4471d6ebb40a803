#pragma once

/**
 * @file
 * @brief S^3-valued interpolants: blend unit quaternions in R^4 and
 * normalize.
 *
 * Body rates follow the quaternion convention (0, w) = u^{-1} du/dt, which
 * is half the angular velocity of the rotation u represents: the rotation
 * matrix R(u) satisfies R^T dR/dt = hat(2 w).
 */

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "interp_matrix.hpp"
#include "liegroup.hpp"
#include "partition.hpp"
#include "quaternion.hpp"
#include "types.hpp"

namespace rotinterp {

/// q / |q|.
inline Quaternion project_s3(const Quaternion & q)
{
  const double n = q.norm();
  if (!(n >= 1e-14)) {
    throw ZeroQuaternionError("project_s3: quaternion norm below 1e-14");
  }
  return q / n;
}

/// Flip each quaternion onto the hemisphere of its predecessor.  Returns
/// the sign applied to each entry.
inline std::vector<double> align_signs(std::vector<Quaternion> & u)
{
  std::vector<double> sign(u.size(), 1.0);
  for (std::size_t k = 1; k < u.size(); ++k) {
    if (u[k].dot(u[k - 1]) < 0.0) {
      u[k]    = -u[k];
      sign[k] = -1.0;
    }
  }
  return sign;
}

namespace detail {

inline void require_nonzero_blend(const Quaternion & q, int element, const char * who)
{
  const double n = q.norm();
  if (!(n >= 1e-14)) {
    throw ProjectionDomainError(std::string(who) + ": quaternion blend vanishes on element " +
                                    std::to_string(element),
                                element);
  }
}

}  // namespace detail

/// Value and body rates of a quaternion curve.
struct QuatSample
{
  Quaternion u;
  Quaternion u_dot;
  Vec3 omega;      ///< Im(u^{-1} du)
  Vec3 omega_dot;  ///< d/dt Im(u^{-1} du)
};

/// u = q/|q| with its body rates, from the blend q and its derivatives.
inline QuatSample normalize_jet(const Quaternion & q, const Quaternion & dq, const Quaternion & ddq)
{
  const Quaternion q_inv = quat_inv(q);
  const Quaternion a     = q_inv * dq;
  QuatSample out;
  out.u         = project_s3(q);
  out.omega     = a.xyz;
  out.omega_dot = (q_inv * ddq - a * a).xyz;
  out.u_dot     = out.u * Quaternion::pure(out.omega);
  return out;
}

class HermiteQuatCurve
{
public:
  struct Blend
  {
    Quaternion q;
    Quaternion dq;
    Quaternion ddq;
  };

  /// Nodal quaternions are normalized and, unless `align` is false,
  /// sign-aligned on construction.
  HermiteQuatCurve(Partition partition, std::vector<Quaternion> u, std::vector<Vec3> omega, bool align = true)
      : partition_(std::move(partition)), u_(std::move(u)), omega_(std::move(omega))
  {
    const auto n = static_cast<std::size_t>(partition_.elements() + 1);
    if (u_.size() != n || omega_.size() != n) {
      throw DimensionError("HermiteQuatCurve: need one quaternion and one rate per knot");
    }
    for (auto & q : u_) {
      q = project_s3(q);
    }
    if (align) {
      align_signs(u_);
    }
  }

  [[nodiscard]] const Partition & partition() const { return partition_; }
  [[nodiscard]] const std::vector<Quaternion> & nodes() const { return u_; }
  [[nodiscard]] const std::vector<Vec3> & rates() const { return omega_; }

  /// sum_i phi_i u_{k+i} + h psi_i u_{k+i} (0, w_{k+i}) and t-derivatives.
  [[nodiscard]] Blend blend_on(int k, double s) const
  {
    const double h       = partition_.width(k);
    const HermiteBasis b = hermite_basis(s);
    const Quaternion & u0 = u_[static_cast<std::size_t>(k)];
    const Quaternion & u1 = u_[static_cast<std::size_t>(k + 1)];
    const Quaternion v0   = u0 * Quaternion::pure(omega_[static_cast<std::size_t>(k)]);
    const Quaternion v1   = u1 * Quaternion::pure(omega_[static_cast<std::size_t>(k + 1)]);
    Blend out;
    out.q   = b.value[0] * u0 + b.value[1] * u1 + h * (b.value[2] * v0 + b.value[3] * v1);
    out.dq  = (b.d1[0] * u0 + b.d1[1] * u1) / h + b.d1[2] * v0 + b.d1[3] * v1;
    out.ddq = (b.d2[0] * u0 + b.d2[1] * u1) / (h * h) + (b.d2[2] * v0 + b.d2[3] * v1) / h;
    return out;
  }

  [[nodiscard]] QuatSample evaluate_on(int k, double s) const
  {
    const Blend bl = blend_on(k, s);
    detail::require_nonzero_blend(bl.q, k, "eval_quat_hermite");
    return normalize_jet(bl.q, bl.dq, bl.ddq);
  }

  [[nodiscard]] QuatSample evaluate(double t) const
  {
    const int k = partition_.locate(t);
    return evaluate_on(k, partition_.local(k, t));
  }

private:
  Partition partition_;
  std::vector<Quaternion> u_;
  std::vector<Vec3> omega_;
};

class LagrangeQuatCurve
{
public:
  /// Node layout as in `LagrangeRotationCurve`; normalized and
  /// sign-aligned on construction.
  LagrangeQuatCurve(Partition partition, int degree, std::vector<Quaternion> nodes)
      : partition_(std::move(partition)), basis_(degree), nodes_(std::move(nodes))
  {
    const auto expected = static_cast<std::size_t>(partition_.elements() * degree + 1);
    if (nodes_.size() != expected) {
      throw DimensionError("LagrangeQuatCurve: expected " + std::to_string(expected) + " nodes");
    }
    for (auto & q : nodes_) {
      q = project_s3(q);
    }
    align_signs(nodes_);
  }

  [[nodiscard]] const Partition & partition() const { return partition_; }
  [[nodiscard]] int degree() const { return basis_.degree(); }
  [[nodiscard]] const std::vector<Quaternion> & nodes() const { return nodes_; }

  [[nodiscard]] Quaternion blend(double t) const
  {
    const int k    = partition_.locate(t);
    const auto phi = basis_.values(partition_.local(k, t));
    Quaternion q   = Quaternion::zero();
    for (int i = 0; i <= degree(); ++i) {
      q += phi[static_cast<std::size_t>(i)] * nodes_[static_cast<std::size_t>(k * degree() + i)];
    }
    return q;
  }

  [[nodiscard]] Quaternion evaluate(double t) const
  {
    const Quaternion q = blend(t);
    detail::require_nonzero_blend(q, partition_.locate(t), "eval_quat_lagrange");
    return project_s3(q);
  }

private:
  Partition partition_;
  LagrangeBasis basis_;
  std::vector<Quaternion> nodes_;
};

inline QuatSample eval_quat_hermite(const HermiteQuatCurve & curve, double t) { return curve.evaluate(t); }

inline Quaternion eval_quat_lagrange(const LagrangeQuatCurve & curve, double t) { return curve.evaluate(t); }

using QuatFunction = std::function<Quaternion(double)>;

inline LagrangeQuatCurve interpolate_quat_lagrange(const Partition & partition, int degree, const QuatFunction & u)
{
  std::vector<Quaternion> nodes;
  for (int k = 0; k < partition.elements(); ++k) {
    for (int i = 0; i < degree; ++i) {
      nodes.push_back(u(partition.global(k, static_cast<double>(i) / degree)));
    }
  }
  nodes.push_back(u(partition.back()));
  return LagrangeQuatCurve(partition, degree, std::move(nodes));
}

/// Hermite interpolant from u(t) and du(t); rates are Im(u^{-1} du).
inline HermiteQuatCurve interpolate_quat_hermite(const Partition & partition,
                                                 const QuatFunction & u,
                                                 const QuatFunction & u_dot)
{
  std::vector<Quaternion> nodes;
  std::vector<Vec3> rates;
  for (double t : partition.knots()) {
    const Quaternion uk = u(t);
    nodes.push_back(uk);
    rates.push_back((quat_inv(uk) * u_dot(t)).xyz);
  }
  return HermiteQuatCurve(partition, std::move(nodes), std::move(rates));
}

/// The SO(3) Hermite curve with the same nodal rotations and angular
/// velocities as a quaternion Hermite curve (R_k = R(u_k), O_k = hat(2 w_k)).
inline HermiteRotationCurve<3> to_matrix_curve(const HermiteQuatCurve & curve)
{
  std::vector<Mat3> rot;
  std::vector<Mat3> vel;
  for (std::size_t k = 0; k < curve.nodes().size(); ++k) {
    rot.push_back(quat_to_matrix(curve.nodes()[k]));
    vel.push_back(hat(2.0 * curve.rates()[k]));
  }
  return HermiteRotationCurve<3>(curve.partition(), std::move(rot), std::move(vel));
}

struct ConsistencyReport
{
  double rotation_gap;  ///< ||R(u(t)) - R(t)||_F
  double rate_gap;      ///< |2 w(t) - vee(O(t))|
};

/// Compare the two Hermite embeddings at time t.  Nodal data are expected
/// to be related as in `to_matrix_curve`.
inline ConsistencyReport curve_consistency(const HermiteQuatCurve & curve_q,
                                           const HermiteRotationCurve<3> & curve_m,
                                           double t)
{
  const QuatSample qs         = curve_q.evaluate(t);
  const RotationSample<3> ms = curve_m.evaluate(t);
  return {(quat_to_matrix(qs.u) - ms.r).norm(), (2.0 * qs.omega - vee(ms.omega)).norm()};
}

}  // namespace rotinterp
