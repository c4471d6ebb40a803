#pragma once

/**
 * @file
 * @brief Residual g and Jacobian J of the discretized objective g^T g.
 *
 * Rows 3(P k + p) + j (0-based) hold sqrt(h W_p) times component j of the
 * body acceleration at quadrature point p of element k: vee(skew(R^T R''))
 * for the matrix discretization, Im(q^{-1} q'' - (q^{-1} q')^2) for the
 * quaternion one.  Each row depends only on the unknowns of its element's
 * two knots.
 */

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "../errors.hpp"
#include "../liegroup.hpp"
#include "../partition.hpp"
#include "../polar.hpp"
#include "../quaternion.hpp"
#include "problem.hpp"
#include "quadrature.hpp"

namespace rotinterp::minaccel {

struct ResidualSystem
{
  Eigen::VectorXd g;
  Eigen::SparseMatrix<double> jac;  ///< empty unless requested

  [[nodiscard]] double objective() const { return g.squaredNorm(); }
};

namespace detail {

/// Column index and nodal perturbation of one unknown attached to a knot.
template <typename Node>
struct NodeColumn
{
  int column;
  bool is_rate;  ///< perturbs w_k (component `axis`) rather than the node value
  int axis;
  Node d_node;   ///< dR_k or du_k for value unknowns
};

inline void require_domain(bool ok, int element, int point, double det, const char * who)
{
  if (!ok) {
    throw ProjectionDomainError(std::string(who) + ": blend leaves the projection domain on element " +
                                    std::to_string(element) + ", quadrature point " + std::to_string(point),
                                element,
                                det,
                                point);
  }
}

inline Quaternion unit_pure(int axis)
{
  Vec3 e  = Vec3::Zero();
  e(axis) = 1.0;
  return Quaternion::pure(e);
}

}  // namespace detail

/// Matrix discretization: g and (optionally) J at x.
inline ResidualSystem assemble_matrix(const MinAccelProblem & p,
                                      const UnknownLayout & layout,
                                      const ReferenceSequence & ref,
                                      const Eigen::VectorXd & x,
                                      bool with_jacobian = true)
{
  using Column               = detail::NodeColumn<Mat3>;
  const NodalData nodes      = decode_nodes(p, layout, ref, x);
  const UnknownCollections c = unpack(layout, x);
  const QuadratureRule rule  = gauss_legendre(p.quadrature_points);
  const int n                = layout.elements();
  const int pts              = rule.size();

  // Per-knot columns: value unknowns first, then the three rates.
  std::vector<std::vector<Column>> columns(static_cast<std::size_t>(n + 1));
  if (with_jacobian) {
    for (int k = 0; k <= n; ++k) {
      auto & cols     = columns[static_cast<std::size_t>(k)];
      const Mat3 & rk = nodes.rotations[static_cast<std::size_t>(k)];
      if (layout.y_size(k) == 1) {
        cols.push_back({layout.y_offset(k), false, 0, (rk * hat(p.v0())).eval()});
      } else if (layout.y_size(k) == 3) {
        const Vec3 & b = c.b[static_cast<std::size_t>(k)];
        for (int j = 0; j < 3; ++j) {
          cols.push_back(
              {layout.y_offset(k) + j, false, 0, (ref.rotations[static_cast<std::size_t>(k)] * dexp_so3(b, Vec3::Unit(j))).eval()});
        }
      }
      for (int j = 0; j < 3; ++j) {
        cols.push_back({layout.w_offset(k) + j, true, j, Mat3::Zero()});
      }
    }
  }

  ResidualSystem sys;
  sys.g = Eigen::VectorXd::Zero(3 * n * pts);
  std::vector<Eigen::Triplet<double>> trip;
  if (with_jacobian) {
    trip.reserve(static_cast<std::size_t>(3 * n * pts * 14));
  }

  for (int k = 0; k < n; ++k) {
    const double h = p.partition.width(k);
    const std::array<const Mat3 *, 2> r{&nodes.rotations[static_cast<std::size_t>(k)],
                                        &nodes.rotations[static_cast<std::size_t>(k + 1)]};
    const std::array<Mat3, 2> w{hat(nodes.omega[static_cast<std::size_t>(k)]),
                                hat(nodes.omega[static_cast<std::size_t>(k + 1)])};
    for (int q = 0; q < pts; ++q) {
      const HermiteBasis bs = hermite_basis(rule.nodes[static_cast<std::size_t>(q)]);
      Mat3 a   = Mat3::Zero();
      Mat3 da  = Mat3::Zero();
      Mat3 dda = Mat3::Zero();
      for (int i = 0; i < 2; ++i) {
        const Mat3 rw = *r[i] * w[i];
        a += bs.value[i] * *r[i] + h * bs.value[i + 2] * rw;
        da += (bs.d1[i] * *r[i] + h * bs.d1[i + 2] * rw) / h;
        dda += (bs.d2[i] * *r[i] + h * bs.d2[i + 2] * rw) / (h * h);
      }
      const double det = a.determinant();
      detail::require_domain(det > 0.0, k, q, det, "assemble_matrix");

      const double scale = std::sqrt(h * rule.weights[static_cast<std::size_t>(q)]);
      const int row      = 3 * (pts * k + q);
      const CoupledPolarIteration<3> it(a, da, dda);
      const Mat3 & t_inf = it.jet().acc;
      sys.g.segment<3>(row) = scale * vee(skew_part(t_inf));
      if (!with_jacobian) {
        continue;
      }
      for (int i = 0; i < 2; ++i) {
        for (const Column & col : columns[static_cast<std::size_t>(k + i)]) {
          Mat3 d_a;
          Mat3 d_da;
          Mat3 d_dda;
          if (col.is_rate) {
            const Mat3 rd = *r[i] * hat(Vec3::Unit(col.axis));
            d_a           = h * bs.value[i + 2] * rd;
            d_da          = bs.d1[i + 2] * rd;
            d_dda         = bs.d2[i + 2] * rd / h;
          } else {
            const Mat3 dw = col.d_node * w[i];
            d_a           = bs.value[i] * col.d_node + h * bs.value[i + 2] * dw;
            d_da          = (bs.d1[i] * col.d_node + h * bs.d1[i + 2] * dw) / h;
            d_dda         = (bs.d2[i] * col.d_node + h * bs.d2[i + 2] * dw) / (h * h);
          }
          const PolarParamBlock<3> pb = it.parametric(d_a, d_da, d_dda);
          const Vec3 d_alpha          = vee(skew_part((pb.u.transpose() * t_inf + pb.z).eval()));
          for (int j = 0; j < 3; ++j) {
            trip.emplace_back(row + j, col.column, scale * d_alpha(j));
          }
        }
      }
    }
  }
  if (with_jacobian) {
    sys.jac.resize(sys.g.size(), layout.size());
    sys.jac.setFromTriplets(trip.begin(), trip.end());
  }
  return sys;
}

/// Quaternion discretization: g and (optionally) J at x.
inline ResidualSystem assemble_quat(const MinAccelProblem & p,
                                    const UnknownLayout & layout,
                                    const ReferenceSequence & ref,
                                    const Eigen::VectorXd & x,
                                    bool with_jacobian = true)
{
  using Column               = detail::NodeColumn<Quaternion>;
  const NodalData nodes      = decode_nodes(p, layout, ref, x);
  const UnknownCollections c = unpack(layout, x);
  const QuadratureRule rule  = gauss_legendre(p.quadrature_points);
  const int n                = layout.elements();
  const int pts              = rule.size();

  std::vector<std::vector<Column>> columns(static_cast<std::size_t>(n + 1));
  if (with_jacobian) {
    for (int k = 0; k <= n; ++k) {
      auto & cols            = columns[static_cast<std::size_t>(k)];
      const Quaternion & ubar = ref.quaternions[static_cast<std::size_t>(k)];
      if (layout.y_size(k) == 1) {
        const double beta = c.beta[static_cast<std::size_t>(k)];
        const Quaternion d(-0.5 * std::sin(0.5 * beta), 0.5 * std::cos(0.5 * beta) * p.v0());
        cols.push_back({layout.y_offset(k), false, 0, ubar * d});
      } else if (layout.y_size(k) == 3) {
        const auto jac = quat_exp_jacobian(c.b[static_cast<std::size_t>(k)]);
        for (int j = 0; j < 3; ++j) {
          cols.push_back({layout.y_offset(k) + j, false, 0, ubar * jac[static_cast<std::size_t>(j)]});
        }
      }
      for (int j = 0; j < 3; ++j) {
        cols.push_back({layout.w_offset(k) + j, true, j, Quaternion::zero()});
      }
    }
  }

  ResidualSystem sys;
  sys.g = Eigen::VectorXd::Zero(3 * n * pts);
  std::vector<Eigen::Triplet<double>> trip;
  if (with_jacobian) {
    trip.reserve(static_cast<std::size_t>(3 * n * pts * 14));
  }

  for (int k = 0; k < n; ++k) {
    const double h = p.partition.width(k);
    const std::array<const Quaternion *, 2> u{&nodes.quaternions[static_cast<std::size_t>(k)],
                                              &nodes.quaternions[static_cast<std::size_t>(k + 1)]};
    const std::array<Quaternion, 2> w{Quaternion::pure(nodes.omega[static_cast<std::size_t>(k)]),
                                      Quaternion::pure(nodes.omega[static_cast<std::size_t>(k + 1)])};
    for (int qp = 0; qp < pts; ++qp) {
      const HermiteBasis bs = hermite_basis(rule.nodes[static_cast<std::size_t>(qp)]);
      Quaternion q   = Quaternion::zero();
      Quaternion dq  = Quaternion::zero();
      Quaternion ddq = Quaternion::zero();
      for (int i = 0; i < 2; ++i) {
        const Quaternion uw = *u[i] * w[i];
        q += bs.value[i] * *u[i] + h * bs.value[i + 2] * uw;
        dq += (bs.d1[i] * *u[i] + h * bs.d1[i + 2] * uw) / h;
        ddq += (bs.d2[i] * *u[i] + h * bs.d2[i + 2] * uw) / (h * h);
      }
      detail::require_domain(q.norm() >= 1e-14, k, qp, q.norm(), "assemble_quat");

      const double scale     = std::sqrt(h * rule.weights[static_cast<std::size_t>(qp)]);
      const int row          = 3 * (pts * k + qp);
      const Quaternion q_inv = quat_inv(q);
      const Quaternion om    = q_inv * dq;
      const Quaternion qddq  = q_inv * ddq;
      sys.g.segment<3>(row)  = scale * (qddq - om * om).xyz;
      if (!with_jacobian) {
        continue;
      }
      for (int i = 0; i < 2; ++i) {
        for (const Column & col : columns[static_cast<std::size_t>(k + i)]) {
          Quaternion d_q;
          Quaternion d_dq;
          Quaternion d_ddq;
          if (col.is_rate) {
            const Quaternion ud = *u[i] * detail::unit_pure(col.axis);
            d_q                 = h * bs.value[i + 2] * ud;
            d_dq                = bs.d1[i + 2] * ud;
            d_ddq               = bs.d2[i + 2] * ud / h;
          } else {
            const Quaternion dw = col.d_node * w[i];
            d_q                 = bs.value[i] * col.d_node + h * bs.value[i + 2] * dw;
            d_dq                = (bs.d1[i] * col.d_node + h * bs.d1[i + 2] * dw) / h;
            d_ddq               = (bs.d2[i] * col.d_node + h * bs.d2[i + 2] * dw) / (h * h);
          }
          const Quaternion qi_dq = q_inv * d_q;
          const Quaternion d_om  = q_inv * d_dq - qi_dq * om;
          const Quaternion d_al  = q_inv * d_ddq - qi_dq * qddq - om * d_om - d_om * om;
          for (int j = 0; j < 3; ++j) {
            trip.emplace_back(row + j, col.column, scale * d_al.xyz(j));
          }
        }
      }
    }
  }
  if (with_jacobian) {
    sys.jac.resize(sys.g.size(), layout.size());
    sys.jac.setFromTriplets(trip.begin(), trip.end());
  }
  return sys;
}

/// Dispatch on the problem's method.
inline ResidualSystem assemble(const MinAccelProblem & p,
                               const UnknownLayout & layout,
                               const ReferenceSequence & ref,
                               const Eigen::VectorXd & x,
                               bool with_jacobian = true)
{
  return p.method == Method::matrix ? assemble_matrix(p, layout, ref, x, with_jacobian)
                                    : assemble_quat(p, layout, ref, x, with_jacobian);
}

}  // namespace rotinterp::minaccel
