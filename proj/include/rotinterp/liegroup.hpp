#pragma once

/**
 * @file
 * @brief Small-dimension maps on SO(n) and so(n): hat/vee, skew and
 * symmetric parts, the SO(3) exponential, logarithm and its directional
 * derivative, the Cayley transform and a dense Lyapunov solver.
 */

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

#include "errors.hpp"
#include "types.hpp"

namespace rotinterp {

namespace detail {

/// Angle below which exp/log/dexp switch to truncated Taylor series.
inline constexpr double kSmallAngle = 1e-4;

/// Distance from pi at which the SO(3) logarithm refuses to pick an axis.
inline constexpr double kLogPiMargin = 1e-6;

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived> & a, const char * who)
{
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(who) + ": matrix is not square");
  }
}

}  // namespace detail

/// Cross-product matrix: hat(v) w = v x w.
inline Mat3 hat(const Vec3 & v)
{
  Mat3 m;
  // clang-format off
  m <<  0.0,  -v(2),  v(1),
        v(2),  0.0,  -v(0),
       -v(1),  v(0),  0.0;
  // clang-format on
  return m;
}

/// Inverse of `hat`.  Reads the strictly lower triangle; the input is
/// assumed skew.
template <typename Derived>
Vec3 vee(const Eigen::MatrixBase<Derived> & m)
{
  if (m.rows() != 3 || m.cols() != 3) {
    throw DimensionError("vee: expected a 3x3 matrix");
  }
  return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

template <typename Derived>
typename Derived::PlainObject skew_part(const Eigen::MatrixBase<Derived> & a)
{
  detail::require_square(a, "skew_part");
  return (0.5 * (a - a.transpose())).eval();
}

template <typename Derived>
typename Derived::PlainObject sym_part(const Eigen::MatrixBase<Derived> & a)
{
  detail::require_square(a, "sym_part");
  return (0.5 * (a + a.transpose())).eval();
}

/// ||Q^T Q - I||_F.
template <typename Derived>
double orthogonality_residual(const Eigen::MatrixBase<Derived> & q)
{
  using Plain = typename Derived::PlainObject;
  return (q.transpose() * q - Plain::Identity(q.rows(), q.cols())).norm();
}

/// Rodrigues' formula.
inline Mat3 exp_so3(const Vec3 & v)
{
  const double theta2 = v.squaredNorm();
  const double theta  = std::sqrt(theta2);
  double a;  // sin(theta) / theta
  double b;  // (1 - cos(theta)) / theta^2
  if (theta < detail::kSmallAngle) {
    a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0 - theta2 * theta2 * theta2 / 5040.0;
    b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0 - theta2 * theta2 * theta2 / 40320.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Mat3 w = hat(v);
  return Mat3::Identity() + a * w + b * w * w;
}

/// Principal logarithm with angle in [0, pi).  Rotations within
/// `kLogPiMargin` of angle pi are rejected because the axis sign is
/// ambiguous there.
inline Vec3 log_so3(const Mat3 & r)
{
  const Vec3 w         = vee(r - r.transpose());  // 2 sin(theta) * axis
  const double sin_t   = 0.5 * w.norm();
  const double cos_t   = 0.5 * (r.trace() - 1.0);
  const double theta   = std::atan2(sin_t, cos_t);
  if (std::numbers::pi - theta < detail::kLogPiMargin) {
    throw IllConditionedLogError("log_so3: rotation angle too close to pi");
  }
  double factor;  // theta / sin(theta)
  if (theta < detail::kSmallAngle) {
    const double t2 = theta * theta;
    factor          = 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0 + 31.0 * t2 * t2 * t2 / 15120.0;
  } else {
    factor = theta / sin_t;
  }
  return 0.5 * factor * w;
}

/**
 * @brief Directional derivative d/ds exp_so3(w + s v) at s = 0.
 *
 * Closed form
 *   dexp_w(v) = [ (w.v) hat(w) + hat(w x (I - exp(hat w)) v) ] / |w|^2 * exp(hat w)
 * and, for |w| below the small-angle threshold, the series
 *   sum_{k=0}^{3} 1/(k+1)! sum_{i+j=k} W^i V W^j.
 */
inline Mat3 dexp_so3(const Vec3 & w, const Vec3 & v)
{
  const double theta2 = w.squaredNorm();
  if (std::sqrt(theta2) < detail::kSmallAngle) {
    const Mat3 W  = hat(w);
    const Mat3 V  = hat(v);
    const Mat3 WV = W * V;
    const Mat3 VW = V * W;
    const Mat3 W2 = W * W;
    Mat3 out      = V;
    out += (WV + VW) / 2.0;
    out += (W * WV + WV * W + V * W2) / 6.0;
    out += (W2 * WV + W2 * VW + W * VW * W + V * W2 * W) / 24.0;
    return out;
  }
  const Mat3 e    = exp_so3(w);
  const Vec3 tail = w.cross((Mat3::Identity() - e) * v);
  return ((w.dot(v) * hat(w) + hat(tail)) / theta2) * e;
}

/// cay(O) = (I - O/2)^{-1} (I + O/2).
template <int Dim>
Matrix<Dim> cayley(const Matrix<Dim> & omega)
{
  detail::require_square(omega, "cayley");
  const Matrix<Dim> id   = Matrix<Dim>::Identity(omega.rows(), omega.cols());
  const Matrix<Dim> half = 0.5 * omega;
  return (id - half).partialPivLu().solve(id + half);
}

/// cay^{-1}(R) = 2 (I + R)^{-1} (R - I).
template <int Dim>
Matrix<Dim> cayley_inv(const Matrix<Dim> & r)
{
  detail::require_square(r, "cayley_inv");
  const Matrix<Dim> id = Matrix<Dim>::Identity(r.rows(), r.cols());
  const Matrix<Dim> ip = id + r;
  if (std::abs(ip.determinant()) < 1e-12) {
    throw SingularityError("cayley_inv: I + R is singular");
  }
  return 2.0 * ip.partialPivLu().solve(r - id);
}

/**
 * @brief Solve Y X + X Y = C for symmetric positive definite Y.
 *
 * Dense Kronecker vectorization: (I (x) Y + Y^T (x) I) vec(X) = vec(C).
 * The Kronecker sum of an SPD matrix with itself is SPD, so a Cholesky
 * factorization doubles as the definiteness check.
 */
template <int Dim>
Matrix<Dim> lyapunov_solve(const Matrix<Dim> & y, const Matrix<Dim> & c)
{
  detail::require_square(y, "lyapunov_solve");
  const Eigen::Index n = y.rows();
  if (c.rows() != n || c.cols() != n) {
    throw DimensionError("lyapunov_solve: Y and C differ in size");
  }
  if (n > 16) {
    throw DimensionError("lyapunov_solve: dense solver limited to n <= 16");
  }
  if (Eigen::LLT<Matrix<Dim>>(y).info() != Eigen::Success) {
    throw PreconditionError("lyapunov_solve: Y is not positive definite");
  }

  constexpr int Dim2 = (Dim == Eigen::Dynamic) ? Eigen::Dynamic : Dim * Dim;
  using Big          = Eigen::Matrix<double, Dim2, Dim2>;
  using BigVec       = Eigen::Matrix<double, Dim2, 1>;

  Big k = Big::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      // Row (i, j) of vec(Y X + X Y) in column-major order.
      const Eigen::Index row = i + j * n;
      for (Eigen::Index m = 0; m < n; ++m) {
        k(row, m + j * n) += y(i, m);  // (Y X)_{ij} = sum_m Y_im X_mj
        k(row, i + m * n) += y(m, j);  // (X Y)_{ij} = sum_m X_im Y_mj
      }
    }
  }
  const BigVec rhs = Eigen::Map<const BigVec>(c.data(), n * n);
  Eigen::LLT<Big> llt(k);
  if (llt.info() != Eigen::Success) {
    throw PreconditionError("lyapunov_solve: Kronecker system is not positive definite");
  }
  const BigVec sol = llt.solve(rhs);
  return Eigen::Map<const Matrix<Dim>>(sol.data(), n, n);
}

}  // namespace rotinterp
