#pragma once

/**
 * @file
 * @brief Quaternions as elements of R^4 with the Hamilton product, and the
 * maps tying unit quaternions to SO(3).
 *
 * Component order is (w, x, y, z); `w` is the real part.
 */

#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "errors.hpp"
#include "liegroup.hpp"
#include "types.hpp"

namespace rotinterp {

struct Quaternion
{
  double w{1.0};
  Vec3 xyz{Vec3::Zero()};

  Quaternion() = default;
  Quaternion(double w_, const Vec3 & xyz_) : w(w_), xyz(xyz_) {}
  Quaternion(double w_, double x, double y, double z) : w(w_), xyz(x, y, z) {}

  static Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }
  static Quaternion zero() { return {0.0, 0.0, 0.0, 0.0}; }
  /// The pure quaternion (0, v).
  static Quaternion pure(const Vec3 & v) { return {0.0, v}; }
  static Quaternion from_vector(const Vec4 & c) { return {c(0), c(1), c(2), c(3)}; }

  [[nodiscard]] Vec4 vector() const { return {w, xyz(0), xyz(1), xyz(2)}; }
  [[nodiscard]] double squared_norm() const { return w * w + xyz.squaredNorm(); }
  [[nodiscard]] double norm() const { return std::sqrt(squared_norm()); }
  [[nodiscard]] double dot(const Quaternion & o) const { return w * o.w + xyz.dot(o.xyz); }

  Quaternion & operator+=(const Quaternion & o)
  {
    w += o.w;
    xyz += o.xyz;
    return *this;
  }
  Quaternion & operator-=(const Quaternion & o)
  {
    w -= o.w;
    xyz -= o.xyz;
    return *this;
  }
  Quaternion & operator*=(double s)
  {
    w *= s;
    xyz *= s;
    return *this;
  }
};

inline Quaternion operator+(Quaternion a, const Quaternion & b) { return a += b; }
inline Quaternion operator-(Quaternion a, const Quaternion & b) { return a -= b; }
inline Quaternion operator-(const Quaternion & a) { return {-a.w, -a.xyz}; }
inline Quaternion operator*(double s, Quaternion a) { return a *= s; }
inline Quaternion operator*(Quaternion a, double s) { return a *= s; }
inline Quaternion operator/(Quaternion a, double s) { return a *= (1.0 / s); }

/// Hamilton product, written component by component in the order
/// (u1 w1 - u2 w2 - u3 w3 - u4 w4, u1 w2 + u2 w1 + u3 w4 - u4 w3, ...).
inline Quaternion quat_mul(const Quaternion & a, const Quaternion & b)
{
  const double u1 = a.w, u2 = a.xyz(0), u3 = a.xyz(1), u4 = a.xyz(2);
  const double w1 = b.w, w2 = b.xyz(0), w3 = b.xyz(1), w4 = b.xyz(2);
  return {u1 * w1 - u2 * w2 - u3 * w3 - u4 * w4,
          u1 * w2 + u2 * w1 + u3 * w4 - u4 * w3,
          u1 * w3 - u2 * w4 + u3 * w1 + u4 * w2,
          u1 * w4 + u2 * w3 - u3 * w2 + u4 * w1};
}

inline Quaternion operator*(const Quaternion & a, const Quaternion & b) { return quat_mul(a, b); }

inline Quaternion quat_conj(const Quaternion & q) { return {q.w, -q.xyz}; }
inline Quaternion quat_re(const Quaternion & q) { return {q.w, Vec3::Zero()}; }
inline Quaternion quat_im(const Quaternion & q) { return {0.0, q.xyz}; }

inline Quaternion quat_inv(const Quaternion & q)
{
  const double n2 = q.squared_norm();
  if (n2 == 0.0) {
    throw ZeroQuaternionError("quat_inv: zero quaternion has no inverse");
  }
  return quat_conj(q) / n2;
}

namespace detail {

/// sin(theta/2) / theta, with a Taylor branch near zero.
inline double half_sinc(double theta)
{
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    return 0.5 - t2 / 48.0 + t2 * t2 / 3840.0 - t2 * t2 * t2 / 645120.0;
  }
  return std::sin(0.5 * theta) / theta;
}

/// (d/dtheta half_sinc(theta)) / theta.
inline double half_sinc_derivative_over_theta(double theta)
{
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    return -1.0 / 24.0 + t2 / 960.0 - t2 * t2 / 107520.0;
  }
  return (0.5 * theta * std::cos(0.5 * theta) - std::sin(0.5 * theta)) / (theta * theta * theta);
}

}  // namespace detail

/// exp(0, v) = (cos(|v|/2), v/|v| sin(|v|/2)): the unit quaternion of the
/// rotation by |v| about v.
inline Quaternion quat_exp(const Vec3 & v)
{
  const double theta = v.norm();
  return {std::cos(0.5 * theta), detail::half_sinc(theta) * v};
}

/**
 * @brief Partial derivatives of `quat_exp` with respect to each component
 * of v.  Entry j is d quat_exp(v) / d v_j.
 */
inline std::array<Quaternion, 3> quat_exp_jacobian(const Vec3 & v)
{
  const double theta = v.norm();
  const double s     = detail::half_sinc(theta);
  const double ds    = detail::half_sinc_derivative_over_theta(theta);
  std::array<Quaternion, 3> out;
  for (int j = 0; j < 3; ++j) {
    Vec3 e = Vec3::Zero();
    e(j)   = 1.0;
    // d cos(theta/2) / d v_j = -sin(theta/2)/2 * v_j/theta = -v_j s / 2
    out[j] = Quaternion(-0.5 * v(j) * s, s * e + ds * v(j) * v);
  }
  return out;
}

/**
 * @brief Inverse of `quat_exp`: returns v with quat_exp(v) == u and
 * |v| in [0, 2 pi).  Quaternions within 1e-6 of (-1, 0, 0, 0) are
 * rejected since every axis reaches them.
 */
inline Vec3 quat_log(const Quaternion & u)
{
  if ((u + Quaternion::identity()).norm() < detail::kLogPiMargin) {
    throw IllConditionedLogError("quat_log: quaternion too close to -1");
  }
  const double n     = u.xyz.norm();
  const double theta = 2.0 * std::atan2(n, u.w);
  if (theta < detail::kSmallAngle) {
    // theta / n = 2 atan(n/w) / n, expanded in x = n/w.
    const double x  = n / u.w;
    const double x2 = x * x;
    return (2.0 / u.w) * (1.0 - x2 / 3.0 + x2 * x2 / 5.0 - x2 * x2 * x2 / 7.0) * u.xyz;
  }
  return (theta / n) * u.xyz;
}

/// Rotation of v by unit u: (0, u.v) = u (0, v) u^{-1}.
inline Vec3 quat_act(const Quaternion & u, const Vec3 & v)
{
  return (u * Quaternion::pure(v) * quat_inv(u)).xyz;
}

/// Rotation matrix of u / |u|.
inline Mat3 quat_to_matrix(const Quaternion & q)
{
  const double s = 2.0 / q.squared_norm();
  const double w = q.w, x = q.xyz(0), y = q.xyz(1), z = q.xyz(2);
  Mat3 r;
  // clang-format off
  r << 1.0 - s * (y * y + z * z), s * (x * y - w * z),       s * (x * z + w * y),
       s * (x * y + w * z),       1.0 - s * (x * x + z * z), s * (y * z - w * x),
       s * (x * z - w * y),       s * (y * z + w * x),       1.0 - s * (x * x + y * y);
  // clang-format on
  return r;
}

/**
 * @brief Unit quaternion of a rotation matrix (Shepperd's method).
 *
 * Returns the representative with w >= 0; when w == 0 the first nonzero
 * imaginary component is made positive.
 */
template <typename Derived>
Quaternion matrix_to_quat(const Eigen::MatrixBase<Derived> & r)
{
  if (r.rows() != 3 || r.cols() != 3) {
    throw DimensionError("matrix_to_quat: expected a 3x3 matrix");
  }
  const double tr = r(0, 0) + r(1, 1) + r(2, 2);
  Quaternion q;
  if (tr >= r(0, 0) && tr >= r(1, 1) && tr >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    q              = {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s};
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    q              = {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s};
  } else if (r(1, 1) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
    q              = {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s};
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    q              = {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s};
  }
  q = q / q.norm();

  bool flip = q.w < 0.0;
  if (q.w == 0.0) {
    for (int i = 0; i < 3; ++i) {
      if (q.xyz(i) != 0.0) {
        flip = q.xyz(i) < 0.0;
        break;
      }
    }
  }
  return flip ? -q : q;
}

}  // namespace rotinterp
