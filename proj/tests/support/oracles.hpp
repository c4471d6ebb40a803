#pragma once

// Independent reference computations used only by the test suites.  None of
// these call into the code paths they are used to check.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/SVD>

namespace oracle {

using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

/// Matrix exponential by scaling and squaring a 30-term Taylor series.
template <typename M>
M expm(const M & a)
{
  int squarings = 0;
  double norm   = a.norm();
  while (norm > 0.125) {
    norm *= 0.5;
    ++squarings;
  }
  const M scaled = a / std::ldexp(1.0, squarings);
  M term         = M::Identity(a.rows(), a.cols());
  M sum          = term;
  for (int k = 1; k <= 30; ++k) {
    term = (term * scaled / static_cast<double>(k)).eval();
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) {
    sum = (sum * sum).eval();
  }
  return sum;
}

/// Cross-product matrix, written out independently of the library.
inline Mat3 cross_matrix(const Vec3 & v)
{
  Mat3 m = Mat3::Zero();
  m(0, 1) = -v(2);
  m(0, 2) = v(1);
  m(1, 0) = v(2);
  m(1, 2) = -v(0);
  m(2, 0) = -v(1);
  m(2, 1) = v(0);
  return m;
}

/// Orthogonal polar factor U V^T from the SVD A = U S V^T.
template <typename M>
M svd_polar(const M & a)
{
  Eigen::JacobiSVD<M> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

/// Solution of Y X + X Y = C through the eigendecomposition Y = P D P^T:
/// (P^T X P)_{ij} = (P^T C P)_{ij} / (d_i + d_j).
template <typename M>
M lyapunov_eig(const M & y, const M & c)
{
  Eigen::SelfAdjointEigenSolver<M> es(y);
  const M p = es.eigenvectors();
  const auto d = es.eigenvalues();
  M ct = p.transpose() * c * p;
  for (Eigen::Index i = 0; i < ct.rows(); ++i) {
    for (Eigen::Index j = 0; j < ct.cols(); ++j) {
      ct(i, j) /= d(i) + d(j);
    }
  }
  return p * ct * p.transpose();
}

/// Central difference of a matrix- or vector-valued function of a scalar.
template <typename F>
auto central_diff(F && f, double x, double eps)
{
  return ((f(x + eps) - f(x - eps)) / (2.0 * eps)).eval();
}

/// Second central difference.
template <typename F>
auto central_diff2(F && f, double x, double eps)
{
  return ((f(x + eps) - 2.0 * f(x) + f(x - eps)) / (eps * eps)).eval();
}

/// Dense central-difference Jacobian of a vector function.
template <typename F>
MatX fd_jacobian(F && f, const Eigen::VectorXd & x, double eps)
{
  const Eigen::VectorXd f0 = f(x);
  MatX j(f0.size(), x.size());
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp(c) += eps;
    xm(c) -= eps;
    j.col(c) = (f(xp) - f(xm)) / (2.0 * eps);
  }
  return j;
}

/// Riemannian gradient descent for argmin_{Q in SO(3)} sum_i w_i ||Q - R_i||_F^2,
/// evaluated as a literal weighted sum of squared distances.
inline Mat3 chordal_mean_so3(const std::vector<double> & w, const std::vector<Mat3> & r, Mat3 start)
{
  Mat3 q = start;
  for (int it = 0; it < 20000; ++it) {
    Mat3 grad = Mat3::Zero();
    for (std::size_t i = 0; i < r.size(); ++i) {
      grad += 2.0 * w[i] * (q - r[i]);
    }
    const Mat3 rel = q.transpose() * grad;
    const Mat3 sk  = 0.5 * (rel - rel.transpose());
    if (sk.norm() < 1e-14) {
      break;
    }
    q = q * expm<Mat3>(-0.1 * sk);
  }
  return q;
}

/// Projected gradient descent for argmin_{|x| = 1} sum_i w_i |x - u_i|^2 in R^4.
inline Eigen::Vector4d chordal_mean_s3(const std::vector<double> & w,
                                       const std::vector<Eigen::Vector4d> & u,
                                       Eigen::Vector4d start)
{
  Eigen::Vector4d x = start.normalized();
  for (int it = 0; it < 20000; ++it) {
    Eigen::Vector4d grad = Eigen::Vector4d::Zero();
    for (std::size_t i = 0; i < u.size(); ++i) {
      grad += 2.0 * w[i] * (x - u[i]);
    }
    const Eigen::Vector4d tangent = grad - grad.dot(x) * x;
    if (tangent.norm() < 1e-14) {
      break;
    }
    x = (x - 0.1 * tangent).normalized();
  }
  return x;
}

/// Composite Gauss-Legendre-free integrator: Simpson's rule on n panels.
inline double simpson(const std::function<double(double)> & f, double a, double b, int n)
{
  if (n % 2 != 0) {
    ++n;
  }
  const double h = (b - a) / n;
  double s       = f(a) + f(b);
  for (int i = 1; i < n; ++i) {
    s += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
  }
  return s * h / 3.0;
}

/// Least-squares slope of log(err) against log(h).
inline double fitted_order(const std::vector<double> & h, const std::vector<double> & err)
{
  const double n = static_cast<double>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// R(t) = exp(t K1) exp(t^2 K2) with exact derivatives.
struct SmoothRotationCurve
{
  Vec3 a;
  Vec3 b;

  [[nodiscard]] Mat3 r(double t) const
  {
    return expm<Mat3>(t * cross_matrix(a)) * expm<Mat3>(t * t * cross_matrix(b));
  }
  [[nodiscard]] Mat3 r_dot(double t) const
  {
    const Mat3 e1 = expm<Mat3>(t * cross_matrix(a));
    const Mat3 e2 = expm<Mat3>(t * t * cross_matrix(b));
    return cross_matrix(a) * e1 * e2 + e1 * (2.0 * t * cross_matrix(b)) * e2;
  }
  /// The same curve as a unit quaternion (w, x, y, z), continuous in t.
  [[nodiscard]] Eigen::Vector4d u(double t) const { return coeffs(quat(t)); }
  [[nodiscard]] Eigen::Vector4d u_dot(double t) const
  {
    const Eigen::Quaterniond e1 = half_exp(t * a);
    const Eigen::Quaterniond e2 = half_exp(t * t * b);
    const Eigen::Quaterniond pa(0.0, 0.5 * a(0), 0.5 * a(1), 0.5 * a(2));
    const Eigen::Quaterniond pb(0.0, t * b(0), t * b(1), t * b(2));
    return coeffs(e1 * pa * e2) + coeffs(e1 * e2 * pb);
  }

  static Eigen::Quaterniond half_exp(const Vec3 & v)
  {
    const double n = v.norm();
    if (n == 0.0) {
      return Eigen::Quaterniond::Identity();
    }
    return Eigen::Quaterniond(Eigen::AngleAxisd(n, v / n));
  }
  [[nodiscard]] Eigen::Quaterniond quat(double t) const { return half_exp(t * a) * half_exp(t * t * b); }
  static Eigen::Vector4d coeffs(const Eigen::Quaterniond & q) { return {q.w(), q.x(), q.y(), q.z()}; }
};

/// Random helpers with a fixed engine supplied by the caller.
struct Random
{
  std::mt19937_64 gen;
  explicit Random(std::uint64_t seed) : gen(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen); }

  Vec3 vec3(double scale = 1.0)
  {
    return Vec3(normal(), normal(), normal()) * scale;
  }
  Vec3 unit3() { return vec3().normalized(); }

  /// Rotation with angle uniform in [0, max_angle].
  Mat3 rotation(double max_angle = 3.0)
  {
    return expm<Mat3>(cross_matrix(unit3() * uniform(0.0, max_angle)));
  }

  template <typename M>
  M matrix(Eigen::Index n)
  {
    M m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        m(i, j) = normal();
      }
    }
    return m;
  }

  /// Random matrix with positive determinant and condition number <= cond.
  Mat3 well_conditioned(double cond)
  {
    const Mat3 u = rotation(3.1);
    const Mat3 v = rotation(3.1);
    const Vec3 s(uniform(1.0, cond), uniform(1.0, cond), 1.0);
    return u * s.asDiagonal() * v.transpose();
  }

  Mat3 spd3(double lo = 0.5, double hi = 3.0)
  {
    const Mat3 p = rotation(3.1);
    const Vec3 d(uniform(lo, hi), uniform(lo, hi), uniform(lo, hi));
    return p * d.asDiagonal() * p.transpose();
  }
};

}  // namespace oracle
