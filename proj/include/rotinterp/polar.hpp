#pragma once

/**
 * @file
 * @brief Polar decomposition A = Q Y on GL+(n) and the derivatives of the
 * orthogonal factor Q.
 *
 * Q is the closest point of SO(n) to A in the Frobenius norm.  Derivatives
 * are available through four independent routes:
 *  - the Lyapunov equation Y O + O Y = Q^T dA - dA^T Q for O = Q^T dQ,
 *  - the explicit formula at orthogonal A (interpolation nodes),
 *  - the explicit 3x3 formula with Z = tr(Y) I - Y,
 *  - the Newton iteration differentiated in t (and in a second parameter),
 *    written in the relative variables W = X^{-1} dX, T = X^{-1} ddX.
 */

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "errors.hpp"
#include "liegroup.hpp"
#include "types.hpp"

namespace rotinterp {

struct PolarOptions
{
  /// Relative Frobenius increment at which the factor iteration stops.
  double tolerance = 1e-14;
  /// Relative increment for the derivative blocks (W, T, U, V, Z).
  double derivative_tolerance = 1e-13;
  int max_iterations          = 100;
  /// Extra derivative sweeps at the converged iterate.
  int cleanup_sweeps = 2;
};

template <int Dim>
struct PolarFactors
{
  RotationMatrix<Dim> q;
  Matrix<Dim> y;  ///< symmetric positive definite stretch
  int iterations{0};
  double residual{0.0};  ///< ||Q Y - A||_F / ||A||_F
};

namespace detail {

template <int Dim>
void require_positive_determinant(const Matrix<Dim> & a, const char * who)
{
  require_square(a, who);
  const double det = a.determinant();
  if (!(det > 0.0)) {
    throw ProjectionDomainError(std::string(who) + ": det(A) <= 0, outside the projection domain",
                                std::nullopt,
                                det);
  }
}

template <int Dim>
PolarFactors<Dim> finish_factors(const Matrix<Dim> & a, const Matrix<Dim> & q, int iterations)
{
  PolarFactors<Dim> f;
  f.q          = q;
  f.y          = sym_part((q.transpose() * a).eval());
  f.iterations = iterations;
  f.residual   = (q * f.y - a).norm() / a.norm();
  return f;
}

}  // namespace detail

/// Newton iteration X <- (X + X^{-T}) / 2 from X = A.
template <int Dim>
PolarFactors<Dim> polar_newton(const Matrix<Dim> & a, const PolarOptions & opt = {})
{
  detail::require_positive_determinant(a, "polar_newton");
  Matrix<Dim> x = a;
  for (int k = 1; k <= opt.max_iterations; ++k) {
    const Matrix<Dim> next = 0.5 * (x + x.inverse().transpose());
    const double step      = (next - x).norm();
    x                      = next;
    if (step <= opt.tolerance * x.norm()) {
      return detail::finish_factors(a, x, k);
    }
  }
  throw ConvergenceError("polar_newton: no convergence within iteration cap");
}

/// Power-iteration estimate of the largest singular value.
template <int Dim>
double spectral_norm_estimate(const Matrix<Dim> & a, int iterations = 30)
{
  using Vec = Eigen::Matrix<double, Dim, 1>;
  Vec v     = Vec::Ones(a.cols()).normalized();
  double s  = 0.0;
  for (int i = 0; i < iterations; ++i) {
    const Vec w = a.transpose() * (a * v);
    const double n = w.norm();
    if (n == 0.0) {
      return 0.0;
    }
    v = w / n;
    s = std::sqrt(n);
  }
  return s;
}

/**
 * @brief Inversion-free Newton-Schulz iteration X <- X (3I - X^T X) / 2.
 *
 * Converges only when every singular value of A lies in (0, sqrt 3);
 * the spectral norm is checked up front by power iteration and divergence
 * is reported as a precondition failure.
 */
template <int Dim>
PolarFactors<Dim> polar_newton_schulz(const Matrix<Dim> & a, const PolarOptions & opt = {})
{
  detail::require_positive_determinant(a, "polar_newton_schulz");
  if (spectral_norm_estimate(a) >= std::sqrt(3.0)) {
    throw PreconditionError("polar_newton_schulz: spectral norm of A is not below sqrt(3)");
  }
  const Matrix<Dim> id = Matrix<Dim>::Identity(a.rows(), a.cols());
  Matrix<Dim> x        = a;
  for (int k = 1; k <= opt.max_iterations; ++k) {
    const Matrix<Dim> next = 0.5 * x * (3.0 * id - x.transpose() * x);
    const double step      = (next - x).norm();
    x                      = next;
    if (!std::isfinite(step) || x.norm() > 1e6) {
      throw PreconditionError("polar_newton_schulz: iteration diverged");
    }
    if (step <= opt.tolerance * x.norm()) {
      return detail::finish_factors(a, x, k);
    }
  }
  throw ConvergenceError("polar_newton_schulz: no convergence within iteration cap");
}

/// O = Q^T dQ from Y O + O Y = Q^T dA - dA^T Q.
template <int Dim>
SkewMatrix<Dim> polar_derivative_lyapunov(const PolarFactors<Dim> & f, const Matrix<Dim> & da)
{
  const Matrix<Dim> rhs = f.q.transpose() * da - da.transpose() * f.q;
  return skew_part(lyapunov_solve<Dim>(f.y, rhs));
}

template <int Dim>
struct PolarVelocity
{
  Matrix<Dim> q_dot;
  Matrix<Dim> y_dot;
};

/// Route through the stretch: Y dY + dY Y = dA^T A + A^T dA, then
/// dQ = (dA - Q dY) Y^{-1}.  A is reconstructed as Q Y.
template <int Dim>
PolarVelocity<Dim> polar_derivative_stretch(const PolarFactors<Dim> & f, const Matrix<Dim> & da)
{
  const Matrix<Dim> a   = f.q * f.y;
  const Matrix<Dim> rhs = da.transpose() * a + a.transpose() * da;
  PolarVelocity<Dim> out;
  out.y_dot = sym_part(lyapunov_solve<Dim>(f.y, rhs));
  out.q_dot = (da - f.q * out.y_dot) * f.y.inverse();
  return out;
}

/// Explicit derivatives where A itself is orthogonal:
/// dQ = Q skew(A^{-1} dA), dY = sym(A^{-1} dA).
template <int Dim>
PolarVelocity<Dim> polar_derivative_at_node(const Matrix<Dim> & a, const Matrix<Dim> & da)
{
  detail::require_square(a, "polar_derivative_at_node");
  if (orthogonality_residual(a) > 1e-10) {
    throw PreconditionError("polar_derivative_at_node: A is not orthogonal");
  }
  const Matrix<Dim> rel = a.inverse() * da;
  return {a * skew_part(rel), sym_part(rel)};
}

/// Closed form for n = 3:
/// dQ = 2 Q det(Z)^{-1} Z skew(Y A^{-1} dA) Z with Z = tr(Y) I - Y.
/// Follows from Y hat(w) + hat(w) Y = hat(Z w) and hat(M w) = det(M) M^{-T} hat(w) M^{-1}.
inline Mat3 polar_derivative_3d(const Mat3 & a, const Mat3 & da, const PolarFactors<3> & f)
{
  const Mat3 z     = f.y.trace() * Mat3::Identity() - f.y;
  const double det = z.determinant();
  const double scale = f.y.trace();
  if (std::abs(det) <= 1e-12 * scale * scale * scale) {
    throw SingularityError("polar_derivative_3d: Z = tr(Y) I - Y is singular");
  }
  return (2.0 / det) * f.q * z * skew_part((f.y * a.inverse() * da).eval()) * z;
}

/// Coupled Newton-Schulz iteration for (Q, dQ):
/// E <- E (3I - X^T X)/2 - X (E^T X + X^T E)/2.
template <int Dim>
std::pair<Matrix<Dim>, Matrix<Dim>> polar_velocity_newton_schulz(const Matrix<Dim> & a,
                                                                 const Matrix<Dim> & da,
                                                                 const PolarOptions & opt = {})
{
  detail::require_positive_determinant(a, "polar_velocity_newton_schulz");
  if (spectral_norm_estimate(a) >= std::sqrt(3.0)) {
    throw PreconditionError("polar_velocity_newton_schulz: spectral norm of A is not below sqrt(3)");
  }
  const Matrix<Dim> id = Matrix<Dim>::Identity(a.rows(), a.cols());
  Matrix<Dim> x        = a;
  Matrix<Dim> e        = da;
  for (int k = 1; k <= opt.max_iterations; ++k) {
    const Matrix<Dim> xtx    = x.transpose() * x;
    const Matrix<Dim> x_next = 0.5 * x * (3.0 * id - xtx);
    const Matrix<Dim> e_next = 0.5 * e * (3.0 * id - xtx) - 0.5 * x * (e.transpose() * x + x.transpose() * e);
    const double dx          = (x_next - x).norm();
    const double de          = (e_next - e).norm();
    x                        = x_next;
    e                        = e_next;
    if (!std::isfinite(dx) || x.norm() > 1e6) {
      throw PreconditionError("polar_velocity_newton_schulz: iteration diverged");
    }
    if (dx <= opt.tolerance * x.norm() && de <= opt.derivative_tolerance * std::max(e.norm(), 1e-300)) {
      return {x, e};
    }
  }
  throw ConvergenceError("polar_velocity_newton_schulz: no convergence within iteration cap");
}

/// Limits of the coupled iteration in a second parameter eps:
/// U = Q^T dQ/deps, V = Q^T d(dQ/dt)/deps, Z = Q^T d(d2Q/dt2)/deps.
template <int Dim>
struct PolarParamBlock
{
  Matrix<Dim> u;
  Matrix<Dim> v;
  Matrix<Dim> z;
};

template <int Dim>
struct PolarJet
{
  RotationMatrix<Dim> q;
  Matrix<Dim> vel;  ///< W = Q^T dQ/dt (skew)
  Matrix<Dim> acc;  ///< T = Q^T d2Q/dt2
  int iterations{0};
  std::optional<PolarParamBlock<Dim>> param;

  [[nodiscard]] Matrix<Dim> q_dot() const { return q * vel; }
  [[nodiscard]] Matrix<Dim> q_ddot() const { return q * acc; }
};

/**
 * @brief Newton iteration for Q together with its first and second
 * t-derivatives, keeping the iterate history so that any number of
 * parameter directions can be propagated afterwards without redoing the
 * base iteration.
 *
 *   X' = (X + X^{-T}) / 2
 *   W' = X'^{-1} (X W - X^{-T} W^T) / 2
 *   T' = X'^{-1} (X T - X^{-T} (T - 2 W^2)^T) / 2
 */
template <int Dim>
class CoupledPolarIteration
{
public:
  CoupledPolarIteration(const Matrix<Dim> & a,
                        const Matrix<Dim> & da,
                        const Matrix<Dim> & dda,
                        const PolarOptions & opt = {})
      : opt_(opt)
  {
    detail::require_positive_determinant(a, "polar_jet");
    Matrix<Dim> x     = a;
    Matrix<Dim> x_inv = a.inverse();
    Matrix<Dim> w     = x_inv * da;
    Matrix<Dim> t     = x_inv * dda;

    bool converged = false;
    for (int k = 1; k <= opt.max_iterations; ++k) {
      const Matrix<Dim> x_inv_t    = x_inv.transpose();
      const Matrix<Dim> x_next     = 0.5 * (x + x_inv_t);
      const Matrix<Dim> x_next_inv = x_next.inverse();
      const Matrix<Dim> w_next     = 0.5 * x_next_inv * (x * w - x_inv_t * w.transpose());
      const Matrix<Dim> t_next =
          0.5 * x_next_inv * (x * t - x_inv_t * (t - 2.0 * w * w).transpose());

      steps_.push_back({x, x_inv_t, x_next_inv, w, t});

      const double dx = (x_next - x).norm();
      const double dw = (w_next - w).norm();
      const double dt = (t_next - t).norm();
      x               = x_next;
      x_inv           = x_next_inv;
      w               = w_next;
      t               = t_next;

      const bool x_done = dx <= opt.tolerance * x.norm();
      const bool w_done = dw <= opt.derivative_tolerance * w.norm();
      const bool t_done = dt <= opt.derivative_tolerance * (t.norm() + w.squaredNorm());
      if (x_done && w_done && t_done) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw ConvergenceError("polar_jet: no convergence within iteration cap");
    }

    // Cleanup sweeps at the converged iterate (X' = X).
    const Matrix<Dim> x_inv_t = x_inv.transpose();
    for (int s = 0; s < opt.cleanup_sweeps; ++s) {
      steps_.push_back({x, x_inv_t, x_inv, w, t});
      const Matrix<Dim> w_next = 0.5 * x_inv * (x * w - x_inv_t * w.transpose());
      const Matrix<Dim> t_next = 0.5 * x_inv * (x * t - x_inv_t * (t - 2.0 * w * w).transpose());
      w                        = w_next;
      t                        = t_next;
    }

    jet_.q          = x;
    jet_.vel        = w;
    jet_.acc        = t;
    jet_.iterations = static_cast<int>(steps_.size()) - opt.cleanup_sweeps;
  }

  [[nodiscard]] const PolarJet<Dim> & jet() const { return jet_; }

  /**
   * @brief Propagate a parameter direction (dA, d(A'), d(A'')) along the
   * stored iterates.
   *
   *   U' = X'^{-1} (X U - X^{-T} U^T) / 2
   *   V' = X'^{-1} (X V - X^{-T} (V - W U - U W)^T) / 2
   *   Z' = X'^{-1} (X Z - X^{-T} S^T) / 2,
   *   S  = Z - T U - U T - 2 (W V + V W) + 2 (W W U + W U W + U W W)
   */
  [[nodiscard]] PolarParamBlock<Dim> parametric(const Matrix<Dim> & delta_a,
                                                const Matrix<Dim> & delta_da,
                                                const Matrix<Dim> & delta_dda) const
  {
    const Matrix<Dim> a_inv = steps_.front().x_inv_t.transpose();
    Matrix<Dim> u           = a_inv * delta_a;
    Matrix<Dim> v           = a_inv * delta_da;
    Matrix<Dim> z           = a_inv * delta_dda;
    for (const Step & s : steps_) {
      const Matrix<Dim> wu = s.w * u;
      const Matrix<Dim> uw = u * s.w;
      const Matrix<Dim> sv = v - wu - uw;
      const Matrix<Dim> sz = z - s.t * u - u * s.t - 2.0 * (s.w * v + v * s.w) +
                             2.0 * (s.w * wu + wu * s.w + uw * s.w);
      const Matrix<Dim> u_next = 0.5 * s.x_next_inv * (s.x * u - s.x_inv_t * u.transpose());
      const Matrix<Dim> v_next = 0.5 * s.x_next_inv * (s.x * v - s.x_inv_t * sv.transpose());
      const Matrix<Dim> z_next = 0.5 * s.x_next_inv * (s.x * z - s.x_inv_t * sz.transpose());
      u                        = u_next;
      v                        = v_next;
      z                        = z_next;
    }
    return {u, v, z};
  }

private:
  struct Step
  {
    Matrix<Dim> x;
    Matrix<Dim> x_inv_t;
    Matrix<Dim> x_next_inv;
    Matrix<Dim> w;
    Matrix<Dim> t;
  };

  PolarOptions opt_;
  std::vector<Step> steps_;
  PolarJet<Dim> jet_;
};

/// Q, Q^T dQ and Q^T ddQ for A(t) given A, A', A''.
template <int Dim>
PolarJet<Dim> polar_jet(const Matrix<Dim> & a,
                        const Matrix<Dim> & da,
                        const Matrix<Dim> & dda,
                        const PolarOptions & opt = {})
{
  return CoupledPolarIteration<Dim>(a, da, dda, opt).jet();
}

/// `polar_jet` plus the parametric block for one parameter direction.
template <int Dim>
PolarJet<Dim> polar_jet_param(const Matrix<Dim> & a,
                              const Matrix<Dim> & da,
                              const Matrix<Dim> & dda,
                              const Matrix<Dim> & delta_a,
                              const Matrix<Dim> & delta_da,
                              const Matrix<Dim> & delta_dda,
                              const PolarOptions & opt = {})
{
  const CoupledPolarIteration<Dim> it(a, da, dda, opt);
  PolarJet<Dim> jet = it.jet();
  jet.param         = it.parametric(delta_a, delta_da, delta_dda);
  return jet;
}

template <int Dim>
struct SegmentVelocity
{
  RotationMatrix<Dim> q;
  SkewMatrix<Dim> body_vel;  ///< Q^T dQ/dt
};

/**
 * @brief Projection of the linear blend A(t) = ((h-t) R0 + t R1) / h and
 * its body velocity skew(A^{-1} A'), which holds exactly for this blend.
 */
template <int Dim>
SegmentVelocity<Dim> linear_segment_velocity(const RotationMatrix<Dim> & r0,
                                             const RotationMatrix<Dim> & r1,
                                             double h,
                                             double t)
{
  if (!(h > 0.0)) {
    throw PreconditionError("linear_segment_velocity: h must be positive");
  }
  const Matrix<Dim> a  = ((h - t) / h) * r0 + (t / h) * r1;
  const Matrix<Dim> da = (r1 - r0) / h;
  const double det     = a.determinant();
  if (!(det > 1e-14)) {
    throw SingularityError("linear_segment_velocity: blend is singular");
  }
  return {polar_newton<Dim>(a).q, skew_part((a.inverse() * da).eval())};
}

}  // namespace rotinterp
