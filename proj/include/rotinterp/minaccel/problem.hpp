#pragma once

/**
 * @file
 * @brief Minimum-acceleration problem data, the reference sequence, and
 * the packing of unknowns
 *
 *   x = (w_0, y_1, w_1, ..., y_N, w_N),
 *
 * with y_k = beta_k (rotation angle about v_0) at constrained knots and
 * y_k = b_k (full exponential coordinates) elsewhere.
 */

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "../errors.hpp"
#include "../liegroup.hpp"
#include "../partition.hpp"
#include "../quaternion.hpp"
#include "../types.hpp"

namespace rotinterp::minaccel {

enum class Method
{
  matrix,
  quaternion
};

inline const char * method_name(Method m) { return m == Method::matrix ? "matrix" : "quaternion"; }

/// Direction v that R(time) must map v_0 to.
struct Target
{
  double time;
  Vec3 direction;
};

/**
 * Targets[0] is (t_0, v_0); every target time must be a knot of the
 * partition.  With `periodic` set, the last target must be (t_N, v_0) and
 * the curve is closed: R(t_N) = R(t_0) = I and equal end velocities.
 */
struct MinAccelProblem
{
  Partition partition;
  std::vector<Target> targets;
  Method method{Method::quaternion};
  bool periodic{false};
  int quadrature_points{4};

  [[nodiscard]] const Vec3 & v0() const { return targets.front().direction; }
  [[nodiscard]] int elements() const { return partition.elements(); }
  [[nodiscard]] double horizon() const { return partition.back() - partition.front(); }

  /// Uniform partition of [0, horizon] into n elements.
  static MinAccelProblem uniform(double horizon, int n, std::vector<Target> targets, Method method, bool periodic = false)
  {
    return {Partition::uniform(0.0, horizon, n), std::move(targets), method, periodic, 4};
  }
};

/// Knot index k_j of every target; throws SpecError on invalid input.
inline std::vector<int> target_knots(const MinAccelProblem & p)
{
  if (p.targets.empty()) {
    throw SpecError("problem: at least the initial direction is required");
  }
  if (p.quadrature_points < 1) {
    throw SpecError("problem: quadrature_points must be positive");
  }
  std::vector<int> k;
  for (std::size_t j = 0; j < p.targets.size(); ++j) {
    const Target & tg = p.targets[j];
    if (!(std::abs(tg.direction.norm() - 1.0) <= 1e-12)) {
      throw SpecError("problem: target " + std::to_string(j) + " is not a unit vector");
    }
    const int idx = p.partition.knot_index(tg.time);
    if (idx < 0) {
      throw SpecError("problem: target time " + std::to_string(tg.time) + " is not a knot");
    }
    if (!k.empty() && idx <= k.back()) {
      throw SpecError("problem: target times must be strictly increasing");
    }
    k.push_back(idx);
  }
  if (k.front() != 0) {
    throw SpecError("problem: the first target must sit at the initial knot");
  }
  if (p.periodic) {
    if (k.size() < 2 || k.back() != p.elements()) {
      throw SpecError("periodic problem: the last target must sit at the final knot");
    }
    if ((p.targets.back().direction - p.v0()).norm() > 1e-12) {
      throw SpecError("periodic problem: the final target must equal the initial direction");
    }
  }
  return k;
}

/// Offsets of every knot's y and w blocks inside x.
class UnknownLayout
{
public:
  explicit UnknownLayout(const MinAccelProblem & p) : n_(p.elements()), periodic_(p.periodic)
  {
    y_size_.assign(static_cast<std::size_t>(n_ + 1), 3);
    y_size_[0] = 0;
    const auto k = target_knots(p);
    for (std::size_t j = 1; j < k.size(); ++j) {
      y_size_[static_cast<std::size_t>(k[j])] = 1;
    }
    if (periodic_) {
      y_size_[static_cast<std::size_t>(n_)] = 0;
    }
    y_offset_.resize(y_size_.size());
    w_offset_.resize(y_size_.size());
    int m = 0;
    for (int r = 0; r <= n_; ++r) {
      y_offset_[static_cast<std::size_t>(r)] = m;
      m += y_size_[static_cast<std::size_t>(r)];
      if (periodic_ && r == n_) {
        w_offset_[static_cast<std::size_t>(r)] = w_offset_[0];
      } else {
        w_offset_[static_cast<std::size_t>(r)] = m;
        m += 3;
      }
    }
    size_ = m;
  }

  [[nodiscard]] int size() const { return size_; }
  [[nodiscard]] int elements() const { return n_; }
  [[nodiscard]] bool periodic() const { return periodic_; }
  /// n_k: 0 at the fixed initial knot (and the periodic end), 1 at
  /// constrained knots, 3 otherwise.
  [[nodiscard]] int y_size(int k) const { return y_size_.at(static_cast<std::size_t>(k)); }
  [[nodiscard]] int y_offset(int k) const { return y_offset_.at(static_cast<std::size_t>(k)); }
  [[nodiscard]] int w_offset(int k) const { return w_offset_.at(static_cast<std::size_t>(k)); }
  [[nodiscard]] bool constrained(int k) const { return y_size(k) == 1; }

private:
  int n_;
  bool periodic_;
  int size_{0};
  std::vector<int> y_size_;
  std::vector<int> y_offset_;
  std::vector<int> w_offset_;
};

/// Unpacked unknowns, indexed by knot.  `beta[k]` is meaningful where the
/// layout has y_size 1, `b[k]` where it has y_size 3.
struct UnknownCollections
{
  std::vector<Vec3> b;
  std::vector<double> beta;
  std::vector<Vec3> omega;

  static UnknownCollections zeros(int knots)
  {
    const auto n = static_cast<std::size_t>(knots);
    return {std::vector<Vec3>(n, Vec3::Zero()), std::vector<double>(n, 0.0), std::vector<Vec3>(n, Vec3::Zero())};
  }
};

inline Eigen::VectorXd pack(const UnknownLayout & layout, const UnknownCollections & c)
{
  const auto knots = static_cast<std::size_t>(layout.elements() + 1);
  if (c.b.size() != knots || c.beta.size() != knots || c.omega.size() != knots) {
    throw DimensionError("pack: collections must have one entry per knot");
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(layout.size());
  for (int k = 0; k <= layout.elements(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    if (layout.y_size(k) == 1) {
      x(layout.y_offset(k)) = c.beta[kk];
    } else if (layout.y_size(k) == 3) {
      x.segment<3>(layout.y_offset(k)) = c.b[kk];
    }
    if (!(layout.periodic() && k == layout.elements())) {
      x.segment<3>(layout.w_offset(k)) = c.omega[kk];
    }
  }
  return x;
}

inline UnknownCollections unpack(const UnknownLayout & layout, const Eigen::VectorXd & x)
{
  if (x.size() != layout.size()) {
    throw DimensionError("unpack: expected " + std::to_string(layout.size()) + " unknowns, got " +
                         std::to_string(x.size()));
  }
  UnknownCollections c = UnknownCollections::zeros(layout.elements() + 1);
  for (int k = 0; k <= layout.elements(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    if (layout.y_size(k) == 1) {
      c.beta[kk] = x(layout.y_offset(k));
    } else if (layout.y_size(k) == 3) {
      c.b[kk] = x.segment<3>(layout.y_offset(k));
    }
    c.omega[kk] = x.segment<3>(layout.w_offset(k));
  }
  return c;
}

/// Piecewise-geodesic reference with R_bar[k_j] v_0 = v_j, in both
/// representations (quaternions sign-continuous from the identity).
struct ReferenceSequence
{
  std::vector<Mat3> rotations;
  std::vector<Quaternion> quaternions;
};

/**
 * Between consecutive targets the reference advances by equal fractions of
 * the rotation carrying v_j to v_{j+1} about v_j x v_{j+1}, with the axis
 * scaled to the true angle between them.  Knots after the last target keep
 * the last value.
 */
inline ReferenceSequence build_reference(const MinAccelProblem & p)
{
  const auto k  = target_knots(p);
  const int n   = p.elements();
  ReferenceSequence ref;
  ref.rotations.assign(static_cast<std::size_t>(n + 1), Mat3::Identity());
  ref.quaternions.assign(static_cast<std::size_t>(n + 1), Quaternion::identity());
  for (std::size_t j = 0; j + 1 < k.size(); ++j) {
    const Vec3 & a0 = p.targets[j].direction;
    const Vec3 & a1 = p.targets[j + 1].direction;
    if ((a0 + a1).norm() <= 1e-8) {
      throw PreconditionError("build_reference: targets " + std::to_string(j) + " and " + std::to_string(j + 1) +
                              " are antipodal, the rotation axis is undetermined");
    }
    const Vec3 c       = a0.cross(a1);
    const double sin_t = c.norm();
    Vec3 axis          = Vec3::Zero();
    if (sin_t > 0.0) {
      axis = c * (std::atan2(sin_t, a0.dot(a1)) / sin_t);
    }
    const int span    = k[j + 1] - k[j];
    const Mat3 r0     = ref.rotations[static_cast<std::size_t>(k[j])];
    const Quaternion q0 = ref.quaternions[static_cast<std::size_t>(k[j])];
    for (int i = 1; i <= span; ++i) {
      const Vec3 step = (static_cast<double>(i) / span) * axis;
      ref.rotations[static_cast<std::size_t>(k[j] + i)]   = exp_so3(step) * r0;
      ref.quaternions[static_cast<std::size_t>(k[j] + i)] = quat_exp(step) * q0;
    }
  }
  for (int i = k.back() + 1; i <= n; ++i) {
    ref.rotations[static_cast<std::size_t>(i)]   = ref.rotations[static_cast<std::size_t>(i - 1)];
    ref.quaternions[static_cast<std::size_t>(i)] = ref.quaternions[static_cast<std::size_t>(i - 1)];
  }
  return ref;
}

/// Nodal values R_k / u_k, w_k decoded from x.
struct NodalData
{
  std::vector<Mat3> rotations;
  std::vector<Quaternion> quaternions;
  std::vector<Vec3> omega;
};

/**
 * R_k = R_bar_k exp(hat(b_k)) or R_bar_k exp(beta_k hat(v_0)), and the
 * quaternion analogues u_k = u_bar_k exp(0, b_k).  Knot 0 is the identity;
 * so is knot N of a periodic problem.
 */
inline NodalData decode_nodes(const MinAccelProblem & p,
                              const UnknownLayout & layout,
                              const ReferenceSequence & ref,
                              const Eigen::VectorXd & x)
{
  const UnknownCollections c = unpack(layout, x);
  const int n                = layout.elements();
  NodalData out;
  out.omega = c.omega;
  out.rotations.resize(static_cast<std::size_t>(n + 1));
  out.quaternions.resize(static_cast<std::size_t>(n + 1));
  for (int k = 0; k <= n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    Vec3 b        = Vec3::Zero();
    if (layout.y_size(k) == 1) {
      b = c.beta[kk] * p.v0();
    } else if (layout.y_size(k) == 3) {
      b = c.b[kk];
    }
    if (k == 0 || (layout.periodic() && k == n)) {
      out.rotations[kk]   = Mat3::Identity();
      out.quaternions[kk] = Quaternion::identity();
    } else {
      out.rotations[kk]   = ref.rotations[kk] * exp_so3(b);
      out.quaternions[kk] = ref.quaternions[kk] * quat_exp(b);
    }
  }
  return out;
}

/**
 * Starting point for the solver.  Zero (the reference itself with zero
 * rates), except for periodic problems: there the reference ends at a
 * rotation about v_0 by some angle g, and the closed curve must return to
 * the identity quaternion, so the twist is unwound linearly with
 * y_k = -(k/N) g v_0.
 */
inline Eigen::VectorXd initial_guess(const MinAccelProblem & p, const UnknownLayout & layout, const ReferenceSequence & ref)
{
  UnknownCollections c = UnknownCollections::zeros(layout.elements() + 1);
  if (layout.periodic()) {
    const int n          = layout.elements();
    const Quaternion & e = ref.quaternions[static_cast<std::size_t>(n)];
    const double gamma   = 2.0 * std::atan2(e.xyz.dot(p.v0()), e.w);
    for (int k = 1; k < n; ++k) {
      const double beta                      = -gamma * static_cast<double>(k) / n;
      c.beta[static_cast<std::size_t>(k)]    = beta;
      c.b[static_cast<std::size_t>(k)]       = beta * p.v0();
    }
  }
  return pack(layout, c);
}

}  // namespace rotinterp::minaccel
