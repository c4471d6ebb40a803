#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace rotinterp {

/// Square matrix of compile-time size `Dim`, or `Eigen::Dynamic` for the
/// general-n fallback.  All hot paths instantiate `Dim = 3`.
template <int Dim>
using Matrix = Eigen::Matrix<double, Dim, Dim>;

using Mat3 = Matrix<3>;
using MatX = Matrix<Eigen::Dynamic>;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

/// Element of SO(n).  Alias only: orthogonality is a documented invariant
/// checked by `orthogonality_residual`, not by the type system.
template <int Dim>
using RotationMatrix = Matrix<Dim>;

/// Element of so(n), stored densely.
template <int Dim>
using SkewMatrix = Matrix<Dim>;

/// Preimage of an so(3) element under the hat map.
using AxisVector = Vec3;

}  // namespace rotinterp
