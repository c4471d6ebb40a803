#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace rotinterp {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// An operation was handed a matrix or vector of the wrong size.
class DimensionError : public Error
{
public:
  using Error::Error;
};

/// A documented precondition does not hold (non-orthogonal node, spectral
/// norm too large for Newton-Schulz, malformed partition, ...).
class PreconditionError : public Error
{
public:
  using Error::Error;
};

/// Logarithm requested at a rotation whose axis is not unique (angle ~ pi
/// for SO(3), quaternion ~ -1).
class IllConditionedLogError : public Error
{
public:
  using Error::Error;
};

/// Singular linear operator (Cayley inverse at angle pi, singular Z in the
/// 3x3 polar derivative, singular linear blend).
class SingularityError : public Error
{
public:
  using Error::Error;
};

/// Quaternion too close to zero to invert or normalize.
class ZeroQuaternionError : public Error
{
public:
  using Error::Error;
};

/// An iteration hit its cap without meeting its tolerance.
class ConvergenceError : public Error
{
public:
  using Error::Error;
};

/// Point outside the domain of the closest point projection: a matrix with
/// non-positive determinant, or a zero quaternion blend.  Interpolants fill
/// in the element index and, for matrices, the offending determinant.
class ProjectionDomainError : public Error
{
public:
  explicit ProjectionDomainError(const std::string & what,
                                 std::optional<int> element       = std::nullopt,
                                 std::optional<double> determinant = std::nullopt,
                                 std::optional<int> quad_point    = std::nullopt)
      : Error(what), element_(element), determinant_(determinant), quad_point_(quad_point)
  {}

  [[nodiscard]] std::optional<int> element() const { return element_; }
  [[nodiscard]] std::optional<double> determinant() const { return determinant_; }
  [[nodiscard]] std::optional<int> quad_point() const { return quad_point_; }

private:
  std::optional<int> element_;
  std::optional<double> determinant_;
  std::optional<int> quad_point_;
};

/// Invalid problem or CLI specification.
class SpecError : public Error
{
public:
  using Error::Error;
};

}  // namespace rotinterp
