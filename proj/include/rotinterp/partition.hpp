#pragma once

/**
 * @file
 * @brief 1D partitions t_0 < ... < t_N and the scalar shape functions used
 * on each element: Hermite cubics and equispaced Lagrange polynomials.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"

namespace rotinterp {

class Partition
{
public:
  explicit Partition(std::vector<double> knots) : knots_(std::move(knots))
  {
    if (knots_.size() < 2) {
      throw PreconditionError("Partition: need at least one element");
    }
    for (std::size_t k = 1; k < knots_.size(); ++k) {
      if (!(knots_[k] > knots_[k - 1])) {
        throw PreconditionError("Partition: knots must be strictly increasing");
      }
    }
  }

  /// N equal elements on [t0, t1].
  static Partition uniform(double t0, double t1, int n)
  {
    if (n < 1 || !(t1 > t0)) {
      throw PreconditionError("Partition::uniform: need n >= 1 and t1 > t0");
    }
    std::vector<double> k(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
      k[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n);
    }
    k.back() = t1;
    return Partition(std::move(k));
  }

  [[nodiscard]] int elements() const { return static_cast<int>(knots_.size()) - 1; }
  [[nodiscard]] const std::vector<double> & knots() const { return knots_; }
  [[nodiscard]] double knot(int k) const { return knots_.at(static_cast<std::size_t>(k)); }
  [[nodiscard]] double front() const { return knots_.front(); }
  [[nodiscard]] double back() const { return knots_.back(); }
  [[nodiscard]] double width(int k) const { return knot(k + 1) - knot(k); }
  [[nodiscard]] double max_width() const
  {
    double h = 0.0;
    for (int k = 0; k < elements(); ++k) {
      h = std::max(h, width(k));
    }
    return h;
  }

  /// Element containing t.  A shared knot belongs to the element on its
  /// left, except t_0 which belongs to element 0.
  [[nodiscard]] int locate(double t) const
  {
    const double slack = 1e-12 * (back() - front());
    if (t < front() - slack || t > back() + slack) {
      throw PreconditionError("Partition::locate: t = " + std::to_string(t) + " outside the partition");
    }
    if (t <= front()) {
      return 0;
    }
    const auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
    if (it == knots_.end()) {
      return elements() - 1;
    }
    return static_cast<int>(it - knots_.begin()) - 1;
  }

  /// Local coordinate of t on element k (0 at t_k, 1 at t_{k+1}).
  [[nodiscard]] double local(int k, double t) const { return (t - knot(k)) / width(k); }

  /// Global time of local coordinate s on element k.
  [[nodiscard]] double global(int k, double s) const { return (1.0 - s) * knot(k) + s * knot(k + 1); }

  /// Index k with t_k == t (to within 1e-12 of the span), or -1.
  [[nodiscard]] int knot_index(double t) const
  {
    const double tol = 1e-12 * (back() - front());
    for (std::size_t k = 0; k < knots_.size(); ++k) {
      if (std::abs(knots_[k] - t) <= tol) {
        return static_cast<int>(k);
      }
    }
    return -1;
  }

private:
  std::vector<double> knots_;
};

/// Hermite cubic shape functions in the order (phi0, phi1, psi0, psi1)
/// with their first and second derivatives in s.
struct HermiteBasis
{
  std::array<double, 4> value;
  std::array<double, 4> d1;
  std::array<double, 4> d2;
};

inline HermiteBasis hermite_basis(double s)
{
  const double s2 = s * s;
  const double s3 = s2 * s;
  HermiteBasis b;
  b.value = {2.0 * s3 - 3.0 * s2 + 1.0, -2.0 * s3 + 3.0 * s2, s3 - 2.0 * s2 + s, s3 - s2};
  b.d1    = {6.0 * s2 - 6.0 * s, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, 3.0 * s2 - 2.0 * s};
  b.d2    = {12.0 * s - 6.0, -12.0 * s + 6.0, 6.0 * s - 4.0, 6.0 * s - 2.0};
  return b;
}

/// Lagrange polynomials of degree r on r + 1 equispaced nodes of [0, 1].
class LagrangeBasis
{
public:
  explicit LagrangeBasis(int degree) : degree_(degree)
  {
    if (degree < 1 || degree > 3) {
      throw PreconditionError("LagrangeBasis: degree must be 1, 2 or 3");
    }
  }

  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] double node(int i) const { return static_cast<double>(i) / degree_; }

  [[nodiscard]] std::vector<double> values(double s) const
  {
    std::vector<double> out(static_cast<std::size_t>(degree_) + 1, 1.0);
    for (int i = 0; i <= degree_; ++i) {
      for (int j = 0; j <= degree_; ++j) {
        if (j != i) {
          out[static_cast<std::size_t>(i)] *= (s - node(j)) / (node(i) - node(j));
        }
      }
    }
    return out;
  }

  /// d/ds of each basis polynomial.
  [[nodiscard]] std::vector<double> derivatives(double s) const
  {
    std::vector<double> out(static_cast<std::size_t>(degree_) + 1, 0.0);
    for (int i = 0; i <= degree_; ++i) {
      double sum = 0.0;
      for (int m = 0; m <= degree_; ++m) {
        if (m == i) {
          continue;
        }
        double prod = 1.0 / (node(i) - node(m));
        for (int j = 0; j <= degree_; ++j) {
          if (j != i && j != m) {
            prod *= (s - node(j)) / (node(i) - node(j));
          }
        }
        sum += prod;
      }
      out[static_cast<std::size_t>(i)] = sum;
    }
    return out;
  }

private:
  int degree_;
};

}  // namespace rotinterp
