#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "rotinterp/interp_matrix.hpp"
#include "rotinterp/liegroup.hpp"
#include "support/oracles.hpp"

using namespace rotinterp;

namespace {

oracle::SmoothRotationCurve random_curve(oracle::Random & rng, double scale = 1.5)
{
  return {rng.vec3(scale), rng.vec3(0.5 * scale)};
}

HermiteRotationCurve<3> hermite_of(const oracle::SmoothRotationCurve & c, const Partition & p)
{
  return interpolate_hermite<3>(
      p, [&](double t) { return c.r(t); }, [&](double t) { return c.r_dot(t); });
}

LagrangeRotationCurve<3> lagrange_of(const oracle::SmoothRotationCurve & c, const Partition & p, int r)
{
  return interpolate_lagrange<3>(p, r, [&](double t) { return c.r(t); });
}

std::vector<Mat3> random_rotations(oracle::Random & rng, std::size_t n, double spread)
{
  std::vector<Mat3> out{rng.rotation()};
  while (out.size() < n) {
    out.push_back(out.back() * rng.rotation(spread));
  }
  return out;
}

std::vector<Mat3> random_velocities(oracle::Random & rng, std::size_t n, double scale)
{
  std::vector<Mat3> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(oracle::cross_matrix(rng.vec3(scale)));
  }
  return out;
}

}  // namespace

TEST_CASE("hermite basis")
{
  const HermiteBasis b0 = hermite_basis(0.0);
  const HermiteBasis b1 = hermite_basis(1.0);
  CHECK(b0.value == std::array<double, 4>{1, 0, 0, 0});
  CHECK(b1.value == std::array<double, 4>{0, 1, 0, 0});
  CHECK(b0.d1 == std::array<double, 4>{0, 0, 1, 0});
  CHECK(b1.d1 == std::array<double, 4>{0, 0, 0, 1});
  for (double s = -0.5; s <= 1.5; s += 0.125) {
    const HermiteBasis b = hermite_basis(s);
    CHECK(b.value[0] + b.value[1] == doctest::Approx(1.0).epsilon(1e-15));
    const double e = 1e-6;
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(b.d1[i] == doctest::Approx((hermite_basis(s + e).value[i] - hermite_basis(s - e).value[i]) / (2 * e)).epsilon(1e-8));
      CHECK(b.d2[i] == doctest::Approx((hermite_basis(s + e).d1[i] - hermite_basis(s - e).d1[i]) / (2 * e)).epsilon(1e-8));
    }
  }
}

TEST_CASE("partition")
{
  CHECK_THROWS_AS(Partition({0.0, 1.0, 1.0}), PreconditionError);
  CHECK_THROWS_AS(Partition({0.0}), PreconditionError);
  const Partition p({0.0, 0.25, 0.5, 1.0});
  CHECK(p.elements() == 3);
  CHECK(p.locate(0.0) == 0);
  CHECK(p.locate(0.25) == 0);
  CHECK(p.locate(0.26) == 1);
  CHECK(p.locate(1.0) == 2);
  CHECK(p.knot_index(0.5) == 2);
  CHECK(p.knot_index(0.6) == -1);
  CHECK_THROWS_AS(p.locate(1.5), PreconditionError);
  const Partition u = Partition::uniform(0.0, 2.0, 4);
  CHECK(u.knot(3) == 1.5);
  CHECK(u.back() == 2.0);
}

TEST_CASE("lagrange interpolant")
{
  oracle::Random rng(41);
  for (int r = 1; r <= 3; ++r) {
    const Partition p     = Partition::uniform(0.0, 1.0, 3);
    const auto nodes      = random_rotations(rng, static_cast<std::size_t>(3 * r + 1), 0.6);
    const LagrangeRotationCurve<3> c(p, r, nodes);
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
      CHECK((eval_lagrange(c, c.node_time(i)) - nodes[static_cast<std::size_t>(i)]).norm() <= 1e-14);
    }
    const Mat3 fixed = rng.rotation();
    const LagrangeRotationCurve<3> k(p, r, std::vector<Mat3>(nodes.size(), fixed));
    for (double t = 0.0; t <= 1.0; t += 0.05) {
      CHECK((k.evaluate(t) - fixed).norm() <= 1e-14);
    }
  }
  CHECK_THROWS_AS(LagrangeRotationCurve<3>(Partition::uniform(0, 1, 2), 2, std::vector<Mat3>(4)), DimensionError);

  // Half-turn between nodes: the blend is singular at the midpoint.
  const Mat3 half = Vec3(1, -1, -1).asDiagonal();
  const LagrangeRotationCurve<3> bad(Partition::uniform(0, 1, 2), 1, {Mat3::Identity(), Mat3::Identity(), half});
  CHECK_NOTHROW(bad.evaluate(0.25));
  try {
    (void)bad.evaluate(0.75);
    FAIL("expected a projection-domain error");
  } catch (const ProjectionDomainError & e) {
    CHECK(e.element() == 1);
    CHECK(e.determinant().has_value());
  }
}

TEST_CASE("lagrange interpolant is the chordal geodesic finite element")
{
  oracle::Random rng(42);
  for (int inst = 0; inst < 20; ++inst) {
    const int r   = 1 + inst % 3;
    const auto nd = random_rotations(rng, static_cast<std::size_t>(r + 1), 0.5);
    const LagrangeRotationCurve<3> c(Partition::uniform(0, 1, 1), r, nd);
    const double t  = rng.uniform(0.0, 1.0);
    const auto phi  = LagrangeBasis(r).values(t);
    const Mat3 mean = oracle::chordal_mean_so3(phi, nd, nd[0]);
    CHECK((c.evaluate(t) - mean).norm() <= 1e-6);
  }
}

TEST_CASE("hermite interpolant")
{
  oracle::Random rng(43);
  const Partition p = Partition({0.0, 0.3, 0.5, 1.0});
  const auto rot    = random_rotations(rng, 4, 0.5);
  const auto vel    = random_velocities(rng, 4, 1.0);
  const HermiteRotationCurve<3> c(p, rot, vel);
  for (int k = 0; k <= 3; ++k) {
    const auto s = eval_hermite(c, p.knot(k));
    CHECK((s.r - rot[static_cast<std::size_t>(k)]).norm() <= 1e-14);
    CHECK((s.r_dot - rot[static_cast<std::size_t>(k)] * vel[static_cast<std::size_t>(k)]).norm() <= 1e-13);
  }

  for (double t : {0.05, 0.31, 0.49, 0.77}) {
    const auto s    = c.evaluate(t);
    const auto rfun = [&](double x) { return c.evaluate(x).r; };
    CHECK((s.r_dot - oracle::central_diff(rfun, t, 1e-5)).norm() <= 1e-5 * std::max(1.0, s.r_dot.norm()));
    CHECK((s.r_ddot - oracle::central_diff2(rfun, t, 1e-4)).norm() <= 1e-5 * std::max(1.0, s.r_ddot.norm()));
    const auto om = [&](double x) { return c.evaluate(x).omega; };
    CHECK((s.omega_dot - oracle::central_diff(om, t, 1e-5)).norm() <= 1e-5 * std::max(1.0, s.omega_dot.norm()));
    CHECK((s.omega + s.omega.transpose()).norm() == 0.0);
    CHECK(orthogonality_residual(s.r) <= 1e-10);
  }

  const Mat3 fixed = rng.rotation();
  const HermiteRotationCurve<3> k(p, std::vector<Mat3>(4, fixed), std::vector<Mat3>(4, Mat3::Zero()));
  const auto s = k.evaluate(0.4);
  CHECK((s.r - fixed).norm() <= 1e-14);
  CHECK(s.omega.norm() <= 1e-14);
  CHECK(s.omega_dot.norm() <= 1e-14);
  CHECK_THROWS_AS(HermiteRotationCurve<3>(p, rot, std::vector<Mat3>(3)), DimensionError);
}

TEST_CASE("hermite interpolant is C1 at interior knots")
{
  oracle::Random rng(44);
  for (int inst = 0; inst < 20; ++inst) {
    const Partition p = Partition::uniform(0.0, 1.0, 6);
    const HermiteRotationCurve<3> c(p, random_rotations(rng, 7, 0.5), random_velocities(rng, 7, 2.0));
    for (int k = 1; k < 6; ++k) {
      const auto left  = c.evaluate_on(k - 1, 1.0);
      const auto right = c.evaluate_on(k, 0.0);
      CHECK((left.r - right.r).norm() <= 1e-10);
      CHECK((left.r_dot - right.r_dot).norm() <= 1e-10);
    }
  }
}

TEST_CASE("interpolants of a constant function")
{
  const Mat3 fixed = exp_so3(Vec3(0.2, 0.4, -0.1));
  const Partition p = Partition::uniform(0.0, 1.0, 4);
  const auto h = interpolate_hermite<3>(
      p, [&](double) { return fixed; }, [](double) { return Mat3(Mat3::Zero()); });
  const auto l = interpolate_lagrange<3>(p, 2, [&](double) { return fixed; });
  for (double t = 0.0; t <= 1.0; t += 0.1) {
    CHECK((h.evaluate(t).r - fixed).norm() <= 1e-14);
    CHECK((l.evaluate(t) - fixed).norm() <= 1e-14);
  }
}

TEST_CASE("convergence orders")
{
  oracle::Random rng(45);
  const auto curve = random_curve(rng);

  const auto sup = [&](auto && err, int n) {
    double e = 0.0;
    for (int i = 0; i <= 40 * n; ++i) {
      e = std::max(e, err(static_cast<double>(i) / (40 * n)));
    }
    return e;
  };
  const auto widths = [](const std::vector<int> & ns) {
    std::vector<double> h;
    for (int n : ns) {
      h.push_back(1.0 / n);
    }
    return h;
  };
  // Values on the coarse sequence; slopes settle later for gradients.
  const std::vector<int> coarse{4, 8, 16, 32};
  const std::vector<int> fine{16, 32, 64, 128};

  for (int r = 1; r <= 3; ++r) {
    std::vector<double> ev, ed;
    for (int n : coarse) {
      const auto c = lagrange_of(curve, Partition::uniform(0, 1, n), r);
      ev.push_back(sup([&](double t) { return (c.evaluate(t) - curve.r(t)).norm(); }, n));
    }
    for (int n : fine) {
      const auto c = lagrange_of(curve, Partition::uniform(0, 1, n), r);
      ed.push_back(sup([&](double t) { return (c.evaluate_with_velocity(t).second - curve.r_dot(t)).norm(); }, n));
    }
    CAPTURE(r);
    CHECK(std::abs(oracle::fitted_order(widths(coarse), ev) - (r + 1)) <= 0.3);
    CHECK(std::abs(oracle::fitted_order(widths(fine), ed) - r) <= 0.3);
  }

  std::vector<double> ev, ed;
  for (int n : coarse) {
    const auto c = hermite_of(curve, Partition::uniform(0, 1, n));
    ev.push_back(sup([&](double t) { return (c.evaluate(t).r - curve.r(t)).norm(); }, n));
  }
  for (int n : fine) {
    const auto c = hermite_of(curve, Partition::uniform(0, 1, n));
    ed.push_back(sup([&](double t) { return (c.evaluate(t).r_dot - curve.r_dot(t)).norm(); }, n));
  }
  CHECK(std::abs(oracle::fitted_order(widths(coarse), ev) - 4.0) <= 0.3);
  CHECK(std::abs(oracle::fitted_order(widths(fine), ed) - 3.0) <= 0.3);
}

TEST_CASE("equivariance")
{
  oracle::Random rng(46);
  for (int inst = 0; inst < 10; ++inst) {
    const Partition p = Partition::uniform(0.0, 1.0, 3);
    const auto rot    = random_rotations(rng, 7, 0.5);
    const auto vel    = random_velocities(rng, 4, 1.0);
    const Mat3 u      = rng.rotation(3.1);
    const Mat3 v      = rng.rotation(3.1);

    std::vector<Mat3> rot_t, vel_t;
    for (const Mat3 & r : rot) {
      rot_t.push_back(u * r * v);
    }
    for (const Mat3 & w : vel) {
      vel_t.push_back(v.transpose() * w * v);  // (U R V)^T d(U R V) = V^T O V
    }
    const LagrangeRotationCurve<3> l(p, 2, rot), lt(p, 2, rot_t);
    const std::vector<Mat3> hr(rot.begin(), rot.begin() + 4), hrt(rot_t.begin(), rot_t.begin() + 4);
    const HermiteRotationCurve<3> h(p, hr, vel), ht(p, hrt, vel_t);
    for (int i = 0; i < 10; ++i) {
      const double t = rng.uniform(0.0, 1.0);
      CHECK((lt.evaluate(t) - u * l.evaluate(t) * v).norm() <= 1e-12);
      CHECK((ht.evaluate(t).r - u * h.evaluate(t).r * v).norm() <= 1e-12);
    }
  }
}

TEST_CASE("projection at most doubles the linear-space error")
{
  oracle::Random rng(47);
  int violations = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const auto curve = random_curve(rng, 2.0);
    const int r      = 1 + inst % 3;
    const auto c     = lagrange_of(curve, Partition::uniform(0, 1, 4), r);
    for (int i = 0; i < 10; ++i) {
      const double t = rng.uniform(0.0, 1.0);
      const double projected = (c.evaluate(t) - curve.r(t)).norm();
      const double linear    = (c.blend(t) - curve.r(t)).norm();
      if (projected > 2.0 * linear) {
        ++violations;
      }
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("general dimension")
{
  oracle::Random rng(48);
  std::vector<MatX> nodes;
  for (int i = 0; i < 3; ++i) {
    MatX k = rng.matrix<MatX>(4);
    k      = (0.3 * (k - k.transpose())).eval();
    nodes.push_back(oracle::expm<MatX>(k));
  }
  const LagrangeRotationCurve<Eigen::Dynamic> c(Partition::uniform(0, 1, 1), 2, nodes);
  const MatX q = c.evaluate(0.3);
  CHECK(orthogonality_residual(q) <= 1e-12);
  CHECK(q.determinant() > 0.0);
  CHECK((c.evaluate(0.5) - nodes[1]).norm() <= 1e-13);
}
