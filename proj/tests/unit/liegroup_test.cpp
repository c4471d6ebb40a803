#include <cmath>
#include <numbers>

#include <doctest.h>

#include "rotinterp/liegroup.hpp"
#include "rotinterp/quaternion.hpp"
#include "support/oracles.hpp"

using namespace rotinterp;

namespace {

constexpr double pi = std::numbers::pi;

Quaternion random_quat(oracle::Random & rng)
{
  return {rng.normal(), rng.normal(), rng.normal(), rng.normal()};
}

double qdist(const Quaternion & a, const Quaternion & b) { return (a - b).norm(); }

}  // namespace

TEST_CASE("hat reads off the cross product matrix")
{
  Mat3 expected;
  expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  CHECK((hat(Vec3(1, 2, 3)) - expected).norm() == 0.0);
  CHECK(hat(Vec3::Zero()).norm() == 0.0);
  CHECK((hat(Vec3::UnitZ()) * Vec3::UnitX() - Vec3::UnitY()).norm() == 0.0);

  oracle::Random rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = rng.vec3();
    CHECK((hat(v) - oracle::cross_matrix(v)).norm() == 0.0);
  }
}

TEST_CASE("vee inverts hat")
{
  Mat3 m;
  m << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  CHECK((vee(m) - Vec3(1, 2, 3)).norm() == 0.0);
  CHECK(vee(Mat3::Zero()).norm() == 0.0);
  oracle::Random rng(2);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = rng.vec3();
    CHECK((vee(hat(v)) - v).norm() == 0.0);
  }
  CHECK_THROWS_AS(vee(MatX::Zero(4, 4)), DimensionError);
}

TEST_CASE("skew and symmetric parts")
{
  Eigen::Matrix2d a;
  a << 1, 2, 0, 1;
  Eigen::Matrix2d sk, sy;
  sk << 0, 1, -1, 0;
  sy << 1, 1, 1, 1;
  CHECK((skew_part(a) - sk).norm() == 0.0);
  CHECK((sym_part(a) - sy).norm() == 0.0);

  oracle::Random rng(3);
  const Mat3 m = rng.matrix<Mat3>(3);
  const Mat3 s = m + m.transpose();
  const Mat3 k = m - m.transpose();
  CHECK(skew_part(s).norm() == 0.0);
  CHECK((sym_part(s) - s).norm() == 0.0);
  CHECK((skew_part(k) - k).norm() == 0.0);
  CHECK(sym_part(k).norm() == 0.0);
  CHECK((skew_part(m) + sym_part(m) - m).norm() <= 1e-15);
}

TEST_CASE("exp_so3")
{
  CHECK((exp_so3(Vec3::Zero()) - Mat3::Identity()).norm() == 0.0);
  CHECK((exp_so3(Vec3(0, 0, pi / 2)) * Vec3::UnitX() - Vec3::UnitY()).norm() <= 1e-15);

  oracle::Random rng(4);
  for (int i = 0; i < 200; ++i) {
    const Vec3 v = rng.unit3() * rng.uniform(0.0, pi);
    CHECK((exp_so3(v) - oracle::expm<Mat3>(oracle::cross_matrix(v))).norm() <= 1e-12);
  }
  // Both sides of the small-angle switch.
  for (double s : {1e-8, 9.9e-5, 1.01e-4, 1e-3}) {
    const Vec3 v = Vec3(0.3, -0.4, 0.5).normalized() * s;
    CHECK((exp_so3(v) - oracle::expm<Mat3>(oracle::cross_matrix(v))).norm() <= 1e-15);
  }
}

TEST_CASE("log_so3")
{
  CHECK(log_so3(Mat3::Identity()).norm() == 0.0);
  CHECK((log_so3(exp_so3(Vec3(0, 0, pi / 2))) - Vec3(0, 0, pi / 2)).norm() <= 1e-15);

  oracle::Random rng(5);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Mat3 r = rng.rotation(3.0);
    const Vec3 v = log_so3(r);
    CHECK(v.norm() < pi);
    worst = std::max(worst, (exp_so3(v) - r).norm());
  }
  CHECK(worst <= 1e-10);

  for (double s : {1e-9, 5e-5, 2e-4}) {
    const Vec3 v = Vec3(1, 2, -2).normalized() * s;
    CHECK((log_so3(exp_so3(v)) - v).norm() <= 1e-16);
  }
  CHECK_THROWS_AS(log_so3(exp_so3(Vec3(0, pi, 0))), IllConditionedLogError);
  CHECK_THROWS_AS(log_so3(exp_so3(Vec3(0, 0, pi - 1e-8))), IllConditionedLogError);
  CHECK_NOTHROW(log_so3(exp_so3(Vec3(0, 0, pi - 1e-4))));
}

TEST_CASE("dexp_so3")
{
  oracle::Random rng(6);
  const Vec3 v0 = rng.vec3();
  CHECK((dexp_so3(Vec3::Zero(), v0) - oracle::cross_matrix(v0)).norm() <= 1e-15);

  for (int i = 0; i < 100; ++i) {
    const Vec3 w = rng.unit3() * rng.uniform(0.0, 3.0);
    const Vec3 v = rng.vec3();
    const double eps = 1e-5;
    const Mat3 fd = (exp_so3(w + eps * v) - exp_so3(w - eps * v)) / (2 * eps);
    CHECK((dexp_so3(w, v) - fd).norm() <= 1e-6);
  }
  // Commuting directions: d/ds exp(w + s w) = hat(w) exp(w).
  for (int i = 0; i < 20; ++i) {
    const Vec3 w = rng.unit3() * rng.uniform(0.0, 3.0);
    const Vec3 v = rng.uniform(-2.0, 2.0) * w;
    CHECK((dexp_so3(w, v) - oracle::cross_matrix(v) * exp_so3(w)).norm() <= 1e-13);
  }
  // Series branch.
  for (double s : {1e-7, 5e-5}) {
    const Vec3 w = rng.unit3() * s;
    const Vec3 v = rng.vec3();
    const double eps = 1e-6;
    const Mat3 fd = (oracle::expm<Mat3>(oracle::cross_matrix(w + eps * v)) -
                     oracle::expm<Mat3>(oracle::cross_matrix(w - eps * v))) / (2 * eps);
    CHECK((dexp_so3(w, v) - fd).norm() <= 1e-8);
  }
}

TEST_CASE("cayley transform")
{
  CHECK((cayley<3>(Mat3::Zero()) - Mat3::Identity()).norm() == 0.0);
  CHECK(cayley_inv<3>(Mat3::Identity()).norm() == 0.0);

  oracle::Random rng(7);
  for (int i = 0; i < 100; ++i) {
    Mat3 k = oracle::cross_matrix(rng.vec3());
    k *= rng.uniform(0.0, 1.0) / k.norm();
    const Mat3 q = cayley<3>(k);
    CHECK(orthogonality_residual(q) <= 1e-12);
    CHECK(q.determinant() > 0.0);
    CHECK((cayley_inv<3>(q) - k).norm() <= 1e-13);
  }
  // General n.
  MatX k = rng.matrix<MatX>(5);
  k      = 0.5 * (k - k.transpose()).eval();
  CHECK(orthogonality_residual(cayley<Eigen::Dynamic>(k)) <= 1e-12);
  CHECK_THROWS_AS(cayley_inv<3>(exp_so3(Vec3(pi, 0, 0))), SingularityError);
}

TEST_CASE("quaternion product")
{
  oracle::Random rng(8);
  const Quaternion q = random_quat(rng);
  CHECK(qdist(Quaternion::identity() * q, q) == 0.0);
  CHECK(qdist(Quaternion(0, 1, 0, 0) * Quaternion(0, 1, 0, 0), Quaternion(-1, 0, 0, 0)) == 0.0);
  CHECK(qdist(Quaternion(0, 1, 0, 0) * Quaternion(0, 0, 1, 0), Quaternion(0, 0, 0, 1)) == 0.0);
  for (int i = 0; i < 100; ++i) {
    const Quaternion a = random_quat(rng);
    const Quaternion b = random_quat(rng);
    const Quaternion c = random_quat(rng);
    CHECK(qdist((a * b) * c, a * (b * c)) <= 1e-14 * (1.0 + a.norm() * b.norm() * c.norm()));
  }
}

TEST_CASE("conjugate, inverse, real and imaginary parts")
{
  oracle::Random rng(9);
  for (int i = 0; i < 100; ++i) {
    const Quaternion q = random_quat(rng);
    const Quaternion u = q / q.norm();
    CHECK(qdist(quat_inv(u), quat_conj(u)) <= 1e-15);
    CHECK(qdist(quat_re(q) + quat_im(q), q) == 0.0);
    CHECK(qdist(q * quat_inv(q), Quaternion::identity()) <= 1e-14);
    const Quaternion qq = q * quat_conj(q);
    CHECK(std::abs(qq.w - q.squared_norm()) <= 1e-14 * q.squared_norm());
    CHECK(qq.xyz.norm() <= 1e-14 * q.squared_norm());
  }
  CHECK_THROWS_AS(quat_inv(Quaternion::zero()), ZeroQuaternionError);
}

TEST_CASE("quaternion exponential and logarithm")
{
  CHECK(qdist(quat_exp(Vec3::Zero()), Quaternion::identity()) == 0.0);
  CHECK(qdist(quat_exp(Vec3(pi, 0, 0)), Quaternion(0, 1, 0, 0)) <= 1e-16);

  oracle::Random rng(10);
  for (int i = 0; i < 500; ++i) {
    const Vec3 v = rng.unit3() * rng.uniform(0.0, 3.0);
    CHECK((quat_log(quat_exp(v)) - v).norm() <= 1e-13);
    CHECK(std::abs(quat_exp(v).norm() - 1.0) <= 1e-15);
  }
  // Branch [0, 2 pi): angles past pi are representable.
  const Vec3 big = Vec3(0, 0, 1.5 * pi);
  CHECK((quat_log(quat_exp(big)) - big).norm() <= 1e-14);
  for (double s : {1e-9, 5e-5}) {
    const Vec3 v = rng.unit3() * s;
    CHECK((quat_log(quat_exp(v)) - v).norm() <= 1e-20);
  }
  CHECK_THROWS_AS(quat_log(Quaternion(-1, 0, 0, 0)), IllConditionedLogError);
}

TEST_CASE("quaternion exponential jacobian")
{
  oracle::Random rng(11);
  for (int i = 0; i < 50; ++i) {
    const Vec3 v = rng.unit3() * (i < 5 ? 1e-6 : rng.uniform(0.0, 3.0));
    const auto jac = quat_exp_jacobian(v);
    for (int j = 0; j < 3; ++j) {
      const double eps = 1e-6;
      Vec3 e           = Vec3::Zero();
      e(j)             = eps;
      const Quaternion fd = (quat_exp(v + e) - quat_exp(v - e)) / (2 * eps);
      CHECK(qdist(jac[static_cast<std::size_t>(j)], fd) <= 1e-9);
    }
  }
}

TEST_CASE("quaternion action")
{
  oracle::Random rng(12);
  const Vec3 v = rng.vec3();
  CHECK((quat_act(Quaternion::identity(), v) - v).norm() == 0.0);
  CHECK((quat_act(quat_exp(Vec3(0, 0, pi / 2)), Vec3::UnitX()) - Vec3::UnitY()).norm() <= 1e-15);
  for (int i = 0; i < 200; ++i) {
    const Quaternion q = random_quat(rng);
    const Quaternion u = q / q.norm();
    const Vec3 x       = rng.vec3();
    CHECK((quat_act(u, x) - quat_to_matrix(u) * x).norm() <= 1e-12);
    CHECK(std::abs(quat_act(u, x).norm() - x.norm()) <= 1e-14 * std::max(1.0, x.norm()));
  }
}

TEST_CASE("quaternion and matrix conversions")
{
  CHECK((quat_to_matrix(Quaternion::identity()) - Mat3::Identity()).norm() == 0.0);
  CHECK(qdist(matrix_to_quat(Mat3::Identity()), Quaternion::identity()) == 0.0);

  oracle::Random rng(13);
  for (int i = 0; i < 500; ++i) {
    const Mat3 r = rng.rotation(3.14);
    CHECK((quat_to_matrix(matrix_to_quat(r)) - r).norm() <= 1e-12);
    CHECK(matrix_to_quat(r).w >= 0.0);

    const Quaternion q = random_quat(rng);
    const Quaternion u = q / q.norm();
    const Quaternion back = matrix_to_quat(quat_to_matrix(u));
    CHECK(std::min(qdist(back, u), qdist(back, -u)) <= 1e-12);
  }
  // Ties at w = 0: first nonzero imaginary component positive.
  const Quaternion half_turn = matrix_to_quat(Mat3(Vec3(-1, 1, -1).asDiagonal()));
  CHECK(half_turn.w == 0.0);
  CHECK(half_turn.xyz(1) > 0.0);
  CHECK_THROWS_AS(matrix_to_quat(Eigen::Matrix2d::Identity()), DimensionError);

  for (int i = 0; i < 200; ++i) {
    const Vec3 v = rng.unit3() * rng.uniform(0.0, pi);
    CHECK((quat_to_matrix(quat_exp(v)) - exp_so3(v)).norm() <= 1e-12);
  }
}

TEST_CASE("lyapunov_solve")
{
  oracle::Random rng(14);
  const Mat3 c = rng.matrix<Mat3>(3);
  CHECK((lyapunov_solve<3>(Mat3::Identity(), c) - 0.5 * c).norm() <= 1e-15);

  Eigen::Matrix2d y, c2, x2;
  y << 1, 0, 0, 2;
  c2 << 0, 3, -3, 0;
  x2 << 0, 1, -1, 0;
  CHECK((lyapunov_solve<2>(y, c2) - x2).norm() <= 1e-15);

  for (int i = 0; i < 100; ++i) {
    const Mat3 spd = rng.spd3(0.1, 5.0);
    const Mat3 rhs = rng.matrix<Mat3>(3);
    const Mat3 x   = lyapunov_solve<3>(spd, rhs);
    CHECK((spd * x + x * spd - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    CHECK((x - oracle::lyapunov_eig<Mat3>(spd, rhs)).norm() <= 1e-10);
    const Mat3 xs = lyapunov_solve<3>(spd, Mat3(rhs - rhs.transpose()));
    CHECK((xs + xs.transpose()).norm() <= 1e-12);
    const Mat3 xy = lyapunov_solve<3>(spd, Mat3(rhs + rhs.transpose()));
    CHECK((xy - xy.transpose()).norm() <= 1e-12);
  }
  MatX big_y = rng.matrix<MatX>(6);
  big_y      = (big_y * big_y.transpose() + MatX::Identity(6, 6)).eval();
  const MatX big_c = rng.matrix<MatX>(6);
  const MatX big_x = lyapunov_solve<Eigen::Dynamic>(big_y, big_c);
  CHECK((big_y * big_x + big_x * big_y - big_c).norm() <= 1e-12 * big_c.norm() * big_y.norm());

  Mat3 indefinite = Mat3::Identity();
  indefinite(2, 2) = -1.0;
  CHECK_THROWS_AS(lyapunov_solve<3>(indefinite, c), PreconditionError);
}

TEST_CASE("maps are pure")
{
  oracle::Random rng(15);
  const Vec3 v = rng.vec3();
  const Mat3 r = exp_so3(v);
  CHECK((exp_so3(v) - r).norm() == 0.0);
  CHECK((log_so3(r) - log_so3(r)).norm() == 0.0);
  CHECK((dexp_so3(v, v) - dexp_so3(v, v)).norm() == 0.0);
  CHECK(qdist(quat_exp(v), quat_exp(v)) == 0.0);
  CHECK(qdist(matrix_to_quat(r), matrix_to_quat(r)) == 0.0);
}
