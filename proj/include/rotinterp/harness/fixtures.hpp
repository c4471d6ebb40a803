#pragma once

/// @file
/// @brief Built-in problems and analytic curves for the command-line tool.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "../errors.hpp"
#include "../liegroup.hpp"
#include "../minaccel/problem.hpp"
#include "../types.hpp"

namespace rotinterp::harness {

struct FixtureInfo
{
  std::string name;
  std::string kind;  ///< "minaccel" or "interp"
  std::string description;
};

inline std::vector<FixtureInfo> fixture_list()
{
  return {
      {"three-targets", "minaccel", "v0 = e1 at t = 0, e2 at t = 1/2, (1,1,2)/sqrt(6) at t = 1; N = 8"},
      {"slalom", "minaccel", "13 directions normalize(1/2 + 4/5 cos(pi j/2), 1/2, 1 - j/6) at t = j/12; N = 12"},
      {"cube", "minaccel", "closed tour of the cube vertices (+-1,+-1,+-1)/sqrt(3) at t = j/8; periodic; N = 8"},
      {"random", "minaccel", "three seeded random directions at t = 0, 1/2, 1; N = 8"},
      {"constant", "interp", "R(t) = I"},
      {"geodesic", "interp", "R(t) = exp(t hat(v)), v = (0.3, -0.5, 0.8) unless given"},
      {"wobble", "interp", "R(t) = exp(hat(a sin(2 pi t))) exp(t hat(v)), a and v seeded"},
  };
}

inline bool is_fixture(const std::string & name, const std::string & kind)
{
  for (const FixtureInfo & f : fixture_list()) {
    if (f.name == name && f.kind == kind) {
      return true;
    }
  }
  return false;
}

// --- minimum-acceleration problems -------------------------------------------

inline std::vector<minaccel::Target> three_targets()
{
  return {{0.0, Vec3::UnitX()}, {0.5, Vec3::UnitY()}, {1.0, Vec3(1.0, 1.0, 2.0) / std::sqrt(6.0)}};
}

inline std::vector<minaccel::Target> slalom_targets()
{
  std::vector<minaccel::Target> t;
  for (int j = 0; j <= 12; ++j) {
    const Vec3 v(0.5 + 0.8 * std::cos(std::numbers::pi * j / 2.0), 0.5, 1.0 - j / 6.0);
    t.push_back({j / 12.0, v.normalized()});
  }
  return t;
}

inline std::vector<minaccel::Target> cube_targets()
{
  const double s = 1.0 / std::sqrt(3.0);
  const std::vector<Vec3> corners{{1, 1, 1}, {-1, 1, 1}, {-1, -1, 1}, {1, -1, 1}, {1, -1, -1},
                                  {-1, -1, -1}, {-1, 1, -1}, {1, 1, -1}, {1, 1, 1}};
  std::vector<minaccel::Target> t;
  for (std::size_t j = 0; j < corners.size(); ++j) {
    t.push_back({static_cast<double>(j) / 8.0, s * corners[j]});
  }
  return t;
}

inline std::vector<minaccel::Target> random_targets(std::uint64_t seed)
{
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto unit = [&] {
    const Vec3 v(normal(gen), normal(gen), normal(gen));
    return Vec3(v.normalized());
  };
  std::vector<minaccel::Target> t{{0.0, unit()}};
  for (double time : {0.5, 1.0}) {
    Vec3 v = unit();
    // Keep consecutive directions well away from antipodal.
    while (v.dot(t.back().direction) < -0.5) {
      v = unit();
    }
    t.push_back({time, v});
  }
  return t;
}

/// Default element count of a fixture.
inline int fixture_elements(const std::string & name)
{
  if (name == "slalom") {
    return 12;
  }
  return 8;
}

inline minaccel::MinAccelProblem minaccel_fixture(const std::string & name,
                                                  minaccel::Method method,
                                                  std::optional<int> n = std::nullopt,
                                                  std::uint64_t seed   = 0)
{
  const int elements = n.value_or(fixture_elements(name));
  if (elements < 1) {
    throw SpecError("fixture: element count must be positive");
  }
  std::vector<minaccel::Target> targets;
  bool periodic = false;
  if (name == "three-targets") {
    targets = three_targets();
  } else if (name == "slalom") {
    targets = slalom_targets();
  } else if (name == "cube") {
    targets  = cube_targets();
    periodic = true;
  } else if (name == "random") {
    targets = random_targets(seed);
  } else {
    throw SpecError("unknown minaccel fixture '" + name + "'");
  }
  minaccel::MinAccelProblem p = minaccel::MinAccelProblem::uniform(1.0, elements, std::move(targets), method, periodic);
  minaccel::target_knots(p);  // reject N that misses a target time
  return p;
}

// --- analytic curves ------------------------------------------------------------

/// R(t) and dR/dt.
struct AnalyticCurve
{
  std::function<Mat3(double)> r;
  std::function<Mat3(double)> r_dot;
};

inline AnalyticCurve geodesic_curve(const Vec3 & v)
{
  return {[v](double t) { return exp_so3(t * v); }, [v](double t) { return Mat3(exp_so3(t * v) * hat(v)); }};
}

inline AnalyticCurve wobble_curve(std::uint64_t seed)
{
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Vec3 a(u(gen), u(gen), u(gen));
  const Vec3 v(u(gen), u(gen), u(gen));
  const double w = 2.0 * std::numbers::pi;
  return {[=](double t) { return Mat3(exp_so3(std::sin(w * t) * a) * exp_so3(t * v)); },
          [=](double t) {
            const Vec3 b  = std::sin(w * t) * a;
            const Vec3 db = w * std::cos(w * t) * a;
            const Mat3 e  = exp_so3(t * v);
            return Mat3(dexp_so3(b, db) * e + exp_so3(b) * e * hat(v));
          }};
}

inline AnalyticCurve interp_fixture(const std::string & name, std::optional<Vec3> axis, std::uint64_t seed)
{
  if (name == "constant") {
    return {[](double) { return Mat3(Mat3::Identity()); }, [](double) { return Mat3(Mat3::Zero()); }};
  }
  if (name == "geodesic") {
    return geodesic_curve(axis.value_or(Vec3(0.3, -0.5, 0.8)));
  }
  if (name == "wobble") {
    return wobble_curve(seed);
  }
  throw SpecError("unknown interp fixture '" + name + "'");
}

}  // namespace rotinterp::harness
