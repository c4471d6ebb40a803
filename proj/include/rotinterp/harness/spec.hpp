#pragma once

/**
 * @file
 * @brief JSON problem specifications.
 *
 * Minimum-acceleration spec (all keys optional except where a fixture is
 * absent, in which case `targets` is required):
 *
 *   { "fixture": "three-targets" | "slalom" | "cube" | "random",
 *     "horizon": 1.0, "n": 8, "knots": [...],
 *     "targets": [ {"time": 0, "direction": [1, 0, 0]}, ... ],
 *     "method": "quaternion" | "matrix", "quadrature_points": 4,
 *     "periodic": false, "seed": 0,
 *     "lm": { "lambda0": 0.01, "max_iterations": 500,
 *             "gradient_tolerance": 1e-10, "stall_tolerance": 1e-14 },
 *     "converge": { "n": [8, 16, 32, 64], "reference_n": 1024 } }
 *
 * Interpolation spec: either an analytic fixture
 *
 *   { "fixture": "constant" | "geodesic" | "wobble", "axis": [..],
 *     "horizon": 1.0, "n": 8, "mode": "hermite" | "lagrange", "degree": 1 }
 *
 * or explicit Hermite nodal data
 *
 *   { "knots": [...], "rotations": [[9 entries, row by row], ...]
 *     | "quaternions": [[w, x, y, z], ...], "omega": [[3], ...] }
 */

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../errors.hpp"
#include "../minaccel/lm.hpp"
#include "../minaccel/problem.hpp"
#include "../partition.hpp"
#include "../quaternion.hpp"
#include "fixtures.hpp"

namespace rotinterp::harness {

using json = nlohmann::json;

/// Values given on the command line; they take precedence over the file.
struct Overrides
{
  std::optional<std::string> method;
  std::optional<int> n;
  std::optional<std::uint64_t> seed;
};

struct MinAccelSpec
{
  minaccel::MinAccelProblem problem{Partition::uniform(0.0, 1.0, 1), {}};
  minaccel::LmOptions lm;
  std::optional<std::string> fixture;
  std::uint64_t seed{0};
  std::vector<int> converge_n;
  int reference_n{1024};
};

enum class InterpMode
{
  hermite,
  lagrange
};

struct InterpSpec
{
  minaccel::Method method{minaccel::Method::matrix};
  InterpMode mode{InterpMode::hermite};
  int degree{1};
  Partition partition{Partition::uniform(0.0, 1.0, 1)};
  std::optional<AnalyticCurve> curve;  ///< analytic fixture
  std::vector<Mat3> rotations;         ///< or explicit nodal data
  std::vector<Vec3> omega;             ///< angular velocity, vee(R^T dR)
  std::optional<Vec3> direction;       ///< v_0 for the sphere-trace columns
};

inline json load_json(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw SpecError("cannot open spec file '" + path + "'");
  }
  try {
    return json::parse(in);
  } catch (const json::exception & e) {
    throw SpecError("spec file '" + path + "': " + e.what());
  }
}

namespace detail {

template <typename T>
T get_or(const json & j, const char * key, T fallback)
{
  if (!j.contains(key)) {
    return fallback;
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception & e) {
    throw SpecError(std::string("spec key '") + key + "': " + e.what());
  }
}

inline Vec3 vec3_of(const json & j, const std::string & what)
{
  if (!j.is_array() || j.size() != 3) {
    throw SpecError(what + ": expected an array of 3 numbers");
  }
  try {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } catch (const json::exception & e) {
    throw SpecError(what + ": " + e.what());
  }
}

inline minaccel::Method method_of(const std::string & s)
{
  if (s == "matrix") {
    return minaccel::Method::matrix;
  }
  if (s == "quaternion") {
    return minaccel::Method::quaternion;
  }
  throw SpecError("method must be 'matrix' or 'quaternion', got '" + s + "'");
}

inline Partition partition_of(const json & j, double horizon, int n)
{
  if (j.contains("knots")) {
    try {
      return Partition(j.at("knots").get<std::vector<double>>());
    } catch (const json::exception & e) {
      throw SpecError(std::string("spec key 'knots': ") + e.what());
    } catch (const PreconditionError & e) {
      throw SpecError(e.what());
    }
  }
  if (n < 1 || !(horizon > 0.0)) {
    throw SpecError("spec: need n >= 1 and a positive horizon");
  }
  return Partition::uniform(0.0, horizon, n);
}

}  // namespace detail

inline MinAccelSpec parse_minaccel_spec(const json & j, const Overrides & o = {})
{
  if (!j.is_object()) {
    throw SpecError("spec: top level must be an object");
  }
  MinAccelSpec s;
  s.seed                    = o.seed.value_or(detail::get_or<std::uint64_t>(j, "seed", 0));
  const minaccel::Method m  = detail::method_of(o.method.value_or(detail::get_or<std::string>(j, "method", "quaternion")));
  const std::optional<int> n_json =
      j.contains("n") ? std::optional<int>(detail::get_or<int>(j, "n", 0)) : std::nullopt;
  const std::optional<int> n = o.n ? o.n : n_json;

  if (j.contains("fixture")) {
    const auto name = detail::get_or<std::string>(j, "fixture", "");
    if (!is_fixture(name, "minaccel")) {
      throw SpecError("unknown minaccel fixture '" + name + "'");
    }
    s.fixture = name;
    s.problem = minaccel_fixture(name, m, n, s.seed);
  } else {
    if (!j.contains("targets") || !j.at("targets").is_array()) {
      throw SpecError("spec: 'targets' array is required without a fixture");
    }
    std::vector<minaccel::Target> targets;
    for (std::size_t i = 0; i < j.at("targets").size(); ++i) {
      const json & t   = j.at("targets")[i];
      const auto where = "target " + std::to_string(i);
      if (!t.is_object() || !t.contains("time") || !t.contains("direction")) {
        throw SpecError(where + ": needs 'time' and 'direction'");
      }
      const Vec3 v = detail::vec3_of(t.at("direction"), where);
      if (!(v.norm() > 0.0)) {
        throw SpecError(where + ": direction is zero");
      }
      targets.push_back({detail::get_or<double>(t, "time", 0.0), v.normalized()});
    }
    for (std::size_t i = 1; i < targets.size(); ++i) {
      if (!(targets[i].time > targets[i - 1].time)) {
        throw SpecError("spec: target times must be sorted and distinct");
      }
    }
    const double horizon = detail::get_or<double>(j, "horizon", 1.0);
    s.problem.partition  = detail::partition_of(j, horizon, n.value_or(8));
    s.problem.targets    = std::move(targets);
    s.problem.method     = m;
    s.problem.periodic   = detail::get_or<bool>(j, "periodic", false);
  }
  s.problem.quadrature_points = detail::get_or<int>(j, "quadrature_points", 4);
  minaccel::target_knots(s.problem);

  if (j.contains("lm")) {
    const json & l          = j.at("lm");
    s.lm.lambda0            = detail::get_or<double>(l, "lambda0", s.lm.lambda0);
    s.lm.max_iterations     = detail::get_or<int>(l, "max_iterations", s.lm.max_iterations);
    s.lm.gradient_tolerance = detail::get_or<double>(l, "gradient_tolerance", s.lm.gradient_tolerance);
    s.lm.stall_tolerance    = detail::get_or<double>(l, "stall_tolerance", s.lm.stall_tolerance);
    if (!(s.lm.lambda0 > 0.0) || s.lm.max_iterations < 1) {
      throw SpecError("spec: lm.lambda0 must be positive and lm.max_iterations at least 1");
    }
  }

  s.converge_n = m == minaccel::Method::quaternion ? std::vector<int>{8, 16, 32, 64} : std::vector<int>{32, 64, 128, 256};
  if (j.contains("converge")) {
    const json & c = j.at("converge");
    s.converge_n   = detail::get_or<std::vector<int>>(c, "n", s.converge_n);
    s.reference_n  = detail::get_or<int>(c, "reference_n", s.reference_n);
  }
  return s;
}

inline InterpSpec parse_interp_spec(const json & j, const Overrides & o = {})
{
  if (!j.is_object()) {
    throw SpecError("spec: top level must be an object");
  }
  InterpSpec s;
  s.method = detail::method_of(o.method.value_or(detail::get_or<std::string>(j, "method", "matrix")));
  const auto mode = detail::get_or<std::string>(j, "mode", "hermite");
  if (mode == "hermite") {
    s.mode = InterpMode::hermite;
  } else if (mode == "lagrange") {
    s.mode = InterpMode::lagrange;
  } else {
    throw SpecError("mode must be 'hermite' or 'lagrange', got '" + mode + "'");
  }
  s.degree = detail::get_or<int>(j, "degree", 1);
  if (s.degree < 1 || s.degree > 3) {
    throw SpecError("degree must be 1, 2 or 3");
  }
  if (j.contains("direction")) {
    s.direction = detail::vec3_of(j.at("direction"), "direction").normalized();
  }
  const int n          = o.n.value_or(detail::get_or<int>(j, "n", 8));
  const double horizon = detail::get_or<double>(j, "horizon", 1.0);
  const auto seed      = o.seed.value_or(detail::get_or<std::uint64_t>(j, "seed", 0));

  if (j.contains("fixture")) {
    const auto name = detail::get_or<std::string>(j, "fixture", "");
    if (!is_fixture(name, "interp")) {
      throw SpecError("unknown interp fixture '" + name + "'");
    }
    std::optional<Vec3> axis;
    if (j.contains("axis")) {
      axis = detail::vec3_of(j.at("axis"), "axis");
    }
    s.partition = detail::partition_of(j, horizon, n);
    s.curve     = interp_fixture(name, axis, seed);
    return s;
  }

  if (s.mode != InterpMode::hermite) {
    throw SpecError("explicit nodal data is only supported for hermite mode");
  }
  s.partition      = detail::partition_of(j, horizon, n);
  const auto knots = static_cast<std::size_t>(s.partition.elements() + 1);
  if (j.contains("rotations")) {
    for (const json & r : j.at("rotations")) {
      const auto e = r.get<std::vector<double>>();
      if (e.size() != 9) {
        throw SpecError("rotations: each entry needs 9 numbers");
      }
      Mat3 m;
      m << e[0], e[1], e[2], e[3], e[4], e[5], e[6], e[7], e[8];
      if (orthogonality_residual(m) > 1e-10 || m.determinant() <= 0.0) {
        throw SpecError("rotations: entry is not a rotation matrix");
      }
      s.rotations.push_back(m);
    }
  } else if (j.contains("quaternions")) {
    for (const json & q : j.at("quaternions")) {
      const auto e = q.get<std::vector<double>>();
      if (e.size() != 4) {
        throw SpecError("quaternions: each entry needs 4 numbers");
      }
      const Quaternion u{e[0], Vec3(e[1], e[2], e[3])};
      if (!(u.norm() > 0.0)) {
        throw SpecError("quaternions: zero entry");
      }
      s.rotations.push_back(quat_to_matrix(u / u.norm()));
    }
  } else {
    throw SpecError("spec: need a fixture, 'rotations' or 'quaternions'");
  }
  if (j.contains("omega")) {
    for (const json & w : j.at("omega")) {
      s.omega.push_back(detail::vec3_of(w, "omega"));
    }
  } else {
    s.omega.assign(knots, Vec3::Zero());
  }
  if (s.rotations.size() != knots || s.omega.size() != knots) {
    throw SpecError("spec: need one rotation and one omega per knot (" + std::to_string(knots) + ")");
  }
  return s;
}

}  // namespace rotinterp::harness
