// rotinterp: interpolate rotation curves, solve minimum-acceleration
// problems and run convergence studies.  See README.md for the formats.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rotinterp/harness/commands.hpp"
#include "rotinterp/harness/fixtures.hpp"
#include "rotinterp/harness/spec.hpp"

namespace h = rotinterp::harness;

namespace {

struct Flags
{
  std::string spec;
  std::optional<std::string> method;
  std::optional<int> n;
  int samples_per_element{8};
  std::string out;
  std::string trace;
  std::optional<std::uint64_t> seed;
  std::string fixture;
  bool self_test{false};
};

h::Overrides overrides(const Flags & f) { return {f.method, f.n, f.seed}; }

/// The spec file, or `{"fixture": name}` when only --fixture is given.
h::json spec_json(const Flags & f)
{
  if (!f.spec.empty()) {
    h::json j = h::load_json(f.spec);
    if (!f.fixture.empty()) {
      j["fixture"] = f.fixture;
    }
    return j;
  }
  if (f.fixture.empty()) {
    throw rotinterp::SpecError("either --spec or --fixture is required");
  }
  return h::json{{"fixture", f.fixture}};
}

template <typename Write>
void emit(const std::string & path, Write && write)
{
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) {
    throw rotinterp::SpecError("cannot open output file '" + path + "'");
  }
  write(out);
}

void add_common(CLI::App * cmd, Flags & f)
{
  cmd->add_option("--spec", f.spec, "JSON problem specification");
  cmd->add_option("--fixture", f.fixture, "built-in fixture (see `fixtures list`)");
  cmd->add_option("--method", f.method, "matrix | quaternion")->check(CLI::IsMember({"matrix", "quaternion"}));
  cmd->add_option("--n", f.n, "number of elements")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "seed for random fixtures");
  cmd->add_option("--out", f.out, "output CSV (default stdout)");
}

int run_interp(const Flags & f)
{
  const h::InterpSpec spec = h::parse_interp_spec(spec_json(f), overrides(f));
  const auto samples       = h::run_interp(spec, f.samples_per_element);
  emit(f.out, [&](std::ostream & o) { h::write_samples(o, spec.method, samples, spec.direction); });
  return h::exit_ok;
}

int run_minaccel(const Flags & f)
{
  const h::MinAccelSpec spec = h::parse_minaccel_spec(spec_json(f), overrides(f));
  try {
    const auto sol = h::run_minaccel(spec);
    if (!f.trace.empty()) {
      emit(f.trace, [&](std::ostream & o) { o << h::trace_json(sol).dump(2) << '\n'; });
    }
    const auto samples = h::sample_solution(sol.curve, f.samples_per_element);
    emit(f.out, [&](std::ostream & o) { h::write_samples(o, spec.problem.method, samples, spec.problem.v0()); });
    std::cerr << "converged: " << rotinterp::minaccel::stop_name(sol.lm.reason) << ", " << sol.lm.iterations
              << " iterations, objective " << h::num(sol.lm.objective) << ", constraint residual "
              << h::num(h::constraint_residual(sol)) << '\n';
  } catch (const rotinterp::minaccel::LmNonConvergence & e) {
    if (!f.trace.empty()) {
      h::json j = {{"stop", "iteration_limit"},
                   {"objective", e.best().objective},
                   {"gradient_norm", e.best().gradient_norm},
                   {"iterations", e.best().iterations}};
      emit(f.trace, [&](std::ostream & o) { o << j.dump(2) << '\n'; });
    }
    throw;
  }
  return h::exit_ok;
}

int run_converge(const Flags & f)
{
  const h::MinAccelSpec spec = h::parse_minaccel_spec(spec_json(f), overrides(f));
  h::run_converge(spec, f.self_test, [&](const h::ConvergenceTable & t) {
    emit(f.out, [&](std::ostream & o) { h::write_table(o, t); });
  });
  return h::exit_ok;
}

int list_fixtures()
{
  for (const h::FixtureInfo & fx : h::fixture_list()) {
    std::cout << fx.name << '\t' << fx.kind << '\t' << fx.description << '\n';
  }
  return h::exit_ok;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Rotation interpolation and minimum-acceleration curves"};
  app.require_subcommand(1);
  Flags f;

  CLI::App * interp = app.add_subcommand("interp", "sample an interpolated rotation curve");
  add_common(interp, f);
  interp->add_option("--samples-per-element", f.samples_per_element)->check(CLI::PositiveNumber);

  CLI::App * minaccel = app.add_subcommand("minaccel", "solve a minimum-acceleration problem");
  add_common(minaccel, f);
  minaccel->add_option("--samples-per-element", f.samples_per_element)->check(CLI::PositiveNumber);
  minaccel->add_option("--trace", f.trace, "solver trace (JSON)");

  CLI::App * converge = app.add_subcommand("converge", "errors against a refined reference solution");
  add_common(converge, f);
  converge->add_flag("--self-test", f.self_test, "append the reference compared with itself");

  CLI::App * fixtures = app.add_subcommand("fixtures", "built-in fixtures");
  fixtures->require_subcommand(1);
  CLI::App * list = fixtures->add_subcommand("list", "list fixtures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : h::exit_spec;
  }

  try {
    if (list->parsed()) {
      return list_fixtures();
    }
    if (interp->parsed()) {
      return run_interp(f);
    }
    if (minaccel->parsed()) {
      return run_minaccel(f);
    }
    return run_converge(f);
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return h::exit_code_for(e);
  }
}
