#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mrd/chain.hpp"
#include "mrd/conditional_probability.hpp"
#include "mrd/divergence.hpp"
#include "mrd/errors.hpp"
#include "mrd/solver.hpp"

namespace mrd::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_invalid_input = 2;
inline constexpr int exit_infeasible = 3;
inline constexpr int exit_max_iterations = 4;
inline constexpr int exit_verify_failed = 5;

/// Outcome of one command: the machine-readable document (possibly empty),
/// human diagnostics for stderr, and the process exit code.
struct CommandResult {
  int exit_code = exit_ok;
  std::string output;
  std::string diagnostics;
};

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void fail_field(const std::string& field,
                                    const std::string& why) {
  throw Error("field '" + field + "': " + why);
}

/// Strict mode: any key outside the allowed set is rejected, so typos in
/// problem files fail loudly instead of being ignored.
inline void check_keys(const json& j, const std::vector<std::string>& allowed,
                       const std::string& where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const auto& k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw Error("unknown field '" + item.key() + "' in " + where);
    }
  }
}

inline double parse_number(const json& j, const std::string& field) {
  if (!j.is_number()) fail_field(field, "expected a number");
  return j.get<double>();
}

inline std::vector<double> parse_number_array(const json& j,
                                              const std::string& field) {
  if (!j.is_array()) fail_field(field, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_number()) fail_field(field, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline std::vector<std::string> parse_string_array(const json& j,
                                                   const std::string& field) {
  if (!j.is_array()) fail_field(field, "expected an array of strings");
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_string()) fail_field(field, "expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

/// Runs fn, prefixing any library error with the field being decoded.
template <typename Fn>
auto with_field(const std::string& field, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    fail_field(field, e.what());
  }
}

/// Numbers are printed with 17 significant digits so that re-reading the
/// document reproduces the exact double.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void append_number_array(std::string& out,
                                const std::vector<double>& values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_number(values[i]);
  }
  out += ']';
}

inline std::string result_document(const SolveResult& r,
                                   const std::string& solver) {
  std::string out = "{\"maximizer_values\":";
  append_number_array(out, r.maximizer.values());
  out += ",\"divergence_nats\":";
  out += format_number(r.divergence);
  out += ",\"multipliers\":";
  append_number_array(out, r.multipliers);
  out += ",\"iterations\":";
  out += std::to_string(r.iterations);
  out += ",\"residuals\":{\"stationarity\":";
  out += format_number(r.stationarity_residual);
  out += ",\"constraints\":";
  out += format_number(r.constraint_residual);
  out += "},\"solver\":\"";
  out += solver;
  out += "\"}";
  return out;
}

enum class Mode { pinned, constrained, oracle };

struct ProblemFile {
  MrdpProblem problem;
  Mode mode = Mode::pinned;
  double oracle_resolution = 1e-3;
};

inline ProblemFile parse_problem_file(const std::string& text) {
  const json doc = json::parse(text);
  if (!doc.is_object()) throw Error("the problem file must be a JSON object");
  check_keys(doc,
             {"chain", "null_gf", "base_value", "target_range", "pins",
              "constraints", "mode", "oracle_resolution"},
             "the problem file");
  for (const char* required : {"chain", "null_gf", "base_value", "target_range"}) {
    if (!doc.contains(required)) {
      fail_field(required, "required field is missing");
    }
  }

  Chain chain = with_field("chain", [&] {
    return Chain(parse_string_array(doc.at("chain"), "chain"));
  });
  GradingFunction null_gf = with_field("null_gf", [&] {
    return GradingFunction(chain,
                           parse_number_array(doc.at("null_gf"), "null_gf"));
  });
  const double base_value = parse_number(doc.at("base_value"), "base_value");
  const double target_range =
      parse_number(doc.at("target_range"), "target_range");

  std::vector<Pin> pins;
  if (doc.contains("pins")) {
    const json& jp = doc.at("pins");
    if (!jp.is_array()) fail_field("pins", "expected an array of [position, value] pairs");
    for (const auto& e : jp) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
          !e[1].is_number()) {
        fail_field("pins", "expected an array of [position, value] pairs");
      }
      const auto pos = e[0].get<long long>();
      if (pos < 0) fail_field("pins", "positions must be nonnegative");
      pins.push_back(Pin{std::size_t(pos), e[1].get<double>()});
    }
  }

  std::vector<MomentConstraint> constraints;
  if (doc.contains("constraints")) {
    const json& jc = doc.at("constraints");
    if (!jc.is_array()) fail_field("constraints", "expected an array of objects");
    for (std::size_t i = 0; i < jc.size(); ++i) {
      const json& e = jc[i];
      const std::string where = "constraints[" + std::to_string(i) + "]";
      if (!e.is_object()) fail_field(where, "expected an object");
      check_keys(e, {"coefficients", "target"}, where);
      if (!e.contains("coefficients") || !e.contains("target")) {
        fail_field(where, "needs 'coefficients' and 'target'");
      }
      constraints.push_back(MomentConstraint{
          parse_number_array(e.at("coefficients"), where + ".coefficients"),
          parse_number(e.at("target"), where + ".target")});
    }
  }

  ProblemFile pf{MrdpProblem{std::move(null_gf), base_value, target_range,
                             std::move(pins), std::move(constraints)},
                 Mode::pinned, 1e-3};
  pf.mode = pf.problem.moment_constraints.empty() ? Mode::pinned
                                                  : Mode::constrained;
  if (doc.contains("mode")) {
    const json& jm = doc.at("mode");
    if (!jm.is_string()) fail_field("mode", "expected a string");
    const std::string mode = jm.get<std::string>();
    if (mode == "pinned") {
      if (!pf.problem.moment_constraints.empty()) {
        fail_field("mode", "'pinned' requires an empty constraints list");
      }
      pf.mode = Mode::pinned;
    } else if (mode == "constrained") {
      pf.mode = Mode::constrained;
    } else if (mode == "oracle") {
      pf.mode = Mode::oracle;
    } else {
      fail_field("mode", "expected \"pinned\", \"constrained\" or \"oracle\"");
    }
  }
  if (doc.contains("oracle_resolution")) {
    pf.oracle_resolution =
        parse_number(doc.at("oracle_resolution"), "oracle_resolution");
    if (!(pf.oracle_resolution > 0.0)) {
      fail_field("oracle_resolution", "must be > 0");
    }
  }
  return pf;
}

}  // namespace detail

/// `divergence <file>`: evaluate D(F || G) for two grading functions given in
/// a JSON object {"chain": [...], "F_values": [...], "G_values": [...]}.
inline CommandResult run_divergence(const std::string& json_text) {
  using detail::json;
  try {
    const json doc = json::parse(json_text);
    if (!doc.is_object()) throw Error("the input must be a JSON object");
    detail::check_keys(doc, {"chain", "F_values", "G_values"}, "the input");
    for (const char* required : {"chain", "F_values", "G_values"}) {
      if (!doc.contains(required)) {
        detail::fail_field(required, "required field is missing");
      }
    }
    Chain chain = detail::with_field("chain", [&] {
      return Chain(detail::parse_string_array(doc.at("chain"), "chain"));
    });
    GradingFunction F = detail::with_field("F_values", [&] {
      return GradingFunction(
          chain, detail::parse_number_array(doc.at("F_values"), "F_values"));
    });
    GradingFunction G = detail::with_field("G_values", [&] {
      return GradingFunction(
          chain, detail::parse_number_array(doc.at("G_values"), "G_values"));
    });
    const double d = relative_divergence(F, G);
    return {exit_ok,
            "{\"divergence_nats\":" + detail::format_number(d) + "}\n", ""};
  } catch (const json::exception& e) {
    return {exit_invalid_input, "", std::string("invalid JSON: ") + e.what() + "\n"};
  } catch (const Error& e) {
    return {exit_invalid_input, "", std::string(e.what()) + "\n"};
  }
}

/// `solve <file>`: run the solver selected by the file's constraints/mode and
/// emit the result document. Exit codes: 0 solved, 2 invalid input,
/// 3 infeasible, 4 iteration cap hit (document still emitted).
inline CommandResult run_solve(const std::string& json_text,
                               const SolverOptions& options = {}) {
  using detail::json;
  try {
    const detail::ProblemFile pf = detail::parse_problem_file(json_text);
    SolveResult result{GradingFunction(pf.problem.null_gf), 0, {}, 0, 0, 0};
    std::string solver;
    switch (pf.mode) {
      case detail::Mode::pinned:
        result = solve_pinned(pf.problem);
        solver = "pinned";
        break;
      case detail::Mode::constrained:
        try {
          result = solve_constrained(pf.problem, options);
        } catch (const MaxIterationsExceeded& e) {
          return {exit_max_iterations,
                  detail::result_document(e.partial, "constrained") + "\n",
                  std::string(e.what()) + "\n"};
        }
        solver = "constrained";
        break;
      case detail::Mode::oracle:
        result = grid_oracle(pf.problem, pf.oracle_resolution);
        solver = "oracle";
        break;
    }
    return {exit_ok, detail::result_document(result, solver) + "\n", ""};
  } catch (const Infeasible& e) {
    return {exit_infeasible, "", std::string(e.what()) + "\n"};
  } catch (const NoFeasibleGridPoint& e) {
    return {exit_infeasible, "", std::string(e.what()) + "\n"};
  } catch (const json::exception& e) {
    return {exit_invalid_input, "", std::string("invalid JSON: ") + e.what() + "\n"};
  } catch (const Error& e) {
    return {exit_invalid_input, "", std::string(e.what()) + "\n"};
  }
}

/// `cp --p1 <r> --p2 <r> [--verify <tol>]`: derive P(B|A). With a verify
/// tolerance the identity checks run and exit code 5 signals a failure.
inline CommandResult run_cp(double p1, double p2,
                            std::optional<double> verify_tolerance) {
  try {
    const CpInstance inst{p1, p2};
    const MrdpProblem problem = build_cp_problem(inst);
    const SolveResult solved = solve_pinned(problem);

    std::string out = "{\"conditional_probability\":";
    out += detail::format_number(solved.maximizer.value(1));
    out += ",";
    std::string body = detail::result_document(solved, "pinned");
    out += body.substr(1);  // splice the solve fields into the same object
    int code = exit_ok;
    if (verify_tolerance) {
      const CpVerification v = verify_cp_identity(inst, *verify_tolerance);
      out.pop_back();  // reopen the object for the verify block
      out += ",\"verify\":{\"pass\":";
      out += v.pass ? "true" : "false";
      out += ",\"tolerance\":";
      out += detail::format_number(*verify_tolerance);
      out += ",\"x_residual\":";
      out += detail::format_number(v.x_residual);
      out += ",\"q_prime_residual\":";
      out += detail::format_number(v.q_prime_residual);
      out += ",\"q_double_prime\":";
      out += detail::format_number(v.q_double_prime_at_x);
      out += ",\"divergence_residual\":";
      out += detail::format_number(v.divergence_residual);
      out += "}}";
      if (!v.pass) code = exit_verify_failed;
    }
    out += "\n";
    return {code, std::move(out),
            code == exit_verify_failed
                ? "verification residuals exceed the tolerance\n"
                : ""};
  } catch (const Error& e) {
    return {exit_invalid_input, "", std::string(e.what()) + "\n"};
  }
}

}  // namespace mrd::cli
