#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mrd/cli.hpp"

namespace {

bool read_file(const std::string& path, std::string& text, std::string& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err = "cannot read file '" + path + "'\n";
    return false;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  text = ss.str();
  return true;
}

int emit(const mrd::cli::CommandResult& r, const std::string& output_path) {
  if (!r.diagnostics.empty()) std::cerr << r.diagnostics;
  if (r.output.empty()) return r.exit_code;
  if (output_path.empty()) {
    std::cout << r.output;
  } else {
    std::ofstream out(output_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write file '" << output_path << "'\n";
      return mrd::cli::exit_invalid_input;
    }
    out << r.output;
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative divergence of grading functions on finite chains: "
               "evaluation, maximization, and the conditional-probability "
               "derivation"};
  app.require_subcommand(1);

  std::string div_file, div_output;
  CLI::App* div = app.add_subcommand(
      "divergence", "Evaluate D(F || G) for two grading functions in a JSON file");
  div->add_option("file", div_file, "JSON file with chain, F_values, G_values")
      ->required();
  div->add_option("--output", div_output, "write the result document here");

  std::string solve_file, solve_output;
  CLI::App* solve = app.add_subcommand(
      "solve", "Maximize D(F || G) for the problem described in a JSON file");
  solve->add_option("file", solve_file, "JSON problem file")->required();
  solve->add_option("--output", solve_output, "write the result document here");

  double p1 = 0.0, p2 = 0.0, verify_tol = 0.0;
  std::string cp_output;
  CLI::App* cp = app.add_subcommand(
      "cp", "Derive the conditional probability P(B|A) from p1 = P(A∩B) "
            "and p2 = P(A)");
  cp->add_option("--p1", p1, "P(A∩B), in (0, 1)")->required();
  cp->add_option("--p2", p2, "P(A), in (0, 1]")->required();
  CLI::Option* verify =
      cp->add_option("--verify", verify_tol, "run the identity checks at this tolerance");
  cp->add_option("--output", cp_output, "write the result document here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mrd::cli::exit_invalid_input;
  }

  std::string text, err;
  if (div->parsed()) {
    if (!read_file(div_file, text, err)) {
      std::cerr << err;
      return mrd::cli::exit_invalid_input;
    }
    return emit(mrd::cli::run_divergence(text), div_output);
  }
  if (solve->parsed()) {
    if (!read_file(solve_file, text, err)) {
      std::cerr << err;
      return mrd::cli::exit_invalid_input;
    }
    return emit(mrd::cli::run_solve(text), solve_output);
  }
  std::optional<double> tol;
  if (verify->count() > 0) tol = verify_tol;
  return emit(mrd::cli::run_cp(p1, p2, tol), cp_output);
}
