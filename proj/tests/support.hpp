#pragma once

// Shared test helpers: deterministic generators and independent numerical
// oracles (direct summation, finite differences, process capture). Nothing
// here calls into the solver paths it is used to check.

#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace testsupport {

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::vector<double> random_positive(std::mt19937_64& rng, std::size_t n,
                                           double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng, lo, hi);
  return v;
}

/// Termwise evaluation of -sum f_k ln(f_k/g_k), accumulated in the opposite
/// association from the library's evaluator.
inline double divergence_by_hand(const std::vector<double>& f,
                                 const std::vector<double>& g) {
  double total = 0.0;
  for (std::size_t k = f.size(); k-- > 0;) {
    total += -(f[k] * std::log(f[k] / g[k]));
  }
  return total;
}

template <typename F>
double central_difference(F&& fn, double x, double h) {
  return (fn(x + h) - fn(x - h)) / (2.0 * h);
}

template <typename F>
double second_central_difference(F&& fn, double x, double h) {
  return (fn(x + h) - 2.0 * fn(x) + fn(x - h)) / (h * h);
}

struct ProcessResult {
  int exit_code = -1;
  std::string output;
};

/// Runs a shell command, capturing stdout and the exit status.
inline ProcessResult run_process(const std::string& command) {
  ProcessResult result;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) return result;
  std::array<char, 4096> buffer{};
  std::size_t nread = 0;
  while ((nread = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.output.append(buffer.data(), nread);
  }
  const int status = ::pclose(pipe);
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  return result;
}

}  // namespace testsupport
