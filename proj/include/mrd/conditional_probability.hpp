#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "mrd/chain.hpp"
#include "mrd/divergence.hpp"
#include "mrd/errors.hpp"
#include "mrd/solver.hpp"

namespace mrd {

/// The two known probabilities of the three-event chain ∅ ≺ A∩B ≺ A:
/// p1 = P(A∩B), p2 = P(A), with 0 < p1 < p2 <= 1 strictly.
struct CpInstance {
  double p1;
  double p2;
};

namespace detail {

inline void check_instance(const CpInstance& inst) {
  const auto fail = [&](const char* why) {
    std::ostringstream os;
    os << "InvalidInstance: (p1, p2) = (" << inst.p1 << ", " << inst.p2
       << "): " << why;
    throw InvalidInstance(os.str());
  };
  if (!std::isfinite(inst.p1) || !std::isfinite(inst.p2)) {
    fail("values must be finite");
  }
  if (!(inst.p1 > 0.0)) fail("p1 must be > 0");
  if (!(inst.p2 <= 1.0)) fail("p2 must be <= 1");
  if (!(inst.p1 < inst.p2)) fail("p1 must be strictly less than p2");
  // Below the strictness threshold the three-event chain collapses to two.
  if (!(inst.p1 > strict_increase_tol) ||
      !(inst.p2 - inst.p1 > strict_increase_tol)) {
    fail("gaps at or below the strictness threshold collapse the chain");
  }
}

inline void check_unit_interval(double x) {
  if (!(x > 0.0) || !(x < 1.0)) {
    std::ostringstream os;
    os << "OutOfDomain: x must lie in the open interval (0, 1), got " << x;
    throw OutOfDomain(os.str());
  }
}

}  // namespace detail

/// The maximum-relative-divergence problem whose maximizer's middle value is
/// P(B|A): chain ∅ ≺ A∩B ≺ A, null function values {0, p1, p2}, F pinned to
/// 0 and 1 at the ends, no moment constraints.
inline MrdpProblem build_cp_problem(const CpInstance& inst) {
  detail::check_instance(inst);
  Chain chain({"∅", "A∩B", "A"});
  GradingFunction null_gf(chain, {0.0, inst.p1, inst.p2});
  return MrdpProblem{std::move(null_gf), 0.0, 1.0,
                     {Pin{0, 0.0}, Pin{2, 1.0}}, {}};
}

/// Divergence of F = {0, x, 1} from G = {0, p1, p2} as a function of the
/// middle value:  q(x) = -x ln(x/p1) - (1-x) ln((1-x)/(p2-p1)).
inline double q(double x, const CpInstance& inst) {
  detail::check_instance(inst);
  detail::check_unit_interval(x);
  return -x * std::log(x / inst.p1) -
         (1.0 - x) * std::log((1.0 - x) / (inst.p2 - inst.p1));
}

/// q'(x) = ln(1-x) - ln x + ln p1 - ln(p2-p1); its only root is x = p1/p2.
inline double q_prime(double x, const CpInstance& inst) {
  detail::check_instance(inst);
  detail::check_unit_interval(x);
  return std::log(1.0 - x) - std::log(x) + std::log(inst.p1) -
         std::log(inst.p2 - inst.p1);
}

/// q''(x) = -1/((1-x) x), negative everywhere on (0, 1).
inline double q_double_prime(double x) {
  detail::check_unit_interval(x);
  return -1.0 / ((1.0 - x) * x);
}

/// P(B|A) obtained by solving the divergence-maximization problem: the middle
/// value of the maximizing grading function, which equals p1/p2.
inline double conditional_probability(const CpInstance& inst) {
  const MrdpProblem problem = build_cp_problem(inst);
  return solve_pinned(problem).maximizer.value(1);
}

/// Residual report of verify_cp_identity. `pass` requires every residual at
/// or below the tolerance and a strictly negative second derivative.
struct CpVerification {
  bool pass = false;
  double x_star = 0.0;                // solver's middle value
  double closed_form = 0.0;           // p1 / p2
  double x_residual = 0.0;            // |x_star - p1/p2|
  double q_prime_residual = 0.0;      // |q'(x_star)|
  double q_double_prime_at_x = 0.0;   // must be < 0
  double divergence_residual = 0.0;   // |q(x_star) - D(maximizer || G)|
};

/// Cross-checks the whole construction on one instance: the solver against
/// the closed form, the derivative's root, concavity at the optimum, and the
/// analytic objective against the divergence evaluator. Failures are reported
/// in the result, never thrown.
inline CpVerification verify_cp_identity(const CpInstance& inst,
                                         double tolerance) {
  detail::check_instance(inst);
  if (!(tolerance > 0.0)) {
    throw Error("verify_cp_identity: tolerance must be > 0");
  }
  const MrdpProblem problem = build_cp_problem(inst);
  const SolveResult solved = solve_pinned(problem);

  CpVerification v;
  v.x_star = solved.maximizer.value(1);
  v.closed_form = inst.p1 / inst.p2;
  v.x_residual = std::abs(v.x_star - v.closed_form);
  v.q_prime_residual = std::abs(q_prime(v.x_star, inst));
  v.q_double_prime_at_x = q_double_prime(v.x_star);
  v.divergence_residual = std::abs(q(v.x_star, inst) - solved.divergence);
  v.pass = v.x_residual <= tolerance && v.q_prime_residual <= tolerance &&
           v.q_double_prime_at_x < 0.0 && v.divergence_residual <= tolerance;
  return v;
}

}  // namespace mrd
