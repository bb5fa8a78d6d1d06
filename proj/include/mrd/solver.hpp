#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mrd/chain.hpp"
#include "mrd/divergence.hpp"
#include "mrd/errors.hpp"

namespace mrd {

/// Fixes a grading function's value at a chain position.
struct Pin {
  std::size_t position;
  double value;
};

/// Linear equality on the increment vector: sum_k coefficients[k] * f_k = target.
struct MomentConstraint {
  std::vector<double> coefficients;
  double target;
};

/// A maximum-relative-divergence problem: find the grading function F that
/// maximizes D(F || null_gf) over all grading functions with F(first) =
/// base_value, F(last) = base_value + target_range, the given pins, and the
/// given moment constraints.
///
/// Pins at the first and last positions are implied by base_value and
/// target_range; listing them explicitly is allowed as long as the values
/// agree. Interior pins are optional.
struct MrdpProblem {
  GradingFunction null_gf;
  double base_value = 0.0;
  double target_range = 1.0;
  std::vector<Pin> pins;
  std::vector<MomentConstraint> moment_constraints;
};

/// Solver output. multipliers holds one entry per moment constraint followed
/// by one entry per pin segment (the multiplier of that segment's sum
/// constraint); with endpoint pins only, the last entry is the multiplier of
/// the range constraint sum f_k = target_range. The closed-form path reports
/// no multipliers. Residuals are recomputable from maximizer and multipliers.
struct SolveResult {
  GradingFunction maximizer;
  double divergence = 0.0;
  std::vector<double> multipliers;
  std::size_t iterations = 0;
  double stationarity_residual = 0.0;
  double constraint_residual = 0.0;
};

struct SolverOptions {
  double constraint_tol = 1e-10;      // absolute, on every equality constraint
  double stationarity_tol = 1e-8;
  std::size_t max_iterations = 100;   // Newton iterations on the dual
  double backtrack_factor = 0.5;
  std::size_t max_backtracks = 40;
};

/// Thrown when the dual Newton iteration hits the iteration cap. The best
/// iterate found so far is returned in `partial` with honest residuals.
class MaxIterationsExceeded : public Error {
public:
  MaxIterationsExceeded(const std::string& msg, SolveResult partial_result)
      : Error(msg), partial(std::move(partial_result)) {}
  SolveResult partial;
};

namespace detail {

struct Segment {
  std::size_t first = 0;     // chain position of the left pin
  std::size_t last = 0;      // chain position of the right pin
  double lo_value = 0.0;
  double hi_value = 0.0;
  double span = 0.0;         // hi_value - lo_value, in F's values
  double null_span = 0.0;    // null_gf(last) - null_gf(first)
};

struct NormalizedProblem {
  std::vector<Pin> pins;                 // sorted, endpoints present
  std::vector<Segment> segments;         // one per consecutive pin pair
  std::vector<std::size_t> segment_of;   // increment index -> segment index
  std::size_t increment_count = 0;
};

/// Validates the problem and produces the full pin list and segment table.
inline NormalizedProblem normalize(const MrdpProblem& p) {
  const std::size_t last = p.null_gf.size() - 1;
  if (!std::isfinite(p.base_value) || !std::isfinite(p.target_range)) {
    throw InvalidPins("InvalidPins: base_value and target_range must be finite");
  }
  if (!(p.target_range > 0.0)) {
    std::ostringstream os;
    os << "InvalidPins: target_range must be > 0, got " << p.target_range;
    throw InvalidPins(os.str());
  }
  const double top_value = p.base_value + p.target_range;

  std::vector<Pin> pins = p.pins;
  std::sort(pins.begin(), pins.end(),
            [](const Pin& a, const Pin& b) { return a.position < b.position; });
  for (std::size_t i = 0; i < pins.size(); ++i) {
    if (!std::isfinite(pins[i].value)) {
      throw InvalidPins("InvalidPins: pin value at position " +
                        std::to_string(pins[i].position) + " is not finite");
    }
    if (pins[i].position > last) {
      throw InvalidPins("InvalidPins: pin position " +
                        std::to_string(pins[i].position) +
                        " is beyond the last chain position " +
                        std::to_string(last));
    }
    if (i > 0 && pins[i].position == pins[i - 1].position) {
      throw InvalidPins("InvalidPins: duplicate pin at position " +
                        std::to_string(pins[i].position));
    }
  }

  // Explicit endpoint pins must agree with base_value / target_range; the
  // implied values are canonical.
  if (!pins.empty() && pins.front().position == 0) {
    if (std::abs(pins.front().value - p.base_value) > strict_increase_tol) {
      std::ostringstream os;
      os << "InvalidPins: pin at position 0 has value " << pins.front().value
         << " but base_value is " << p.base_value;
      throw InvalidPins(os.str());
    }
    pins.front().value = p.base_value;
  } else {
    pins.insert(pins.begin(), Pin{0, p.base_value});
  }
  if (pins.back().position == last) {
    if (std::abs(pins.back().value - top_value) > strict_increase_tol) {
      std::ostringstream os;
      os << "InvalidPins: pin at position " << last << " has value "
         << pins.back().value << " but base_value + target_range is "
         << top_value;
      throw InvalidPins(os.str());
    }
    pins.back().value = top_value;
  } else {
    pins.push_back(Pin{last, top_value});
  }

  for (std::size_t i = 1; i < pins.size(); ++i) {
    if (!(pins[i].value - pins[i - 1].value > strict_increase_tol)) {
      std::ostringstream os;
      os << "InvalidPins: pinned values must strictly increase; value "
         << pins[i].value << " at position " << pins[i].position
         << " does not exceed " << pins[i - 1].value << " at position "
         << pins[i - 1].position << " by more than " << strict_increase_tol;
      throw InvalidPins(os.str());
    }
  }

  for (std::size_t j = 0; j < p.moment_constraints.size(); ++j) {
    const auto& mc = p.moment_constraints[j];
    if (mc.coefficients.size() != last) {
      throw LengthMismatch("LengthMismatch: constraint " + std::to_string(j) +
                           " has " + std::to_string(mc.coefficients.size()) +
                           " coefficients but the chain has " +
                           std::to_string(last) + " increments");
    }
    if (!std::isfinite(mc.target)) {
      throw Error("constraint " + std::to_string(j) + ": target is not finite");
    }
    for (double c : mc.coefficients) {
      if (!std::isfinite(c)) {
        throw Error("constraint " + std::to_string(j) +
                    ": coefficient is not finite");
      }
    }
  }

  NormalizedProblem np;
  np.pins = pins;
  np.increment_count = last;
  np.segment_of.assign(last, 0);
  const auto& gv = p.null_gf.values();
  for (std::size_t i = 1; i < pins.size(); ++i) {
    Segment s;
    s.first = pins[i - 1].position;
    s.last = pins[i].position;
    s.lo_value = pins[i - 1].value;
    s.hi_value = pins[i].value;
    s.span = s.hi_value - s.lo_value;
    s.null_span = gv[s.last] - gv[s.first];
    np.segments.push_back(s);
    for (std::size_t k = s.first; k < s.last; ++k) {
      np.segment_of[k] = np.segments.size() - 1;
    }
  }
  return np;
}

/// Builds F's values from increments, pin values taken exactly.
inline std::vector<double> assemble_values(const NormalizedProblem& np,
                                           const std::vector<double>& f) {
  std::vector<double> values(np.increment_count + 1, 0.0);
  for (const Segment& s : np.segments) {
    values[s.first] = s.lo_value;
    for (std::size_t k = s.first; k + 1 < s.last; ++k) {
      values[k + 1] = values[k] + f[k];
    }
    values[s.last] = s.hi_value;
  }
  return values;
}

inline double pin_residual(const NormalizedProblem& np,
                           const GradingFunction& F) {
  double r = 0.0;
  for (const Pin& pin : np.pins) {
    r = std::max(r, std::abs(F.value(pin.position) - pin.value));
  }
  return r;
}

/// Gaussian elimination with partial pivoting; A is row-major n x n and is
/// consumed. Returns false when a pivot collapses.
inline bool solve_dense(std::vector<double> A, std::vector<double> b,
                        std::size_t n, std::vector<double>& x) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
    }
    if (!(std::abs(A[piv * n + col]) > 0.0) ||
        !std::isfinite(A[piv * n + col])) {
      return false;
    }
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(A[piv * n + c], A[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    const double inv = 1.0 / A[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = A[r * n + col] * inv;
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) A[r * n + c] -= factor * A[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double acc = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) acc -= A[ri * n + c] * x[c];
    x[ri] = acc / A[ri * n + ri];
    if (!std::isfinite(x[ri])) return false;
  }
  return true;
}

/// Stationarity residual of the KKT system: for each increment,
/// ln(f_k/g_k) + 1 + sum_j lambda_j a_jk + mu_seg(k), sup norm.
inline double stationarity_residual(const NormalizedProblem& np,
                                    const std::vector<double>& f,
                                    const std::vector<double>& g,
                                    const std::vector<MomentConstraint>& mcs,
                                    const std::vector<double>& multipliers) {
  double worst = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    double r = std::log(f[k] / g[k]) + 1.0;
    for (std::size_t j = 0; j < mcs.size(); ++j) {
      r += multipliers[j] * mcs[j].coefficients[k];
    }
    r += multipliers[mcs.size() + np.segment_of[k]];
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

inline double moment_residual(const std::vector<MomentConstraint>& mcs,
                              const std::vector<double>& f) {
  double worst = 0.0;
  for (const auto& mc : mcs) {
    double acc = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) acc += mc.coefficients[k] * f[k];
    worst = std::max(worst, std::abs(acc - mc.target));
  }
  return worst;
}

}  // namespace detail

/// Closed-form maximizer for problems without moment constraints: within each
/// pin segment the optimal increments are proportional to the null function's,
/// scaled so the segment meets its pins,
///
///   f_k = g_k * span_F(segment) / span_G(segment).
///
/// Strict concavity of the divergence makes this the unique maximizer.
inline SolveResult solve_pinned(const MrdpProblem& problem) {
  if (!problem.moment_constraints.empty()) {
    throw Error(
        "solve_pinned: problem has moment constraints; use solve_constrained");
  }
  const detail::NormalizedProblem np = detail::normalize(problem);
  const std::vector<double>& g = problem.null_gf.deltas();

  std::vector<double> f(np.increment_count, 0.0);
  for (std::size_t si = 0; si < np.segments.size(); ++si) {
    const detail::Segment& s = np.segments[si];
    const double ratio = s.span / s.null_span;
    for (std::size_t k = s.first; k < s.last; ++k) {
      f[k] = g[k] * ratio;
      if (!(f[k] > strict_increase_tol)) {
        std::ostringstream os;
        os << "Infeasible: optimal increment at index " << k << " is " << f[k]
           << ", below the strictness threshold " << strict_increase_tol;
        throw Infeasible(os.str());
      }
    }
  }

  GradingFunction maximizer(problem.null_gf.chain(),
                            detail::assemble_values(np, f));
  SolveResult result{maximizer, relative_divergence(maximizer, problem.null_gf),
                     {}, 0, 0.0, 0.0};

  // Residuals from the returned object. The segment multipliers are implied
  // by the spans (mu_s = -1 - ln(span_F/span_G)) and not reported.
  const std::vector<double>& fhat = maximizer.deltas();
  for (std::size_t k = 0; k < fhat.size(); ++k) {
    const detail::Segment& s = np.segments[np.segment_of[k]];
    const double r = std::log(fhat[k] / g[k]) - std::log(s.span / s.null_span);
    result.stationarity_residual =
        std::max(result.stationarity_residual, std::abs(r));
  }
  result.constraint_residual = detail::pin_residual(np, maximizer);
  return result;
}

/// General path: maximize D(F || G) subject to pins and moment constraints by
/// Newton's method on the dual. Stationarity of the Lagrangian gives the
/// exponential-family form
///
///   f_k = g_k * exp(-1 - sum_j lambda_j a_jk - mu_seg(k)),
///
/// and the dual  phi(nu) = sum_k f_k(nu) + rhs . nu  is smooth and convex with
/// gradient rhs - C f(nu), i.e. the negated constraint residuals. Newton with
/// backtracking starts from lambda = 0 and the mu that makes each segment's
/// proportional scaling exact. An unbounded dual descent certifies that no
/// strictly positive increment vector satisfies the constraints.
inline SolveResult solve_constrained(const MrdpProblem& problem,
                                     const SolverOptions& opts = {}) {
  const detail::NormalizedProblem np = detail::normalize(problem);
  const std::vector<double>& g = problem.null_gf.deltas();
  const std::size_t n = np.increment_count;
  const std::size_t m = problem.moment_constraints.size();
  const std::size_t s = np.segments.size();
  const std::size_t rows = m + s;

  // Necessary per-constraint reachability: the target must lie strictly
  // inside the attainable interval (the boundary needs a zero increment).
  for (std::size_t j = 0; j < m; ++j) {
    const auto& a = problem.moment_constraints[j].coefficients;
    double lo = 0.0, hi = 0.0;
    for (const detail::Segment& seg : np.segments) {
      double amin = a[seg.first], amax = a[seg.first];
      for (std::size_t k = seg.first; k < seg.last; ++k) {
        amin = std::min(amin, a[k]);
        amax = std::max(amax, a[k]);
      }
      lo += seg.span * amin;
      hi += seg.span * amax;
    }
    const double b = problem.moment_constraints[j].target;
    const bool degenerate = hi - lo <= opts.constraint_tol;
    if ((degenerate && std::abs(b - lo) > opts.constraint_tol) ||
        (!degenerate && !(b > lo && b < hi))) {
      std::ostringstream os;
      os << "Infeasible: constraint " << j << " target " << b
         << " is outside the attainable interval (" << lo << ", " << hi << ")";
      throw Infeasible(os.str());
    }
  }

  // Constraint matrix: moment rows first, then one indicator row per segment.
  std::vector<std::vector<double>> C(rows, std::vector<double>(n, 0.0));
  std::vector<double> rhs(rows, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    C[j] = problem.moment_constraints[j].coefficients;
    rhs[j] = problem.moment_constraints[j].target;
  }
  for (std::size_t si = 0; si < s; ++si) {
    const detail::Segment& seg = np.segments[si];
    for (std::size_t k = seg.first; k < seg.last; ++k) C[m + si][k] = 1.0;
    rhs[m + si] = seg.span;
  }

  std::vector<double> nu(rows, 0.0);
  for (std::size_t si = 0; si < s; ++si) {
    nu[m + si] = -1.0 - std::log(np.segments[si].span / np.segments[si].null_span);
  }

  // Pinning the segment endpoints exactly shifts each segment's last
  // increment by the leftover sum defect, so the dual must converge tighter
  // than the reported tolerance by the coefficient scale.
  double coef_scale = 1.0;
  for (std::size_t j = 0; j < m; ++j) {
    for (double a : C[j]) coef_scale = std::max(coef_scale, std::abs(a));
  }
  const double gradient_tol = opts.constraint_tol / (1.0 + coef_scale);

  const auto increments_at = [&](const std::vector<double>& v,
                                 std::vector<double>& f) {
    for (std::size_t k = 0; k < n; ++k) {
      double e = -1.0;
      for (std::size_t r = 0; r < rows; ++r) e -= v[r] * C[r][k];
      f[k] = g[k] * std::exp(e);
    }
  };
  const auto dual_value = [&](const std::vector<double>& v,
                              const std::vector<double>& f) {
    double phi = 0.0;
    for (std::size_t k = 0; k < n; ++k) phi += f[k];
    for (std::size_t r = 0; r < rows; ++r) phi += rhs[r] * v[r];
    return phi;
  };

  std::vector<double> f(n, 0.0), f_trial(n, 0.0);
  std::vector<double> grad(rows, 0.0), step(rows, 0.0), nu_trial(rows, 0.0);
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t subtol_streak = 0;

  increments_at(nu, f);
  while (true) {
    for (std::size_t r = 0; r < rows; ++r) {
      double cf = 0.0;
      for (std::size_t k = 0; k < n; ++k) cf += C[r][k] * f[k];
      grad[r] = rhs[r] - cf;
    }
    double gnorm = 0.0;
    for (double v : grad) gnorm = std::max(gnorm, std::abs(v));
    if (gnorm <= gradient_tol) {
      converged = true;
      break;
    }
    // Inside the documented tolerance a well-conditioned problem reaches the
    // tighter goal within a step or two; lingering here means the residual
    // sits at this problem's floating-point floor.
    subtol_streak = gnorm <= opts.constraint_tol ? subtol_streak + 1 : 0;
    if (subtol_streak >= 5) {
      converged = true;
      break;
    }
    if (iterations >= opts.max_iterations) break;
    ++iterations;

    // H = C diag(f) C^T, with a ridge retry when rows are dependent.
    std::vector<double> H(rows * rows, 0.0);
    for (std::size_t r1 = 0; r1 < rows; ++r1) {
      for (std::size_t r2 = r1; r2 < rows; ++r2) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += C[r1][k] * f[k] * C[r2][k];
        H[r1 * rows + r2] = acc;
        H[r2 * rows + r1] = acc;
      }
    }
    std::vector<double> neg_grad(rows);
    for (std::size_t r = 0; r < rows; ++r) neg_grad[r] = -grad[r];
    if (!detail::solve_dense(H, neg_grad, rows, step)) {
      double diag_max = 0.0;
      for (std::size_t r = 0; r < rows; ++r) {
        diag_max = std::max(diag_max, H[r * rows + r]);
      }
      const double ridge = std::max(diag_max, 1.0) * 1e-12;
      for (std::size_t r = 0; r < rows; ++r) H[r * rows + r] += ridge;
      if (!detail::solve_dense(H, neg_grad, rows, step)) {
        throw Infeasible(
            "Infeasible: dual Newton system is singular beyond repair");
      }
    }

    double directional = 0.0;
    for (std::size_t r = 0; r < rows; ++r) directional += grad[r] * step[r];
    const double phi0 = dual_value(nu, f);
    // Once the Newton decrement falls below the floating-point resolution of
    // phi the Armijo test reads rounding noise; the iterate is deep in the
    // quadratic basin, so take the full step unguarded.
    if (directional < 0.0 &&
        -directional <= 64.0 * std::numeric_limits<double>::epsilon() *
                            std::max(1.0, std::abs(phi0))) {
      for (std::size_t r = 0; r < rows; ++r) nu[r] += step[r];
      increments_at(nu, f);
      continue;
    }
    double t = 1.0;
    bool accepted = false;
    for (std::size_t bt = 0; bt <= opts.max_backtracks; ++bt) {
      for (std::size_t r = 0; r < rows; ++r) nu_trial[r] = nu[r] + t * step[r];
      increments_at(nu_trial, f_trial);
      const double phi_trial = dual_value(nu_trial, f_trial);
      if (std::isfinite(phi_trial) &&
          phi_trial <= phi0 + 1e-4 * t * directional) {
        accepted = true;
        break;
      }
      t *= opts.backtrack_factor;
    }
    if (!accepted) {
      if (gnorm <= opts.constraint_tol) {
        converged = true;
        break;
      }
      throw Infeasible(
          "Infeasible: dual line search stalled; no strictly positive "
          "increment vector satisfies the constraints");
    }
    nu.swap(nu_trial);
    f.swap(f_trial);

    double nu_norm = 0.0;
    for (double v : nu) nu_norm = std::max(nu_norm, std::abs(v));
    if (nu_norm > 1e8 || dual_value(nu, f) < -1e250) {
      throw Infeasible(
          "Infeasible: dual iterates diverge; the constraints admit no "
          "strictly positive increment vector");
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    if (!(f[k] > strict_increase_tol)) {
      std::ostringstream os;
      os << "Infeasible: computed increment at index " << k << " is " << f[k]
         << ", below the strictness threshold " << strict_increase_tol;
      throw Infeasible(os.str());
    }
  }

  GradingFunction maximizer(problem.null_gf.chain(),
                            detail::assemble_values(np, f));
  SolveResult result{maximizer, relative_divergence(maximizer, problem.null_gf),
                     nu, iterations, 0.0, 0.0};
  const std::vector<double>& fhat = maximizer.deltas();
  result.stationarity_residual = detail::stationarity_residual(
      np, fhat, g, problem.moment_constraints, nu);
  result.constraint_residual =
      std::max(detail::moment_residual(problem.moment_constraints, fhat),
               detail::pin_residual(np, maximizer));

  if (!converged) {
    std::ostringstream os;
    os << "MaxIterationsExceeded: constraint residual "
       << result.constraint_residual << " after " << iterations
       << " Newton iterations";
    throw MaxIterationsExceeded(os.str(), std::move(result));
  }
  return result;
}

namespace detail {

/// Result of eliminating the equality system (segment sums and moment rows)
/// by reduced row echelon form: each pivot coordinate is an affine function
/// of the freely enumerated coordinates,
///
///   f[dependent[i]] = offset[i] + sum_j gain[i][j] * f[enumerated[j]].
///
/// Consistent redundant rows are dropped; an inconsistent system has no
/// feasible point at all.
struct EliminatedSystem {
  std::vector<std::size_t> dependent;
  std::vector<double> offset;
  std::vector<std::vector<double>> gain;
  std::vector<std::size_t> enumerated;
};

inline EliminatedSystem eliminate_equalities(
    const NormalizedProblem& np, const std::vector<MomentConstraint>& mcs) {
  const std::size_t n = np.increment_count;
  const std::size_t q = np.segments.size() + mcs.size();
  std::vector<std::vector<double>> M(q, std::vector<double>(n + 1, 0.0));
  double coef_scale = 1.0, rhs_scale = 1.0;
  for (std::size_t si = 0; si < np.segments.size(); ++si) {
    const Segment& seg = np.segments[si];
    for (std::size_t k = seg.first; k < seg.last; ++k) M[si][k] = 1.0;
    M[si][n] = seg.span;
    rhs_scale = std::max(rhs_scale, std::abs(seg.span));
  }
  for (std::size_t j = 0; j < mcs.size(); ++j) {
    auto& row = M[np.segments.size() + j];
    for (std::size_t k = 0; k < n; ++k) {
      row[k] = mcs[j].coefficients[k];
      coef_scale = std::max(coef_scale, std::abs(row[k]));
    }
    row[n] = mcs[j].target;
    rhs_scale = std::max(rhs_scale, std::abs(mcs[j].target));
  }
  const double pivot_tol = 1e-11 * coef_scale;

  std::vector<char> is_pivot_col(n, 0);
  std::vector<std::size_t> pivot_cols, pivot_rows;
  for (std::size_t r = 0; r < q; ++r) {
    // Reduce against the rows already in echelon form (their pivots are
    // normalized to 1 and cleared from each other).
    for (std::size_t i = 0; i < pivot_rows.size(); ++i) {
      const double factor = M[r][pivot_cols[i]];
      if (factor == 0.0) continue;
      const auto& prow = M[pivot_rows[i]];
      for (std::size_t c = 0; c <= n; ++c) M[r][c] -= factor * prow[c];
    }
    std::size_t pc = n;
    double best = pivot_tol;
    for (std::size_t c = 0; c < n; ++c) {
      if (!is_pivot_col[c] && std::abs(M[r][c]) > best) {
        best = std::abs(M[r][c]);
        pc = c;
      }
    }
    if (pc == n) {
      if (std::abs(M[r][n]) > 1e-8 * rhs_scale) {
        throw NoFeasibleGridPoint(
            "NoFeasibleGridPoint: the equality constraints are mutually "
            "inconsistent");
      }
      continue;  // redundant row
    }
    const double inv = 1.0 / M[r][pc];
    for (std::size_t c = 0; c <= n; ++c) M[r][c] *= inv;
    for (std::size_t i = 0; i < pivot_rows.size(); ++i) {
      auto& prow = M[pivot_rows[i]];
      const double factor = prow[pc];
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c <= n; ++c) prow[c] -= factor * M[r][c];
    }
    is_pivot_col[pc] = 1;
    pivot_cols.push_back(pc);
    pivot_rows.push_back(r);
  }

  EliminatedSystem sys;
  for (std::size_t c = 0; c < n; ++c) {
    if (!is_pivot_col[c]) sys.enumerated.push_back(c);
  }
  for (std::size_t i = 0; i < pivot_rows.size(); ++i) {
    sys.dependent.push_back(pivot_cols[i]);
    sys.offset.push_back(M[pivot_rows[i]][n]);
    std::vector<double> gains(sys.enumerated.size(), 0.0);
    for (std::size_t j = 0; j < sys.enumerated.size(); ++j) {
      gains[j] = -M[pivot_rows[i]][sys.enumerated[j]];
    }
    sys.gain.push_back(std::move(gains));
  }
  return sys;
}

/// Least-squares multiplier fit for a grid point: minimizes the stationarity
/// residual in the L2 sense so the oracle can report comparable diagnostics.
inline std::vector<double> fit_multipliers(
    const NormalizedProblem& np, const std::vector<double>& f,
    const std::vector<double>& g, const std::vector<MomentConstraint>& mcs) {
  const std::size_t n = f.size();
  const std::size_t m = mcs.size();
  const std::size_t rows = m + np.segments.size();
  std::vector<std::vector<double>> C(rows, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < m; ++j) C[j] = mcs[j].coefficients;
  for (std::size_t k = 0; k < n; ++k) C[m + np.segment_of[k]][k] = 1.0;

  std::vector<double> r(n);
  for (std::size_t k = 0; k < n; ++k) r[k] = std::log(f[k] / g[k]) + 1.0;

  // Normal equations (C C^T) nu = -C r, with a ridge for dependent rows.
  std::vector<double> G(rows * rows, 0.0), rhs(rows, 0.0), nu;
  for (std::size_t r1 = 0; r1 < rows; ++r1) {
    for (std::size_t r2 = 0; r2 < rows; ++r2) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += C[r1][k] * C[r2][k];
      G[r1 * rows + r2] = acc;
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += C[r1][k] * r[k];
    rhs[r1] = -acc;
  }
  for (std::size_t d = 0; d < rows; ++d) G[d * rows + d] += 1e-12;
  if (!solve_dense(G, rhs, rows, nu)) nu.assign(rows, 0.0);
  return nu;
}

}  // namespace detail

/// Independent verification oracle: sweeps a grid over the feasible set and
/// returns the best point. The equality system (pins and moment constraints)
/// is eliminated first, so one coordinate per constraint responds affinely
/// and every scanned point satisfies the constraints to machine precision;
/// the remaining coordinates sweep their ranges at the given resolution.
/// Supports at most 4 increments that are not forced by pins; runtime grows
/// like (span/resolution)^(free coordinates), so fine resolutions are only
/// practical for the smallest problems.
inline SolveResult grid_oracle(const MrdpProblem& problem, double resolution) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw Error("grid_oracle: resolution must be a positive real");
  }
  const detail::NormalizedProblem np = detail::normalize(problem);
  const std::vector<double>& g = problem.null_gf.deltas();
  const std::size_t n = np.increment_count;

  std::size_t free = 0;
  for (const detail::Segment& s : np.segments) {
    const std::size_t cnt = s.last - s.first;
    if (cnt >= 2) free += cnt;
  }
  if (free > 4) {
    throw TooLarge("TooLarge: " + std::to_string(free) +
                   " free increments; the grid oracle supports at most 4");
  }

  std::vector<std::size_t> units(np.segments.size(), 1);
  std::vector<double> step(np.segments.size(), 0.0);
  for (std::size_t si = 0; si < np.segments.size(); ++si) {
    const detail::Segment& s = np.segments[si];
    const std::size_t cnt = s.last - s.first;
    if (cnt > 1 && !(s.span / resolution < 1e9)) {
      throw Error("grid_oracle: resolution too fine for a segment of span " +
                  std::to_string(s.span));
    }
    units[si] = cnt == 1 ? 1
                         : std::max<std::size_t>(
                               cnt, std::size_t(std::llround(s.span / resolution)));
    step[si] = s.span / double(units[si]);
  }

  const detail::EliminatedSystem sys =
      detail::eliminate_equalities(np, problem.moment_constraints);

  // Per enumerated coordinate: its segment and how many enumerated
  // coordinates of the same segment come after it (the unit budget each of
  // them needs).
  const std::size_t en = sys.enumerated.size();
  std::vector<std::size_t> seg_of(en, 0), tail_same_segment(en, 0);
  for (std::size_t j = 0; j < en; ++j) {
    seg_of[j] = np.segment_of[sys.enumerated[j]];
    for (std::size_t t = j + 1; t < en; ++t) {
      if (np.segment_of[sys.enumerated[t]] == seg_of[j]) ++tail_same_segment[j];
    }
  }

  std::vector<double> f(n, 0.0);
  std::vector<std::size_t> used(np.segments.size(), 0);
  double best_divergence = -std::numeric_limits<double>::infinity();
  std::vector<double> best_f;
  std::size_t evaluated = 0;

  const auto leaf = [&] {
    for (std::size_t i = 0; i < sys.dependent.size(); ++i) {
      double v = sys.offset[i];
      for (std::size_t j = 0; j < en; ++j) {
        v += sys.gain[i][j] * f[sys.enumerated[j]];
      }
      if (!(v > strict_increase_tol)) return;
      f[sys.dependent[i]] = v;
    }
    ++evaluated;
    double d = 0.0;
    for (std::size_t k = 0; k < n; ++k) d -= std::log(f[k] / g[k]) * f[k];
    if (d > best_divergence) {
      best_divergence = d;
      best_f = f;
    }
  };

  const auto sweep = [&](auto&& self, std::size_t j) -> void {
    if (j == en) {
      leaf();
      return;
    }
    const std::size_t si = seg_of[j];
    const std::size_t k = sys.enumerated[j];
    // Leave one unit for the segment's dependent mass and one per remaining
    // enumerated coordinate; exact positivity is checked at the leaf.
    const std::size_t budget = units[si] - 1 - used[si] - tail_same_segment[j];
    for (std::size_t c = 1; c <= budget; ++c) {
      f[k] = double(c) * step[si];
      used[si] += c;
      self(self, j + 1);
      used[si] -= c;
    }
    f[k] = 0.0;
  };
  sweep(sweep, 0);

  if (best_f.empty()) {
    throw NoFeasibleGridPoint(
        "NoFeasibleGridPoint: the grid contains no feasible point");
  }

  GradingFunction maximizer(problem.null_gf.chain(),
                            detail::assemble_values(np, best_f));
  SolveResult result{maximizer, relative_divergence(maximizer, problem.null_gf),
                     {}, evaluated, 0.0, 0.0};
  const std::vector<double>& fhat = maximizer.deltas();
  result.multipliers =
      detail::fit_multipliers(np, fhat, g, problem.moment_constraints);
  result.stationarity_residual = detail::stationarity_residual(
      np, fhat, g, problem.moment_constraints, result.multipliers);
  result.constraint_residual =
      std::max(detail::moment_residual(problem.moment_constraints, fhat),
               detail::pin_residual(np, maximizer));
  return result;
}

}  // namespace mrd
