#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "mrd/chain.hpp"
#include "mrd/errors.hpp"

namespace mrd {

/// Relative divergence of increment vector f from increment vector g,
///
///   D(f || g) = -sum_k ln(f_k / g_k) * f_k      (nats)
///
/// Summed left to right over k. Strict positivity of both inputs is
/// guaranteed by IncrementVector, so every term is finite.
inline double relative_divergence(const IncrementVector& f,
                                  const IncrementVector& g) {
  if (f.size() != g.size()) {
    throw LengthMismatch("LengthMismatch: increment vectors of sizes " +
                         std::to_string(f.size()) + " and " +
                         std::to_string(g.size()));
  }
  double d = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    d -= std::log(f[k] / g[k]) * f[k];
  }
  return d;
}

/// Relative divergence of grading function F from G on a shared chain.
/// The order of arguments matters: D(F||G) != D(G||F) in general.
inline double relative_divergence(const GradingFunction& F,
                                  const GradingFunction& G) {
  if (!(F.chain() == G.chain())) {
    throw ChainMismatch(
        "ChainMismatch: F and G are defined on different chains");
  }
  return relative_divergence(increments(F), increments(G));
}

/// Shannon entropy -sum p_k ln p_k of a probability vector (nats).
/// Entries must be strictly positive and sum to 1 within 1e-9.
///
/// Equals relative_divergence(F, I) where F is the cumulative distribution
/// of p on a chain of p.size()+1 elements and I is the indexing function.
inline double shannon_entropy(const std::vector<double>& p) {
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!(p[k] > 0.0)) {
      std::ostringstream os;
      os << "NotADistribution: entry at index " << k << " is " << p[k];
      throw NotADistribution(os.str());
    }
    sum += p[k];
  }
  if (p.empty() || std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "NotADistribution: entries sum to " << sum << ", expected 1";
    throw NotADistribution(os.str());
  }
  double h = 0.0;
  for (double pk : p) h -= pk * std::log(pk);
  return h;
}

/// Gradient of D(f || g) with respect to f: component k is -ln(f_k/g_k) - 1.
inline std::vector<double> divergence_gradient(const IncrementVector& f,
                                               const IncrementVector& g) {
  if (f.size() != g.size()) {
    throw LengthMismatch("LengthMismatch: increment vectors of sizes " +
                         std::to_string(f.size()) + " and " +
                         std::to_string(g.size()));
  }
  std::vector<double> grad(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    grad[k] = -std::log(f[k] / g[k]) - 1.0;
  }
  return grad;
}

}  // namespace mrd
