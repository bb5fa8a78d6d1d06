#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mrd/errors.hpp"

namespace mrd {

/// Strictness threshold for grading-function values: consecutive values must
/// differ by more than this, otherwise they are treated as ties and rejected.
inline constexpr double strict_increase_tol = 1e-12;

/// A finite totally ordered set of labeled elements. The order is the list
/// order; labels are opaque text and never compared lexicographically.
/// Immutable after construction.
class Chain {
public:
  /// Requires at least two pairwise-distinct labels.
  explicit Chain(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2) {
      throw TooShort("TooShort: a chain needs at least 2 elements, got " +
                     std::to_string(labels_.size()));
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      for (std::size_t j = i + 1; j < labels_.size(); ++j) {
        if (labels_[i] == labels_[j]) {
          throw DuplicateLabel("DuplicateLabel: \"" + labels_[i] +
                               "\" appears at positions " + std::to_string(i) +
                               " and " + std::to_string(j));
        }
      }
    }
  }

  std::size_t size() const { return labels_.size(); }
  std::size_t increment_count() const { return labels_.size() - 1; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t k) const { return labels_.at(k); }

  friend bool operator==(const Chain& a, const Chain& b) {
    return a.labels_ == b.labels_;
  }

private:
  std::vector<std::string> labels_;
};

/// Strictly positive first differences of a grading function.
class IncrementVector {
public:
  explicit IncrementVector(std::vector<double> deltas)
      : deltas_(std::move(deltas)) {
    for (std::size_t k = 0; k < deltas_.size(); ++k) {
      if (!(deltas_[k] > 0.0)) {
        std::ostringstream os;
        os << "NonPositiveDelta: delta at index " << k << " is " << deltas_[k];
        throw NonPositiveDelta(os.str());
      }
    }
  }

  std::size_t size() const { return deltas_.size(); }
  double operator[](std::size_t k) const { return deltas_[k]; }
  const std::vector<double>& deltas() const { return deltas_; }

  friend bool operator==(const IncrementVector& a, const IncrementVector& b) {
    return a.deltas_ == b.deltas_;
  }

private:
  std::vector<double> deltas_;
};

/// A real-valued, order-comonotonic function on a chain: values strictly
/// increase along the chain, each step exceeding strict_increase_tol.
///
/// Both representations (values and increments) are stored, so converting a
/// function built from increments back to increments is lossless. Instances
/// are immutable; all operations on them are pure functions.
class GradingFunction {
public:
  GradingFunction(Chain chain, std::vector<double> values)
      : chain_(std::move(chain)), values_(std::move(values)) {
    if (values_.size() != chain_.size()) {
      throw LengthMismatch("LengthMismatch: chain has " +
                           std::to_string(chain_.size()) + " elements but " +
                           std::to_string(values_.size()) + " values given");
    }
    deltas_.reserve(values_.size() - 1);
    for (std::size_t k = 1; k < values_.size(); ++k) {
      check_strict_step(k, values_[k - 1], values_[k]);
      deltas_.push_back(values_[k] - values_[k - 1]);
    }
  }

  /// Builds the function from its first element's value and its increments.
  /// The given deltas are kept verbatim as the increment representation.
  GradingFunction(Chain chain, double base, IncrementVector deltas)
      : chain_(std::move(chain)), deltas_(deltas.deltas()) {
    if (deltas_.size() != chain_.size() - 1) {
      throw LengthMismatch("LengthMismatch: chain has " +
                           std::to_string(chain_.size() - 1) +
                           " increments but " + std::to_string(deltas_.size()) +
                           " deltas given");
    }
    values_.reserve(chain_.size());
    values_.push_back(base);
    for (std::size_t k = 0; k < deltas_.size(); ++k) {
      double next = values_.back() + deltas_[k];
      // Guards against value collapse when a delta is below the resolution of
      // the accumulated value's magnitude.
      check_strict_step(k + 1, values_.back(), next);
      values_.push_back(next);
    }
  }

  const Chain& chain() const { return chain_; }
  const std::vector<double>& values() const { return values_; }
  double value(std::size_t k) const { return values_.at(k); }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& deltas() const { return deltas_; }

private:
  static void check_strict_step(std::size_t k, double prev, double next) {
    if (!(next - prev > strict_increase_tol)) {
      std::ostringstream os;
      os << "NotComonotonic at position " << k << ": value " << next
         << " does not exceed " << prev << " by more than "
         << strict_increase_tol;
      throw NotComonotonic(os.str());
    }
  }

  Chain chain_;
  std::vector<double> values_;
  std::vector<double> deltas_;
};

/// The indexing function on a chain: values 0, 1, ..., n. Every increment is 1.
inline GradingFunction indexing_gf(const Chain& chain) {
  std::vector<double> values(chain.size());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = double(k);
  return GradingFunction(chain, std::move(values));
}

/// First differences of a grading function. Lossless for functions built from
/// increments.
inline IncrementVector increments(const GradingFunction& gf) {
  return IncrementVector(gf.deltas());
}

/// Inverse of increments(): cumulative sums starting at base.
inline GradingFunction from_increments(const Chain& chain, double base,
                                       const IncrementVector& deltas) {
  return GradingFunction(chain, base, deltas);
}

/// Last value minus first value; strictly positive for any valid function.
inline double total_range(const GradingFunction& gf) {
  return gf.values().back() - gf.values().front();
}

}  // namespace mrd
