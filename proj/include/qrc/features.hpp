#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "qrc/linalg.hpp"

namespace qrc {

/// Sliding-window polynomial feature configuration.
///
/// The linear block concatenates `taps` states spaced `stride` samples apart,
/// newest first. Each entry of `orders` adds every distinct monomial of that
/// degree over the linear block.
struct FeatureConfig {
  int input_dim = 3;
  int taps = 2;
  int stride = 1;
  std::vector<int> orders{2};
  bool include_constant = true;
  double constant_value = 1.0;

  void validate() const;
  // Samples that must be buffered before the first feature vector exists.
  int warmup() const { return (taps - 1) * stride + 1; }
};

struct FeatureLayout {
  std::size_t n_const = 0;
  std::size_t n_linear = 0;
  std::vector<std::size_t> n_nonlinear;  // one entry per order

  std::size_t total() const;
};

struct FeatureVector {
  RealVector values;
  FeatureLayout layout;
};

// Number of degree-`order` monomials over `n` variables, C(n + order - 1, order).
std::size_t monomial_count(std::size_t n, int order);

FeatureLayout feature_layout(const FeatureConfig& cfg);

// `taps` holds x_k, x_{k-q}, ..., x_{k-(u-1)q}, newest first.
RealVector linear_features(std::span<const RealVector> taps, const FeatureConfig& cfg);

// Monomials in lexicographic order of non-decreasing index tuples
// (i1 <= i2 <= ... <= is), each multiset exactly once.
RealVector nonlinear_features(std::span<const double> linear, int order);

// [C] ++ linear ++ nonlinear(order_1) ++ nonlinear(order_2) ++ ...
FeatureVector assemble_features(std::span<const RealVector> taps, const FeatureConfig& cfg);

// Keeps the most recent (u-1)q+1 input samples and hands out the tapped window.
class FeatureBuffer {
 public:
  explicit FeatureBuffer(FeatureConfig cfg);

  void push(const RealVector& x);
  bool ready() const;
  std::size_t size() const { return history_.size(); }
  // Throws if fewer than warmup() samples have been pushed.
  std::vector<RealVector> taps() const;
  FeatureVector features() const;
  const FeatureConfig& config() const { return cfg_; }

 private:
  FeatureConfig cfg_;
  std::deque<RealVector> history_;  // front = newest
};

}  // namespace qrc
