#include "qrc/features.hpp"

#include <numeric>
#include <string>

#include "qrc/error.hpp"

namespace qrc {

void FeatureConfig::validate() const {
  if (input_dim < 1) throw ConfigError("features: input dimension must be >= 1");
  if (taps < 1) throw ConfigError("features: taps (u) must be >= 1");
  if (stride < 1) throw ConfigError("features: stride (q) must be >= 1");
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (orders[i] < 2) throw ConfigError("features: polynomial orders must be >= 2");
    if (i > 0 && orders[i] <= orders[i - 1]) {
      throw ConfigError("features: orders must be strictly increasing");
    }
  }
}

std::size_t FeatureLayout::total() const {
  return std::accumulate(n_nonlinear.begin(), n_nonlinear.end(), n_const + n_linear);
}

std::size_t monomial_count(std::size_t n, int order) {
  // C(n + s - 1, s) built incrementally; every partial product is an integer.
  std::size_t result = 1;
  for (int i = 1; i <= order; ++i) {
    result = result * (n + static_cast<std::size_t>(i) - 1) / static_cast<std::size_t>(i);
  }
  return result;
}

FeatureLayout feature_layout(const FeatureConfig& cfg) {
  cfg.validate();
  FeatureLayout layout;
  layout.n_const = cfg.include_constant ? 1 : 0;
  layout.n_linear = static_cast<std::size_t>(cfg.input_dim) * cfg.taps;
  for (int s : cfg.orders) layout.n_nonlinear.push_back(monomial_count(layout.n_linear, s));
  return layout;
}

RealVector linear_features(std::span<const RealVector> taps, const FeatureConfig& cfg) {
  if (taps.size() < static_cast<std::size_t>(cfg.taps)) {
    throw ConfigError("linear_features: buffer underfilled (" + std::to_string(taps.size()) +
                      " of " + std::to_string(cfg.taps) + " taps)");
  }
  const Eigen::Index d = cfg.input_dim;
  RealVector out(d * cfg.taps);
  for (int j = 0; j < cfg.taps; ++j) {
    if (taps[j].size() != d) throw ConfigError("linear_features: tap has wrong dimension");
    out.segment(j * d, d) = taps[j];
  }
  return out;
}

RealVector nonlinear_features(std::span<const double> linear, int order) {
  if (order < 2) throw ConfigError("nonlinear_features: order must be >= 2");
  const std::size_t n = linear.size();
  RealVector out(static_cast<Eigen::Index>(monomial_count(n, order)));
  if (n == 0) return out;

  // Odometer over non-decreasing index tuples; prefix[j] caches the product of
  // the first j factors so each monomial costs one multiply.
  std::vector<std::size_t> idx(order, 0);
  std::vector<double> prefix(order + 1, 1.0);
  for (int j = 0; j < order; ++j) prefix[j + 1] = prefix[j] * linear[0];

  Eigen::Index pos = 0;
  while (true) {
    out[pos++] = prefix[order];
    int j = order - 1;
    while (j >= 0 && idx[j] == n - 1) --j;
    if (j < 0) break;
    ++idx[j];
    for (int t = j + 1; t < order; ++t) idx[t] = idx[j];
    for (int t = j; t < order; ++t) prefix[t + 1] = prefix[t] * linear[idx[t]];
  }
  return out;
}

FeatureVector assemble_features(std::span<const RealVector> taps, const FeatureConfig& cfg) {
  FeatureVector fv;
  fv.layout = feature_layout(cfg);
  const RealVector lin = linear_features(taps, cfg);

  fv.values.resize(static_cast<Eigen::Index>(fv.layout.total()));
  Eigen::Index pos = 0;
  if (cfg.include_constant) fv.values[pos++] = cfg.constant_value;
  fv.values.segment(pos, lin.size()) = lin;
  pos += lin.size();
  for (int s : cfg.orders) {
    const RealVector block = nonlinear_features(as_span(lin), s);
    fv.values.segment(pos, block.size()) = block;
    pos += block.size();
  }
  return fv;
}

FeatureBuffer::FeatureBuffer(FeatureConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void FeatureBuffer::push(const RealVector& x) {
  if (x.size() != cfg_.input_dim) throw ConfigError("FeatureBuffer: wrong input dimension");
  history_.push_front(x);
  while (history_.size() > static_cast<std::size_t>(cfg_.warmup())) history_.pop_back();
}

bool FeatureBuffer::ready() const {
  return history_.size() >= static_cast<std::size_t>(cfg_.warmup());
}

std::vector<RealVector> FeatureBuffer::taps() const {
  if (!ready()) {
    throw ConfigError("FeatureBuffer: buffer underfilled (" + std::to_string(history_.size()) +
                      " of " + std::to_string(cfg_.warmup()) + " samples)");
  }
  std::vector<RealVector> out;
  out.reserve(cfg_.taps);
  for (int j = 0; j < cfg_.taps; ++j) out.push_back(history_[j * cfg_.stride]);
  return out;
}

FeatureVector FeatureBuffer::features() const { return assemble_features(taps(), cfg_); }

}  // namespace qrc
