#include "qrc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>

#include <fftw3.h>

#include "qrc/error.hpp"

namespace qrc {

double nrmse(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw ConfigError("nrmse: series must have equal non-zero length");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    num += (target[k] - pred[k]) * (target[k] - pred[k]);
    den += target[k] * target[k];
  }
  if (!(den > 0.0)) throw DomainError("nrmse: target has zero energy");
  return std::sqrt(num / den);
}

RealVector nrmse_per_component(const StateMatrix& pred, const StateMatrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw ConfigError("nrmse: shape mismatch");
  }
  RealVector out(pred.cols());
  for (Eigen::Index c = 0; c < pred.cols(); ++c) {
    const RealVector p = pred.col(c);
    const RealVector t = target.col(c);
    out[c] = nrmse(as_span(p), as_span(t));
  }
  return out;
}

long valid_horizon(const StateMatrix& pred, const StateMatrix& target, double threshold) {
  const Eigen::Index n = std::min(pred.rows(), target.rows());
  if (n == 0) return 0;
  const double scale = std::sqrt(target.topRows(n).rowwise().squaredNorm().mean());
  if (!(scale > 0.0)) throw DomainError("valid_horizon: target has zero energy");
  for (Eigen::Index k = 0; k < n; ++k) {
    const double err = (pred.row(k) - target.row(k)).norm() / scale;
    if (!(err <= threshold)) return static_cast<long>(k);
  }
  return static_cast<long>(n);
}

namespace {

std::vector<int> bin_indices(std::span<const double> series, int bins) {
  const auto [lo_it, hi_it] = std::minmax_element(series.begin(), series.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) throw DomainError("ami: series is constant");
  std::vector<int> idx(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const int b = static_cast<int>((series[i] - lo) / (hi - lo) * bins);
    idx[i] = std::clamp(b, 0, bins - 1);
  }
  return idx;
}

double ami_from_bins(const std::vector<int>& idx, int lag, int bins) {
  const std::size_t pairs = idx.size() - static_cast<std::size_t>(lag);
  std::vector<double> joint(static_cast<std::size_t>(bins) * bins, 0.0);
  std::vector<double> px(bins, 0.0), py(bins, 0.0);
  for (std::size_t i = 0; i < pairs; ++i) {
    joint[static_cast<std::size_t>(idx[i]) * bins + idx[i + lag]] += 1.0;
    px[idx[i]] += 1.0;
    py[idx[i + lag]] += 1.0;
  }
  const double n = static_cast<double>(pairs);
  double ami = 0.0;
  for (int a = 0; a < bins; ++a) {
    for (int b = 0; b < bins; ++b) {
      const double c = joint[static_cast<std::size_t>(a) * bins + b];
      if (c > 0.0) ami += (c / n) * std::log2(c * n / (px[a] * py[b]));
    }
  }
  return ami;
}

}  // namespace

double average_mutual_information(std::span<const double> series, int lag, int bins) {
  if (bins < 2) throw ConfigError("ami: need at least 2 bins");
  if (lag < 0 || static_cast<std::size_t>(lag) >= series.size()) {
    throw ConfigError("ami: lag out of range");
  }
  return ami_from_bins(bin_indices(series, bins), lag, bins);
}

int ami_first_minimum(std::span<const double> series, int max_lag, int bins) {
  if (bins < 2) throw ConfigError("ami: need at least 2 bins");
  if (max_lag < 1 || series.size() <= 2 * static_cast<std::size_t>(max_lag)) {
    throw ConfigError("ami: series must be longer than 2 * max_lag");
  }
  const std::vector<int> idx = bin_indices(series, bins);
  std::vector<double> ami(static_cast<std::size_t>(max_lag) + 2);
  for (int t = 0; t <= max_lag + 1; ++t) ami[t] = ami_from_bins(idx, t, bins);
  for (int t = 1; t <= max_lag; ++t) {
    if (ami[t] < ami[t - 1] && ami[t] <= ami[t + 1]) return t;
  }
  return max_lag;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double r_squared = 0.0;
};

// Least-squares line through (k, y[k]) for k in [begin, end], via prefix sums.
class PrefixFitter {
 public:
  explicit PrefixFitter(const std::vector<double>& y) : n_(y.size() + 1) {
    sx_.assign(n_, 0.0);
    sy_ = sxx_ = sxy_ = syy_ = sx_;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double x = static_cast<double>(k);
      sx_[k + 1] = sx_[k] + x;
      sy_[k + 1] = sy_[k] + y[k];
      sxx_[k + 1] = sxx_[k] + x * x;
      sxy_[k + 1] = sxy_[k] + x * y[k];
      syy_[k + 1] = syy_[k] + y[k] * y[k];
    }
  }

  LineFit fit(int begin, int end) const {
    const double n = end - begin + 1;
    const double sx = sx_[end + 1] - sx_[begin];
    const double sy = sy_[end + 1] - sy_[begin];
    const double cxx = (sxx_[end + 1] - sxx_[begin]) - sx * sx / n;
    const double cxy = (sxy_[end + 1] - sxy_[begin]) - sx * sy / n;
    const double cyy = (syy_[end + 1] - syy_[begin]) - sy * sy / n;
    LineFit f;
    f.slope = cxy / cxx;
    f.r_squared = cyy > 0.0 ? (cxy * cxy) / (cxx * cyy) : 0.0;
    return f;
  }

 private:
  std::size_t n_;
  std::vector<double> sx_, sy_, sxx_, sxy_, syy_;
};

}  // namespace

LyapunovResult lyapunov_rosenstein(std::span<const double> series,
                                   const LyapunovOptions& opts) {
  if (opts.delay < 1 || opts.embed_dim < 1 || opts.max_steps < 2 || opts.decimation < 1) {
    throw ConfigError("lyapunov: delay, embed_dim, decimation >= 1 and max_steps >= 2");
  }
  std::vector<double> x;
  for (std::size_t i = 0; i < series.size(); i += static_cast<std::size_t>(opts.decimation)) {
    x.push_back(series[i]);
  }
  const long span_len = static_cast<long>(opts.delay) * (opts.embed_dim - 1);
  const long m_points = static_cast<long>(x.size()) - span_len;
  const long n_ref = m_points - opts.max_steps;
  const int theiler = opts.theiler < 0 ? opts.delay * opts.embed_dim : opts.theiler;
  if (n_ref < 2 * (theiler + 1)) {
    throw ConfigError("lyapunov: series too short for the embedding and expansion range");
  }

  const int m = opts.embed_dim;
  auto coord = [&](long i, int c) { return x[static_cast<std::size_t>(i + c * opts.delay)]; };
  auto dist2 = [&](long i, long j) {
    double s = 0.0;
    for (int c = 0; c < m; ++c) {
      const double d = coord(i, c) - coord(j, c);
      s += d * d;
    }
    return s;
  };

  // Neighbour search over reference points sorted by the first coordinate;
  // the scan stops once the first-coordinate gap alone exceeds the best distance.
  std::vector<long> order(static_cast<std::size_t>(n_ref));
  std::iota(order.begin(), order.end(), 0L);
  std::stable_sort(order.begin(), order.end(),
                   [&](long a, long b) { return coord(a, 0) < coord(b, 0); });
  std::vector<long> rank(order.size());
  for (std::size_t p = 0; p < order.size(); ++p) rank[static_cast<std::size_t>(order[p])] = p;

  std::vector<double> sum(static_cast<std::size_t>(opts.max_steps) + 1, 0.0);
  std::vector<long> count(sum.size(), 0);
  long with_neighbour = 0;

  for (long i = 0; i < n_ref; ++i) {
    const long p = rank[static_cast<std::size_t>(i)];
    const double xi = coord(i, 0);
    double best = std::numeric_limits<double>::infinity();
    long best_j = -1;
    auto consider = [&](long j) {
      if (std::abs(j - i) <= theiler) return;
      const double d = dist2(i, j);
      if (d > 0.0 && (d < best || (d == best && j < best_j))) {
        best = d;
        best_j = j;
      }
    };
    for (long q = p - 1; q >= 0; --q) {
      const long j = order[static_cast<std::size_t>(q)];
      const double gap = xi - coord(j, 0);
      if (gap * gap > best) break;
      consider(j);
    }
    for (long q = p + 1; q < n_ref; ++q) {
      const long j = order[static_cast<std::size_t>(q)];
      const double gap = coord(j, 0) - xi;
      if (gap * gap > best) break;
      consider(j);
    }
    if (best_j < 0) continue;
    ++with_neighbour;
    for (int k = 0; k <= opts.max_steps; ++k) {
      const double d = dist2(i + k, best_j + k);
      if (d > 0.0) {
        sum[static_cast<std::size_t>(k)] += 0.5 * std::log(d);
        ++count[static_cast<std::size_t>(k)];
      }
    }
  }
  if (with_neighbour == 0) throw NumericalError("lyapunov: no valid nearest neighbours");

  LyapunovResult res;
  res.divergence.resize(sum.size());
  for (std::size_t k = 0; k < sum.size(); ++k) {
    if (count[k] == 0) throw NumericalError("lyapunov: empty divergence bin");
    res.divergence[k] = sum[k] / static_cast<double>(count[k]);
  }

  const int begin = std::max(0, opts.fit_begin);
  const int end = opts.fit_end < 0 ? opts.max_steps : std::min(opts.fit_end, opts.max_steps);
  if (end - begin < 2) throw ConfigError("lyapunov: fit range needs at least 3 points");
  const double dt = opts.sample_dt * opts.decimation;

  const PrefixFitter fitter(res.divergence);
  const LineFit initial = fitter.fit(begin, end);
  res.initial_exponent = initial.slope / dt;
  res.fit_begin = begin;
  res.fit_end = end;
  res.r_squared = initial.r_squared;
  LineFit chosen = initial;

  if (opts.refine) {
    const int len = end - begin + 1;
    const int min_len =
        std::max(3, static_cast<int>(std::ceil(opts.min_window_fraction * len)));
    double best_r2 = -1.0;
    for (int s = begin; s + min_len - 1 <= end; ++s) {
      for (int e = s + min_len - 1; e <= end; ++e) {
        const LineFit f = fitter.fit(s, e);
        if (f.r_squared > best_r2) {
          best_r2 = f.r_squared;
          chosen = f;
          res.fit_begin = s;
          res.fit_end = e;
        }
      }
    }
    res.r_squared = chosen.r_squared;
  }
  res.exponent = chosen.slope / dt;
  return res;
}

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Non-negative-frequency half of the unnormalized real-input DFT.
ComplexVector half_spectrum(std::span<const double> series) {
  const int n = static_cast<int>(series.size());
  if (n < 1) throw ConfigError("dft: empty series");
  double* in = fftw_alloc_real(static_cast<std::size_t>(n));
  fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  std::copy(series.begin(), series.end(), in);
  fftw_execute(plan);
  ComplexVector result(n / 2 + 1);
  for (int f = 0; f <= n / 2; ++f) result[f] = complex(out[f][0], out[f][1]);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return result;
}

SpectrumTable one_sided(std::span<const double> series, double dt, bool decibel) {
  if (series.size() < 2) throw ConfigError("psd: series needs at least 2 samples");
  if (!(dt > 0.0)) throw ConfigError("psd: sample spacing must be positive");
  const ComplexVector spec = half_spectrum(series);
  const double n = static_cast<double>(series.size());
  SpectrumTable t;
  for (Eigen::Index f = 0; f < spec.size(); ++f) {
    const double mag = std::abs(spec[f]) / n;
    t.freq.push_back(static_cast<double>(f) / (n * dt));
    if (decibel) {
      const double db = 20.0 * std::log10(2.0 * mag);
      t.value.push_back(std::isfinite(db) ? std::max(db, kPsdFloorDb) : kPsdFloorDb);
    } else {
      t.value.push_back(mag * mag);
    }
  }
  return t;
}

}  // namespace

ComplexVector dft(std::span<const double> series) {
  const ComplexVector half = half_spectrum(series);
  const Eigen::Index n = static_cast<Eigen::Index>(series.size());
  ComplexVector full(n);
  for (Eigen::Index f = 0; f < n; ++f) {
    full[f] = f < half.size() ? half[f] : std::conj(half[n - f]);
  }
  return full;
}

SpectrumTable psd_method1(std::span<const double> series, double dt) {
  return one_sided(series, dt, true);
}

SpectrumTable psd_method2(std::span<const double> series, double dt) {
  return one_sided(series, dt, false);
}

}  // namespace qrc
