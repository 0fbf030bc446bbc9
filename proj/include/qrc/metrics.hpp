#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qrc/linalg.hpp"

namespace qrc {

// sqrt( sum (target - pred)^2 / sum target^2 ).
double nrmse(std::span<const double> pred, std::span<const double> target);
RealVector nrmse_per_component(const StateMatrix& pred, const StateMatrix& target);

// First step at which ||pred_k - target_k|| / sqrt(mean_k ||target_k||^2)
// exceeds `threshold`; the compared length if it never does.
long valid_horizon(const StateMatrix& pred, const StateMatrix& target, double threshold);

// Histogram (equal-width bins over the observed range) estimate, in bits.
double average_mutual_information(std::span<const double> series, int lag, int bins);

// Smallest lag T >= 1 with AMI(T) < AMI(T-1) and AMI(T) <= AMI(T+1);
// max_lag when there is no such lag.
int ami_first_minimum(std::span<const double> series, int max_lag, int bins = 64);

struct LyapunovOptions {
  int delay = 1;
  int embed_dim = 3;
  int theiler = -1;       // < 0: delay * embed_dim
  int max_steps = 200;    // expansion steps tracked
  int fit_begin = 0;
  int fit_end = -1;       // < 0: max_steps
  bool refine = true;     // re-fit over the most linear sub-window
  double min_window_fraction = 0.5;
  double sample_dt = 1.0;
  int decimation = 1;     // keep every n-th sample before embedding
};

struct LyapunovResult {
  double exponent = 0.0;          // slope of the refined fit / sample time
  double initial_exponent = 0.0;  // slope over the requested range
  std::vector<double> divergence;  // mean log divergence per expansion step
  int fit_begin = 0;
  int fit_end = 0;
  double r_squared = 0.0;
};

// Rosenstein's method: delay embedding, nearest neighbour outside a Theiler
// window (Euclidean), mean log divergence vs step, least-squares slope.
LyapunovResult lyapunov_rosenstein(std::span<const double> series,
                                   const LyapunovOptions& opts);

struct SpectrumTable {
  std::vector<double> freq;   // cycles per time unit
  std::vector<double> value;
};

// Unnormalized forward DFT, X_f = sum_k x_k exp(-2 pi i f k / T), all T bins.
ComplexVector dft(std::span<const double> series);

inline constexpr double kPsdFloorDb = -300.0;

// One-sided, bins 0..T/2: 20 log10(2 |X_f| / T), floored at -300 dB.
SpectrumTable psd_method1(std::span<const double> series, double dt);
// One-sided, bins 0..T/2: (|X_f| / T)^2.
SpectrumTable psd_method2(std::span<const double> series, double dt);

}  // namespace qrc
