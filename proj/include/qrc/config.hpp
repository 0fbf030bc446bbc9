#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qrc/dynamics.hpp"
#include "qrc/features.hpp"
#include "qrc/reservoir.hpp"

namespace qrc {

enum class DiagonalMode { fixed, random };

struct HamiltonianSettings {
  DiagonalMode diagonal_mode = DiagonalMode::fixed;
  std::vector<double> diagonal;  // fixed mode; length must equal the active dimension
  double diagonal_scale = 1.0;
  double diagonal_min = 100.0;   // random mode range
  double diagonal_max = 1000.0;
  std::optional<double> fill_constant;
  int total_dim = 0;             // 0: smallest power of two fitting the block and d'
  int active_offset = -1;        // < 0: centred
};

struct CalibrationSettings {
  bool enabled = true;
  double g_min = 1e-2;
  double g_max = 1e3;
  int points = 13;
  double holdout_fraction = 0.2;

  std::vector<double> grid() const;  // logarithmic, g_min..g_max inclusive
};

struct MetricsSettings {
  bool enabled = true;
  int ami_max_lag = 100;
  int ami_bins = 64;
  int embed_dim = 3;
  int lyapunov_component = 0;
  int lyapunov_max_steps = 200;
  int lyapunov_fit_begin = 0;
  int lyapunov_fit_end = -1;
  int decimation = 1;
  int psd_component = 2;
};

struct ExperimentConfig {
  SystemSpec system = SystemSpec::lorenz63_default();
  RealVector x0 = default_initial_condition(SystemKind::lorenz63);
  int substeps = 1;

  FeatureConfig feature{};
  HamiltonianSettings hamiltonian{};

  int d_pad = 4;
  double reservoir_tau = 0.0;  // 0: same as the sampling interval
  double g = 0.0;              // used as-is when calibration is disabled
  bool check_spectrum = true;

  long washout = 600;
  long train = 4000;
  long test = 27000;
  double ridge = 1e-8;
  std::uint64_t seed = 0;
  CalibrationSettings calibration{};
  double horizon_threshold = 0.4;
  double divergence_limit = 1e6;

  MetricsSettings metrics{};

  // Integration steps: washout + train + test samples plus the initial row.
  long n_steps() const { return washout + train + test; }
  double evolution_tau() const { return reservoir_tau > 0.0 ? reservoir_tau : system.tau; }

  static ExperimentConfig lorenz63_preset();
  static ExperimentConfig doublescroll_preset();
  static ExperimentConfig preset(SystemKind kind);
};

// Parses `[section]` / `key = value` text. '#' and ';' start comments.
// Keys not set fall back to the preset of the selected system. Errors are
// ConfigError with "<source>:<line>: <section>.<key>: ..." diagnostics.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

// Cross-field checks run at the end of parse_config; ConfigError names the key.
void validate_config(const ExperimentConfig& cfg);

// Sorted `section.key = value` lines covering every parameter; the run
// digest hashes this text.
std::string canonical_config(const ExperimentConfig& cfg);
std::string preset_text(SystemKind kind);

// Applies a single `section.key = value` override (sweeps, --seed).
void set_config_value(ExperimentConfig& cfg, const std::string& dotted_key,
                      const std::string& value);

// Shortened lengths for quick runs: washout 100, train 500, test 500.
void apply_smoke(ExperimentConfig& cfg);

}  // namespace qrc
