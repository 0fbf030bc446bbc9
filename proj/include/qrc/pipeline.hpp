#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qrc/config.hpp"
#include "qrc/dynamics.hpp"
#include "qrc/features.hpp"
#include "qrc/hamiltonian.hpp"
#include "qrc/metrics.hpp"
#include "qrc/reservoir.hpp"
#include "qrc/tomography.hpp"

namespace qrc {

// Everything fixed for the duration of a run once g is chosen.
struct ReservoirModel {
  FeatureConfig feature;
  HamiltonianTemplate tmpl;
  ReservoirConfig reservoir;
  OperatorBasis basis;

  // N^2 + 1: bias plus one expectation per basis operator.
  Eigen::Index readout_width() const { return static_cast<Eigen::Index>(basis.size()) + 1; }
};

HamiltonianTemplate build_template(const ExperimentConfig& cfg);
ReservoirModel build_model(const ExperimentConfig& cfg, double g);

// Called after every reservoir update with the new state and the running step count.
using StepObserver = std::function<void(const DensityMatrix&, long)>;

// Reservoir state plus the input history the next feature vector needs.
struct WarmState {
  DensityMatrix rho;
  FeatureBuffer buffer;
  RealVector measurement;  // r_k of the most recent step (N^2 entries)
  long steps_taken = 0;
  StepObserver observer;

  explicit WarmState(const ReservoirModel& model);
};

// Buffers x and, once the window is full, advances the reservoir one step and
// refreshes the measurement. Returns false while still warming up.
bool advance(WarmState& state, const RealVector& x, const ReservoirModel& model);

struct CollectedStates {
  RealMatrix r;  // train x (N^2 + 1), column 0 all ones
  RealMatrix y;  // train x d, row k = x_{k+1}
  WarmState warm;
};

// Teacher-forced run over samples [0, washout + train): the first `washout`
// steps are discarded, the next `train` produce R/Y rows.
CollectedStates collect_states(const Trajectory& traj, const ReservoirModel& model,
                               long washout, long train, const StepObserver& observer = {});

struct ReadoutModel {
  RealMatrix w_out;  // l x (N^2 + 1), bias column first

  RealVector predict(const RealVector& measurement) const;
  RealMatrix predict_rows(const RealMatrix& r) const;  // rows of [1, r_k]
};

// argmin ||Y - R W||^2 + ridge ||W||^2 by complete orthogonal decomposition;
// minimum-norm when ridge = 0.
ReadoutModel train_readout(const RealMatrix& r, const RealMatrix& y, double ridge);

struct Prediction {
  Trajectory trajectory;  // may be shorter than requested
  long requested = 0;
  bool diverged = false;
  std::string stop_reason;
};

// Autonomous run: emit W_out [1, r_k], feed it back as the next input.
Prediction predict_closed_loop(const ReadoutModel& model, WarmState warm,
                               const ReservoirModel& reservoir, long steps, double tau,
                               double divergence_limit = 1e6);

struct CalibrationPoint {
  double g = 0.0;
  long valid_horizon = 0;
  double train_nrmse = 0.0;  // mean over components, teacher forced
  std::string error;         // non-empty if this point failed
};

struct CalibrationResult {
  double chosen_g = 0.0;
  std::vector<CalibrationPoint> points;
};

// Grid search over g: train on the head of the training segment, predict the
// held-out tail in closed loop, keep the longest valid horizon.
CalibrationResult calibrate_g(const Trajectory& standardized, const ExperimentConfig& cfg);

struct MetricsReport {
  RealVector nrmse;
  double lyapunov_target = 0.0;
  double lyapunov_predicted = 0.0;  // NaN when the prediction is too short
  int ami_delay = 0;
  SpectrumTable psd1_target, psd1_predicted;
  SpectrumTable psd2_target, psd2_predicted;
  std::vector<double> divergence_target, divergence_predicted;
};

MetricsReport evaluate_prediction(const Trajectory& predicted, const Trajectory& target,
                                  const MetricsSettings& settings);

struct RunResult {
  Trajectory predicted;
  Trajectory target;
  RealVector train_nrmse;
  RealVector test_nrmse;
  long valid_horizon = 0;
  bool diverged = false;
  double g = 0.0;
  std::optional<CalibrationResult> calibration;
  std::optional<MetricsReport> metrics;
};

// generate -> standardize -> calibrate -> collect -> train -> predict -> metrics.
// Failures are rethrown as StageError naming the stage.
RunResult run_experiment(const ExperimentConfig& cfg, const StepObserver& observer = {});

// Integrated and standardized (over washout + train) input data for a config.
Trajectory generate_standardized(const ExperimentConfig& cfg);

}  // namespace qrc
