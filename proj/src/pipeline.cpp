#include "qrc/pipeline.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "qrc/error.hpp"

namespace qrc {

HamiltonianTemplate build_template(const ExperimentConfig& cfg) {
  const std::size_t q_k = feature_layout(cfg.feature).total();
  const int n_active = active_dimension(q_k);
  const auto& hs = cfg.hamiltonian;

  RealVector diag;
  if (hs.diagonal_mode == DiagonalMode::random) {
    diag = random_diagonal(n_active, hs.diagonal_min, hs.diagonal_max, cfg.seed);
  } else {
    if (static_cast<int>(hs.diagonal.size()) != n_active) {
      throw ConfigError("hamiltonian.diagonal: " + std::to_string(q_k) + " features need " +
                        std::to_string(n_active) + " diagonal entries, got " +
                        std::to_string(hs.diagonal.size()));
    }
    diag = Eigen::Map<const RealVector>(hs.diagonal.data(), n_active);
  }
  diag *= hs.diagonal_scale;

  const int n_total =
      hs.total_dim > 0 ? hs.total_dim : default_total_dimension(n_active, cfg.d_pad);
  return HamiltonianTemplate::create(q_k, std::move(diag), hs.fill_constant, n_total,
                                     hs.active_offset);
}

ReservoirModel build_model(const ExperimentConfig& cfg, double g) {
  HamiltonianTemplate tmpl = build_template(cfg);
  ReservoirConfig rc;
  rc.n = tmpl.n_total();
  rc.d_pad = cfg.d_pad;
  rc.tau = cfg.evolution_tau();
  rc.g = g;
  rc.check_spectrum = cfg.check_spectrum;
  rc.validate();
  return ReservoirModel{cfg.feature, std::move(tmpl), rc, OperatorBasis(rc.n)};
}

WarmState::WarmState(const ReservoirModel& model)
    : rho(DensityMatrix::maximally_mixed(model.reservoir.n)), buffer(model.feature) {
  measurement = measure_all(rho, model.basis);
}

bool advance(WarmState& state, const RealVector& x, const ReservoirModel& model) {
  state.buffer.push(x);
  if (!state.buffer.ready()) return false;
  const FeatureVector fv = state.buffer.features();
  const HamiltonianMatrix h0 = assemble_h0(as_span(fv.values), model.tmpl);
  state.rho = reservoir_step(state.rho, as_span(x), h0, model.reservoir);
  state.measurement = measure_all(state.rho, model.basis);
  ++state.steps_taken;
  if (state.observer) state.observer(state.rho, state.steps_taken);
  return true;
}

CollectedStates collect_states(const Trajectory& traj, const ReservoirModel& model,
                               long washout, long train, const StepObserver& observer) {
  if (washout < 0 || train < 1) throw ConfigError("collect_states: bad segment lengths");
  if (traj.length() < washout + train + 1) {
    throw ConfigError("collect_states: trajectory has " + std::to_string(traj.length()) +
                      " samples, need " + std::to_string(washout + train + 1));
  }
  const Eigen::Index width = model.readout_width();
  CollectedStates out{RealMatrix(train, width), RealMatrix(train, traj.dimension()),
                      WarmState(model)};
  out.warm.observer = observer;

  RealVector expected_input;
  for (long k = 0; k < washout + train; ++k) {
    const RealVector x = traj.row(k);
    if (k > washout) {
      // Teacher forcing: this input is exactly the previous row's target.
      if (x != expected_input) throw Error("collect_states: teacher forcing mismatch");
    }
    bool stepped = false;
    try {
      stepped = advance(out.warm, x, model);
    } catch (const Error& e) {
      throw NumericalError("collect_states: step " + std::to_string(k) + ": " + e.what());
    }
    if (k < washout) continue;
    if (!stepped) throw ConfigError("collect_states: feature window not full after washout");
    const long row = k - washout;
    out.r(row, 0) = 1.0;
    out.r.row(row).tail(width - 1) = out.warm.measurement.transpose();
    expected_input = traj.row(k + 1);
    out.y.row(row) = expected_input.transpose();
  }
  return out;
}

RealVector ReadoutModel::predict(const RealVector& measurement) const {
  return w_out.col(0) + w_out.rightCols(w_out.cols() - 1) * measurement;
}

RealMatrix ReadoutModel::predict_rows(const RealMatrix& r) const { return r * w_out.transpose(); }

ReadoutModel train_readout(const RealMatrix& r, const RealMatrix& y, double ridge) {
  if (r.rows() != y.rows()) throw ConfigError("train_readout: R and Y row counts differ");
  if (r.rows() <= r.cols()) {
    throw TrainingError("train_readout: need more samples (" + std::to_string(r.rows()) +
                        ") than readout width (" + std::to_string(r.cols()) + ")");
  }
  if (ridge < 0.0) throw ConfigError("train_readout: ridge must be >= 0");
  if (!r.allFinite() || !y.allFinite()) throw TrainingError("train_readout: non-finite data");
  if (r.cwiseAbs().maxCoeff() == 0.0) throw TrainingError("train_readout: effective rank 0");

  RealMatrix a = r;
  RealMatrix b = y;
  if (ridge > 0.0) {
    const Eigen::Index w = r.cols();
    a.conservativeResize(r.rows() + w, Eigen::NoChange);
    a.bottomRows(w) = std::sqrt(ridge) * RealMatrix::Identity(w, w);
    b.conservativeResize(y.rows() + w, Eigen::NoChange);
    b.bottomRows(w).setZero();
  }
  const Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(a);
  if (cod.rank() == 0) throw TrainingError("train_readout: effective rank 0");
  ReadoutModel model;
  model.w_out = cod.solve(b).transpose();
  if (!model.w_out.allFinite()) throw TrainingError("train_readout: non-finite weights");
  return model;
}

Prediction predict_closed_loop(const ReadoutModel& model, WarmState warm,
                               const ReservoirModel& reservoir, long steps, double tau,
                               double divergence_limit) {
  Prediction p;
  p.requested = steps;
  p.trajectory.tau = tau;
  const Eigen::Index d = model.w_out.rows();
  p.trajectory.states.resize(std::max(0L, steps), d);

  long produced = 0;
  for (long i = 0; i < steps; ++i) {
    const RealVector y = model.predict(warm.measurement);
    if (!y.allFinite() || y.cwiseAbs().maxCoeff() > divergence_limit) {
      p.diverged = true;
      p.stop_reason = "output left the divergence box at step " + std::to_string(i);
      break;
    }
    p.trajectory.states.row(i) = y.transpose();
    produced = i + 1;
    if (i + 1 == steps) break;
    try {
      advance(warm, y, reservoir);
    } catch (const Error& e) {
      p.diverged = true;
      p.stop_reason = "reservoir failed at step " + std::to_string(i) + ": " + e.what();
      break;
    }
  }
  p.trajectory.states.conservativeResize(produced, d);
  return p;
}

namespace {

StateMatrix rows_of(const Trajectory& traj, long begin, long count) {
  return traj.states.middleRows(begin, count);
}

double mean_train_nrmse(const ReadoutModel& ro, const CollectedStates& col) {
  const StateMatrix fit = ro.predict_rows(col.r);
  const StateMatrix target = col.y;
  return nrmse_per_component(fit, target).mean();
}

template <typename F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(stage) + ": " + e.what());
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace

CalibrationResult calibrate_g(const Trajectory& standardized, const ExperimentConfig& cfg) {
  const long holdout =
      std::max(1L, std::lround(static_cast<double>(cfg.train) * cfg.calibration.holdout_fraction));
  const long fit_train = cfg.train - holdout;
  CalibrationResult result;
  double best_nrmse = std::numeric_limits<double>::infinity();
  long best_horizon = -1;

  for (double g : cfg.calibration.grid()) {
    CalibrationPoint pt;
    pt.g = g;
    pt.valid_horizon = -1;
    try {
      const ReservoirModel model = build_model(cfg, g);
      const CollectedStates col = collect_states(standardized, model, cfg.washout, fit_train);
      const ReadoutModel ro = train_readout(col.r, col.y, cfg.ridge);
      pt.train_nrmse = mean_train_nrmse(ro, col);
      const Prediction pred = predict_closed_loop(ro, col.warm, model, holdout, standardized.tau,
                                                  cfg.divergence_limit);
      const StateMatrix target = rows_of(standardized, cfg.washout + fit_train, holdout);
      pt.valid_horizon = valid_horizon(pred.trajectory.states, target, cfg.horizon_threshold);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      pt.error = e.what();
    }
    if (pt.error.empty() && (pt.valid_horizon > best_horizon ||
                             (pt.valid_horizon == best_horizon && pt.train_nrmse < best_nrmse))) {
      best_horizon = pt.valid_horizon;
      best_nrmse = pt.train_nrmse;
      result.chosen_g = g;
    }
    result.points.push_back(std::move(pt));
  }
  if (best_horizon < 0) throw TrainingError("calibrate_g: every grid point failed");
  return result;
}

MetricsReport evaluate_prediction(const Trajectory& predicted, const Trajectory& target,
                                  const MetricsSettings& s) {
  const Eigen::Index n = std::min(predicted.length(), target.length());
  if (n < 2) throw ConfigError("evaluate_prediction: need at least 2 samples");
  const StateMatrix pred = predicted.states.topRows(n);
  const StateMatrix tgt = target.states.topRows(n);
  MetricsReport m;
  m.nrmse = nrmse_per_component(pred, tgt);

  const RealVector lt = tgt.col(s.lyapunov_component);
  const RealVector lp = pred.col(s.lyapunov_component);
  const int max_lag = std::min<int>(s.ami_max_lag, static_cast<int>((n - 1) / 2));
  m.ami_delay = max_lag >= 1 ? ami_first_minimum(as_span(lt), max_lag, s.ami_bins) : 1;

  LyapunovOptions opts;
  opts.delay = m.ami_delay;
  opts.embed_dim = s.embed_dim;
  opts.max_steps = s.lyapunov_max_steps;
  opts.fit_begin = s.lyapunov_fit_begin;
  opts.fit_end = s.lyapunov_fit_end;
  opts.sample_dt = target.tau;
  opts.decimation = s.decimation;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    const LyapunovResult r = lyapunov_rosenstein(as_span(lt), opts);
    m.lyapunov_target = r.exponent;
    m.divergence_target = r.divergence;
  } catch (const Error&) {
    m.lyapunov_target = nan;
  }
  try {
    const LyapunovResult r = lyapunov_rosenstein(as_span(lp), opts);
    m.lyapunov_predicted = r.exponent;
    m.divergence_predicted = r.divergence;
  } catch (const Error&) {
    m.lyapunov_predicted = nan;
  }

  const RealVector pt = tgt.col(s.psd_component);
  const RealVector pp = pred.col(s.psd_component);
  m.psd1_target = psd_method1(as_span(pt), target.tau);
  m.psd1_predicted = psd_method1(as_span(pp), target.tau);
  m.psd2_target = psd_method2(as_span(pt), target.tau);
  m.psd2_predicted = psd_method2(as_span(pp), target.tau);
  return m;
}

Trajectory generate_standardized(const ExperimentConfig& cfg) {
  const Trajectory raw = in_stage("generate", [&] {
    return integrate(cfg.system, cfg.x0, cfg.n_steps(), cfg.substeps);
  });
  return in_stage("standardize", [&] {
    return standardize(raw, IndexRange{0, cfg.washout + cfg.train});
  });
}

RunResult run_experiment(const ExperimentConfig& cfg, const StepObserver& observer) {
  RunResult res;
  const Trajectory data = generate_standardized(cfg);

  res.g = cfg.g;
  if (cfg.calibration.enabled) {
    res.calibration = in_stage("calibrate", [&] { return calibrate_g(data, cfg); });
    res.g = res.calibration->chosen_g;
  }

  const ReservoirModel model = in_stage("collect", [&] { return build_model(cfg, res.g); });
  CollectedStates col = in_stage("collect", [&] {
    return collect_states(data, model, cfg.washout, cfg.train, observer);
  });

  const ReadoutModel ro =
      in_stage("train", [&] { return train_readout(col.r, col.y, cfg.ridge); });
  res.train_nrmse = in_stage("train", [&] {
    const StateMatrix fit = ro.predict_rows(col.r);
    const StateMatrix y = col.y;
    return nrmse_per_component(fit, y);
  });

  const Prediction pred = in_stage("predict", [&] {
    return predict_closed_loop(ro, std::move(col.warm), model, cfg.test, data.tau,
                               cfg.divergence_limit);
  });
  res.diverged = pred.diverged;
  res.predicted = pred.trajectory;
  const long n = res.predicted.length();
  res.target.tau = data.tau;
  res.target.states = rows_of(data, cfg.washout + cfg.train, n);
  res.target.stats = data.stats;

  if (n > 0) {
    res.test_nrmse = in_stage("metrics", [&] {
      return nrmse_per_component(res.predicted.states, res.target.states);
    });
    res.valid_horizon = valid_horizon(res.predicted.states, res.target.states,
                                      cfg.horizon_threshold);
  } else {
    res.test_nrmse = RealVector::Constant(data.dimension(), std::numeric_limits<double>::quiet_NaN());
  }
  if (cfg.metrics.enabled && n >= 2) {
    res.metrics = in_stage("metrics", [&] {
      return evaluate_prediction(res.predicted, res.target, cfg.metrics);
    });
  }
  return res;
}

}  // namespace qrc
