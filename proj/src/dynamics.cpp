#include "qrc/dynamics.hpp"

#include <cmath>
#include <string>

#include "qrc/error.hpp"

namespace qrc {

namespace {

void require_finite(const Vec3& state, const char* who) {
  if (!state.allFinite()) {
    throw DomainError(std::string(who) + ": non-finite state");
  }
}

}  // namespace

std::string_view to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::lorenz63:
      return "lorenz63";
    case SystemKind::doublescroll:
      return "doublescroll";
  }
  return "unknown";
}

SystemKind system_kind_from_string(std::string_view name) {
  if (name == "lorenz63") return SystemKind::lorenz63;
  if (name == "doublescroll") return SystemKind::doublescroll;
  throw ConfigError("unknown system '" + std::string(name) + "'");
}

SystemSpec SystemSpec::lorenz63_default() {
  SystemSpec s;
  s.kind = SystemKind::lorenz63;
  s.tau = 0.025;
  return s;
}

SystemSpec SystemSpec::doublescroll_default() {
  SystemSpec s;
  s.kind = SystemKind::doublescroll;
  s.tau = 0.25;
  return s;
}

Vec3 lorenz63_rhs(const Vec3& state, const LorenzParams& p) {
  require_finite(state, "lorenz63_rhs");
  const double x = state[0], y = state[1], z = state[2];
  return {p.sigma * (y - x), x * (p.r - z) - y, x * y - p.b * z};
}

Vec3 doublescroll_rhs(const Vec3& state, const DoubleScrollParams& p) {
  require_finite(state, "doublescroll_rhs");
  const double v1 = state[0], v2 = state[1], current = state[2];
  const double dv = v1 - v2;
  const double arg = p.d4 * dv;
  if (std::abs(arg) > kSinhArgumentLimit) {
    throw DomainError("doublescroll_rhs: sinh argument " + std::to_string(arg) +
                      " exceeds overflow guard");
  }
  const double drive = dv / p.d2 + 2.0 * p.d5 * std::sinh(arg);
  return {v1 / p.d1 - drive, drive - current, v2 - p.d3 * current};
}

Trajectory integrate_rhs(const RhsFunction& rhs, double tau, const RealVector& x0,
                         long n_steps, int substeps, double divergence_limit) {
  if (!(tau > 0.0)) throw ConfigError("integrate: tau must be positive");
  if (n_steps < 0) throw ConfigError("integrate: n_steps must be non-negative");
  if (substeps < 1) throw ConfigError("integrate: substeps must be >= 1");
  if (!x0.allFinite()) throw DomainError("integrate: non-finite initial condition");

  const Eigen::Index d = x0.size();
  Trajectory out;
  out.tau = tau;
  out.states.resize(n_steps + 1, d);
  out.states.row(0) = x0.transpose();

  const double h = tau / substeps;
  RealVector x = x0;
  for (long step = 1; step <= n_steps; ++step) {
    for (int s = 0; s < substeps; ++s) {
      const RealVector k1 = rhs(x);
      const RealVector k2 = rhs(x + 0.5 * h * k1);
      const RealVector k3 = rhs(x + 0.5 * h * k2);
      const RealVector k4 = rhs(x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > divergence_limit) {
      throw IntegrationError("integrate: trajectory diverged at step " + std::to_string(step),
                             step);
    }
    out.states.row(step) = x.transpose();
  }
  return out;
}

Trajectory integrate(const SystemSpec& spec, const RealVector& x0, long n_steps,
                     int substeps) {
  if (x0.size() != SystemSpec::dimension) {
    throw ConfigError("integrate: initial condition must have 3 components");
  }
  RhsFunction rhs;
  switch (spec.kind) {
    case SystemKind::lorenz63:
      rhs = [p = spec.lorenz](const RealVector& x) -> RealVector {
        return lorenz63_rhs(Vec3(x), p);
      };
      break;
    case SystemKind::doublescroll:
      rhs = [p = spec.doublescroll](const RealVector& x) -> RealVector {
        return doublescroll_rhs(Vec3(x), p);
      };
      break;
  }
  return integrate_rhs(rhs, spec.tau, x0, n_steps, substeps);
}

RealVector default_initial_condition(SystemKind kind) {
  if (kind == SystemKind::lorenz63) return Vec3(1.0, 1.0, 1.0);
  return Vec3(0.3, 0.1, 0.05);
}

int default_substeps(SystemKind kind) { return kind == SystemKind::lorenz63 ? 1 : 10; }

Trajectory standardize(const Trajectory& traj, IndexRange fit_range) {
  if (fit_range.begin < 0 || fit_range.end > traj.length() || fit_range.size() < 1) {
    throw ConfigError("standardize: fit range out of bounds");
  }
  const auto segment = traj.states.middleRows(fit_range.begin, fit_range.size());
  const Eigen::Index n = fit_range.size();

  Standardization stats;
  stats.mean = segment.colwise().mean().transpose();
  stats.stddev.resize(traj.dimension());
  for (Eigen::Index c = 0; c < traj.dimension(); ++c) {
    const double var = (segment.col(c).array() - stats.mean[c]).square().sum() / n;
    stats.stddev[c] = std::sqrt(var);
    if (!(stats.stddev[c] > 1e-12)) {
      throw DomainError("standardize: component " + std::to_string(c) + " has zero variance");
    }
  }

  Trajectory out;
  out.tau = traj.tau;
  out.states = (traj.states.rowwise() - stats.mean.transpose()).array().rowwise() /
               stats.stddev.transpose().array();
  out.stats = std::move(stats);
  return out;
}

Trajectory destandardize(const Trajectory& traj) {
  if (!traj.stats) throw ConfigError("destandardize: trajectory carries no statistics");
  Trajectory out;
  out.tau = traj.tau;
  out.states = (traj.states.array().rowwise() * traj.stats->stddev.transpose().array())
                   .rowwise() +
               traj.stats->mean.transpose().array();
  return out;
}

}  // namespace qrc
