#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>

#include "qrc/linalg.hpp"

namespace qrc {

enum class SystemKind { lorenz63, doublescroll };

std::string_view to_string(SystemKind kind);
SystemKind system_kind_from_string(std::string_view name);

struct LorenzParams {
  double sigma = 10.0;
  double r = 28.0;
  double b = 8.0 / 3.0;
};

// Double-scroll circuit constants D1..D5.
struct DoubleScrollParams {
  double d1 = 1.2;
  double d2 = 3.44;
  double d3 = 0.193;
  double d4 = 11.6;
  double d5 = 2.25e-5;
};

struct SystemSpec {
  SystemKind kind = SystemKind::lorenz63;
  double tau = 0.025;
  LorenzParams lorenz{};
  DoubleScrollParams doublescroll{};

  static constexpr int dimension = 3;

  static SystemSpec lorenz63_default();
  static SystemSpec doublescroll_default();
};

using Vec3 = Eigen::Vector3d;

Vec3 lorenz63_rhs(const Vec3& state, const LorenzParams& p = {});

// |D4 * (V1 - V2)| above this is rejected before sinh is evaluated.
inline constexpr double kSinhArgumentLimit = 700.0;
Vec3 doublescroll_rhs(const Vec3& state, const DoubleScrollParams& p = {});

// Per-component z-score statistics.
struct Standardization {
  RealVector mean;
  RealVector stddev;
};

struct Trajectory {
  StateMatrix states;  // T x d, one sample per row
  double tau = 0.0;
  std::optional<Standardization> stats;

  Eigen::Index length() const { return states.rows(); }
  Eigen::Index dimension() const { return states.cols(); }
  RealVector row(Eigen::Index k) const { return states.row(k).transpose(); }
  RealVector column(Eigen::Index c) const { return states.col(c); }
};

// Half-open sample interval [begin, end).
struct IndexRange {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;
  Eigen::Index size() const { return end - begin; }
};

inline constexpr double kDivergenceLimit = 1e6;

using RhsFunction = std::function<RealVector(const RealVector&)>;

// Classic RK4 with `substeps` internal steps of tau/substeps per stored sample.
// Returns n_steps + 1 rows; row 0 is x0.
Trajectory integrate_rhs(const RhsFunction& rhs, double tau, const RealVector& x0,
                         long n_steps, int substeps = 1,
                         double divergence_limit = kDivergenceLimit);

Trajectory integrate(const SystemSpec& spec, const RealVector& x0, long n_steps,
                     int substeps = 1);

RealVector default_initial_condition(SystemKind kind);
int default_substeps(SystemKind kind);

Trajectory standardize(const Trajectory& traj, IndexRange fit_range);
Trajectory destandardize(const Trajectory& traj);

}  // namespace qrc
