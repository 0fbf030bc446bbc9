#pragma once

#include <iosfwd>
#include <span>

#include "qrc/hamiltonian.hpp"
#include "qrc/linalg.hpp"

namespace qrc {

/// N x N reservoir state.
///
/// Construction does not validate; call validate() (or reservoir_step, which
/// does it for you) to enforce Hermiticity, unit trace and positivity.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix values) : values_(std::move(values)) {}

  static DensityMatrix maximally_mixed(int n);
  static DensityMatrix pure(const ComplexVector& psi);

  const ComplexMatrix& values() const { return values_; }
  int dim() const { return static_cast<int>(values_.rows()); }

  double trace_error() const;
  double hermiticity_residual() const;
  double min_eigenvalue() const;
  double purity() const;
  RealVector populations() const;

  // Throws NumericalError naming the first violated invariant.
  void validate(double hermitian_tol = 1e-10, double trace_tol = 1e-10,
                double eigen_tol = 1e-9) const;

 private:
  ComplexMatrix values_;
};

struct ReservoirConfig {
  int n = 8;          // total dimension N
  int d_pad = 4;      // padded input dimension d'
  double tau = 0.025;  // evolution interval
  double g = 0.0;     // nonlinearity strength
  bool check_spectrum = true;

  void validate() const;
};

// x zero-padded to d_pad and scaled to unit Euclidean norm.
ComplexVector amplitude_encode(std::span<const double> x, int d_pad);

// Traces out the leading d-dimensional factor of an N = d * (N/d) system:
// out[i][j] = sum_m rho[m*(N/d) + i][m*(N/d) + j].
ComplexMatrix partial_trace_first(const ComplexMatrix& rho, int d);
// Traces out the trailing (N/d)-dimensional factor, leaving the d-dim one.
ComplexMatrix partial_trace_second(const ComplexMatrix& rho, int d);

// |S><S| (x) tr_1(rho).
DensityMatrix inject(const DensityMatrix& rho, std::span<const double> x,
                     const ReservoirConfig& cfg);

// U rho U^dagger with U = exp(-i H tau) from the Hermitian eigendecomposition.
DensityMatrix evolve(const DensityMatrix& rho, const HamiltonianMatrix& h, double tau);
DensityMatrix evolve(const DensityMatrix& rho, const ComplexMatrix& h, double tau);

// exp(-i H tau) for Hermitian H.
ComplexMatrix propagator(const HamiltonianMatrix& h, double tau);
ComplexMatrix propagator(const ComplexMatrix& h, double tau);

// One reservoir update: inject x_k, freeze the self-potential on the
// post-injection populations, evolve for tau, then re-Hermitize and
// renormalize the trace. A minimum eigenvalue below -1e-9 throws instead of
// being clipped.
DensityMatrix reservoir_step(const DensityMatrix& rho, std::span<const double> x,
                             const HamiltonianMatrix& h0, const ReservoirConfig& cfg);

struct StateDiagnostics {
  long step = 0;
  double trace = 0.0;
  double min_eig = 0.0;
  double purity = 0.0;
};

StateDiagnostics diagnose(const DensityMatrix& rho, long step);
void write_diagnostics_header(std::ostream& os);
void write_diagnostics_row(std::ostream& os, const StateDiagnostics& d);

}  // namespace qrc
