#include "qrc/reservoir.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "qrc/csv.hpp"
#include "qrc/error.hpp"

namespace qrc {

DensityMatrix DensityMatrix::maximally_mixed(int n) {
  return DensityMatrix(ComplexMatrix::Identity(n, n) / static_cast<double>(n));
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
  return DensityMatrix(psi * psi.adjoint());
}

double DensityMatrix::trace_error() const { return std::abs(values_.trace() - complex(1.0)); }

double DensityMatrix::hermiticity_residual() const {
  return (values_ - values_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const ComplexMatrix herm = 0.5 * (values_ + values_.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("min_eigenvalue: eigensolver failed");
  return es.eigenvalues().minCoeff();
}

double DensityMatrix::purity() const {
  // tr(rho^2) = sum_ij |rho_ij|^2 for Hermitian rho.
  return values_.cwiseAbs2().sum();
}

RealVector DensityMatrix::populations() const { return values_.diagonal().real(); }

void DensityMatrix::validate(double hermitian_tol, double trace_tol, double eigen_tol) const {
  if (!values_.allFinite()) throw NumericalError("density matrix has non-finite entries");
  if (const double h = hermiticity_residual(); h > hermitian_tol) {
    throw NumericalError("density matrix not Hermitian (residual " + std::to_string(h) + ")");
  }
  if (const double t = trace_error(); t > trace_tol) {
    throw NumericalError("density matrix trace error " + std::to_string(t));
  }
  if (const double e = min_eigenvalue(); e < -eigen_tol) {
    throw NumericalError("density matrix has negative eigenvalue " + std::to_string(e));
  }
}

void ReservoirConfig::validate() const {
  if (n < 1 || d_pad < 1) throw ConfigError("reservoir: dimensions must be positive");
  if (n % d_pad != 0) {
    throw ConfigError("reservoir: N = " + std::to_string(n) +
                      " is not a multiple of the padded input dimension " +
                      std::to_string(d_pad));
  }
  if (!(tau > 0.0)) throw ConfigError("reservoir: tau must be positive");
  if (!std::isfinite(g)) throw ConfigError("reservoir: g must be finite");
}

ComplexVector amplitude_encode(std::span<const double> x, int d_pad) {
  if (static_cast<int>(x.size()) > d_pad) {
    throw ConfigError("amplitude_encode: input longer than padded dimension");
  }
  double norm2 = 0.0;
  for (double v : x) norm2 += v * v;
  const double norm = std::sqrt(norm2);
  if (!(norm > 1e-12)) throw DomainError("amplitude_encode: input norm too small to encode");
  ComplexVector s = ComplexVector::Zero(d_pad);
  for (std::size_t i = 0; i < x.size(); ++i) s[static_cast<Eigen::Index>(i)] = x[i] / norm;
  return s;
}

ComplexMatrix partial_trace_first(const ComplexMatrix& rho, int d) {
  const Eigen::Index n = rho.rows();
  if (d < 1 || rho.cols() != n || n % d != 0) {
    throw ConfigError("partial_trace_first: dimension " + std::to_string(n) +
                      " not divisible by " + std::to_string(d));
  }
  const Eigen::Index k = n / d;
  ComplexMatrix out = ComplexMatrix::Zero(k, k);
  for (Eigen::Index m = 0; m < d; ++m) out += rho.block(m * k, m * k, k, k);
  return out;
}

ComplexMatrix partial_trace_second(const ComplexMatrix& rho, int d) {
  const Eigen::Index n = rho.rows();
  if (d < 1 || rho.cols() != n || n % d != 0) {
    throw ConfigError("partial_trace_second: dimension " + std::to_string(n) +
                      " not divisible by " + std::to_string(d));
  }
  const Eigen::Index k = n / d;
  ComplexMatrix out(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) out(a, b) = rho.block(a * k, b * k, k, k).trace();
  }
  return out;
}

DensityMatrix inject(const DensityMatrix& rho, std::span<const double> x,
                     const ReservoirConfig& cfg) {
  if (rho.dim() != cfg.n) throw ConfigError("inject: state dimension does not match config");
  const ComplexVector s = amplitude_encode(x, cfg.d_pad);
  const ComplexMatrix input = s * s.adjoint();
  const ComplexMatrix rest = partial_trace_first(rho.values(), cfg.d_pad);
  return DensityMatrix(Eigen::kroneckerProduct(input, rest).eval());
}

namespace {

template <typename Matrix>
ComplexMatrix propagator_impl(const Matrix& h, double tau) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("evolve: eigendecomposition failed");
  const ComplexVector phases =
      (es.eigenvalues().template cast<complex>() * complex(0.0, -tau)).array().exp();
  const ComplexMatrix v = es.eigenvectors().template cast<complex>();
  return v * phases.asDiagonal() * v.adjoint();
}

}  // namespace

ComplexMatrix propagator(const HamiltonianMatrix& h, double tau) {
  return propagator_impl(h, tau);
}

ComplexMatrix propagator(const ComplexMatrix& h, double tau) {
  return propagator_impl(h, tau);
}

DensityMatrix evolve(const DensityMatrix& rho, const HamiltonianMatrix& h, double tau) {
  if (h.rows() != rho.dim() || h.cols() != rho.dim()) {
    throw ConfigError("evolve: Hamiltonian size does not match state");
  }
  const ComplexMatrix u = propagator(h, tau);
  return DensityMatrix(u * rho.values() * u.adjoint());
}

DensityMatrix evolve(const DensityMatrix& rho, const ComplexMatrix& h, double tau) {
  if (h.rows() != rho.dim() || h.cols() != rho.dim()) {
    throw ConfigError("evolve: Hamiltonian size does not match state");
  }
  const ComplexMatrix u = propagator(h, tau);
  return DensityMatrix(u * rho.values() * u.adjoint());
}

DensityMatrix reservoir_step(const DensityMatrix& rho, std::span<const double> x,
                             const HamiltonianMatrix& h0, const ReservoirConfig& cfg) {
  const DensityMatrix injected = inject(rho, x, cfg);
  const RealVector pops = injected.populations();
  const HamiltonianMatrix h = effective_hamiltonian(h0, as_span(pops), cfg.g);
  const DensityMatrix evolved = evolve(injected, h, cfg.tau);

  ComplexMatrix cleaned = 0.5 * (evolved.values() + evolved.values().adjoint());
  cleaned /= cleaned.trace().real();
  DensityMatrix out(std::move(cleaned));
  if (!out.values().allFinite()) throw NumericalError("reservoir_step: non-finite state");
  if (cfg.check_spectrum) {
    if (const double e = out.min_eigenvalue(); e < -1e-9) {
      throw NumericalError("reservoir_step: negative eigenvalue " + std::to_string(e));
    }
  }
  return out;
}

StateDiagnostics diagnose(const DensityMatrix& rho, long step) {
  return {step, rho.values().trace().real(), rho.min_eigenvalue(), rho.purity()};
}

void write_diagnostics_header(std::ostream& os) { os << "step,trace,min_eig,purity\n"; }

void write_diagnostics_row(std::ostream& os, const StateDiagnostics& d) {
  os << d.step << ',' << format_double(d.trace) << ',' << format_double(d.min_eig) << ','
     << format_double(d.purity) << '\n';
}

}  // namespace qrc
