#include "qrc/tomography.hpp"

#include <cmath>
#include <string>

#include "qrc/error.hpp"

namespace qrc {

std::vector<ComplexMatrix> su_generators(int d) {
  if (d < 2) throw ConfigError("su_generators: dimension must be >= 2");
  std::vector<ComplexMatrix> out(static_cast<std::size_t>(d) * d - 1);
  auto elementary = [d](int l, int j) {
    // 1-based E_l^j: single 1 at row j, column l.
    ComplexMatrix e = ComplexMatrix::Zero(d, d);
    e(j - 1, l - 1) = 1.0;
    return e;
  };
  // out[i] holds lambda_{i+1}.
  for (int l = 2; l <= d; ++l) {
    for (int j = 1; j < l; ++j) {
      const ComplexMatrix elj = elementary(l, j);
      const ComplexMatrix ejl = elementary(j, l);
      out[(l - 1) * (l - 1) + 2 * (j - 1) - 1] = elj + ejl;
      out[(l - 1) * (l - 1) + 2 * j - 1 - 1] = complex(0.0, -1.0) * (elj - ejl);
    }
    const int n = l - 1;
    ComplexMatrix gamma = ComplexMatrix::Zero(d, d);
    for (int k = 1; k <= n; ++k) gamma += elementary(k, k);
    gamma -= static_cast<double>(n) * elementary(n + 1, n + 1);
    out[l * l - 1 - 1] = std::sqrt(2.0 / (n * (n + 1.0))) * gamma;
  }
  return out;
}

OperatorBasis::OperatorBasis(int d) : dim_(d) {
  operators_.push_back(ComplexMatrix::Identity(d, d));
  for (auto& g : su_generators(d)) operators_.push_back(std::move(g));
  sparse_.resize(operators_.size());
  for (std::size_t i = 0; i < operators_.size(); ++i) {
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        if (operators_[i](r, c) != complex(0.0)) sparse_[i].push_back({r, c, operators_[i](r, c)});
      }
    }
  }
}

RealVector measure_all(const ComplexMatrix& rho, const OperatorBasis& basis) {
  if (rho.rows() != basis.dim() || rho.cols() != basis.dim()) {
    throw ConfigError("measure_all: state dimension " + std::to_string(rho.rows()) +
                      " does not match basis dimension " + std::to_string(basis.dim()));
  }
  RealVector r(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t o = 0; o < basis.size(); ++o) {
    complex acc = 0.0;
    for (const auto& e : basis.entries(o)) acc += e.value * rho(e.col, e.row);
    if (std::abs(acc.imag()) > 1e-8) {
      throw NumericalError("measure_all: imaginary expectation " + std::to_string(acc.imag()) +
                           " for operator " + std::to_string(o));
    }
    r[static_cast<Eigen::Index>(o)] = acc.real();
  }
  return r;
}

ComplexMatrix reconstruct(std::span<const double> r, const OperatorBasis& basis) {
  if (r.size() != basis.size()) throw ConfigError("reconstruct: coefficient count mismatch");
  if (std::abs(r[0] - 1.0) > 1e-8) throw DomainError("reconstruct: r[0] must be 1");
  const int d = basis.dim();
  ComplexMatrix rho = ComplexMatrix::Identity(d, d) / static_cast<double>(d);
  for (std::size_t m = 1; m < basis.size(); ++m) {
    for (const auto& e : basis.entries(m)) rho(e.row, e.col) += 0.5 * r[m] * e.value;
  }
  return rho;
}

RealVector bloch_coefficients(std::span<const double> r, int d) {
  RealVector alpha(static_cast<Eigen::Index>(r.size()));
  alpha[0] = 1.0;
  for (std::size_t m = 1; m < r.size(); ++m) alpha[static_cast<Eigen::Index>(m)] = 0.5 * d * r[m];
  return alpha;
}

}  // namespace qrc
