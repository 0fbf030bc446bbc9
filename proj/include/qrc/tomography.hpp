#pragma once

#include <span>
#include <vector>

#include "qrc/linalg.hpp"
#include "qrc/reservoir.hpp"

namespace qrc {

// The d*d traceless Hermitian SU(d) generators, tr(l_a l_b) = 2 delta_ab.
//
// Enumeration, with l > j (1-based) and E_l^j having its 1 at row j, col l:
//   index (l-1)^2 + 2(j-1)  symmetric      E_l^j + E_j^l
//   index (l-1)^2 + 2j - 1  antisymmetric  -i (E_l^j - E_j^l)
//   index l^2 - 1           diagonal       sqrt(2/(n(n+1))) (E_1^1 + ... + E_n^n - n E_{n+1}^{n+1}), n = l-1
// For d = 2 this is (sigma_x, sigma_y, sigma_z); for d = 3 the usual
// Gell-Mann lambda_1 ... lambda_8.
std::vector<ComplexMatrix> su_generators(int d);

/// Complete measurement set: the identity at index 0 followed by the
/// d^2 - 1 generators.
class OperatorBasis {
 public:
  explicit OperatorBasis(int d);

  int dim() const { return dim_; }
  std::size_t size() const { return operators_.size(); }
  const ComplexMatrix& operator[](std::size_t i) const { return operators_[i]; }
  const std::vector<ComplexMatrix>& operators() const { return operators_; }

  struct Entry {
    int row;
    int col;
    complex value;
  };
  // Non-zero entries of operator i; each generator has at most d of them.
  std::span<const Entry> entries(std::size_t i) const { return sparse_[i]; }

 private:
  int dim_;
  std::vector<ComplexMatrix> operators_;
  std::vector<std::vector<Entry>> sparse_;
};

// r[o] = tr(lambda_o rho). Throws NumericalError if any imaginary residue
// exceeds 1e-8.
RealVector measure_all(const ComplexMatrix& rho, const OperatorBasis& basis);
inline RealVector measure_all(const DensityMatrix& rho, const OperatorBasis& basis) {
  return measure_all(rho.values(), basis);
}

// rho = I/d + (1/2) sum_{m>=1} r[m] lambda_m, the inverse of measure_all.
// Equivalent to rho = (1/d) sum_m alpha_m lambda_m with alpha_0 = 1 and
// alpha_m = (d/2) r[m]. Positivity is not enforced.
ComplexMatrix reconstruct(std::span<const double> r, const OperatorBasis& basis);

// alpha_m = (d/2) r[m] for m >= 1 (alpha_0 = 1).
RealVector bloch_coefficients(std::span<const double> r, int d);

}  // namespace qrc
