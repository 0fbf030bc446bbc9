#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qrc/linalg.hpp"

namespace qrc {

// Real symmetric; Hermitian because every entry is real.
using HamiltonianMatrix = RealMatrix;

// Smallest N with (N-1)(N-2)/2 < q_k <= N(N-1)/2.
int active_dimension(std::size_t q_k);

// Smallest power of two >= n_active that is a multiple of the padded input
// dimension; the tensor split N = d' * (N / d') needs the divisibility.
int default_total_dimension(int n_active, int d_pad);

// Where each feature lands in H0: feature i goes to the i-th upper-triangle
// slot of the active block in row-major order, unused slots take the fill
// constant, and everything outside the active block stays zero.
class HamiltonianTemplate {
 public:
  // n_total = 0 means n_active; active_offset < 0 means centred,
  // (n_total - n_active) / 2. fill_constant may be omitted only when q_k
  // fills the active upper triangle exactly (it then defaults to 0).
  static HamiltonianTemplate create(std::size_t q_k, RealVector diagonal,
                                    std::optional<double> fill_constant = std::nullopt,
                                    int n_total = 0, int active_offset = -1);

  int n_total() const { return n_total_; }
  int n_active() const { return n_active_; }
  int active_offset() const { return active_offset_; }
  std::size_t q_k() const { return q_k_; }
  const RealVector& diagonal() const { return diagonal_; }
  double fill_constant() const { return fill_constant_; }

  // Absolute (row, col) of feature `i`, row < col.
  std::pair<int, int> slot(std::size_t i) const { return slots_.at(i); }
  std::size_t slot_count() const { return slots_.size(); }

 private:
  HamiltonianTemplate() = default;

  int n_total_ = 0;
  int n_active_ = 0;
  int active_offset_ = 0;
  std::size_t q_k_ = 0;
  RealVector diagonal_;
  double fill_constant_ = 0.0;
  std::vector<std::pair<int, int>> slots_;  // all active upper-triangle slots
};

HamiltonianMatrix assemble_h0(std::span<const double> features,
                              const HamiltonianTemplate& tmpl);

// H = H0 - g * Diag(rho_diag).
HamiltonianMatrix effective_hamiltonian(const HamiltonianMatrix& h0,
                                        std::span<const double> rho_diag, double g);

// Diagonal presets: 200, 400, 600, 800, 800, 600, 400, 200 for the Lorenz
// layout and a flat 4000 for the double-scroll layout.
RealVector lorenz_diagonal();
RealVector doublescroll_diagonal();

// Uniform on [lo, hi) per level, drawn from the counter-based generator.
RealVector random_diagonal(int n, double lo, double hi, std::uint64_t seed);

}  // namespace qrc
