#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrc/linalg.hpp"
#include "qrc/rng.hpp"

namespace qrc::testing {

// Random mixed state A A^dagger / tr, entries of A uniform in [-1, 1) + i[-1, 1).
inline ComplexMatrix random_density(int n, std::uint64_t seed) {
  const CounterRng rng(seed, 77);
  ComplexMatrix a(n, n);
  std::uint64_t c = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double re = rng.uniform(c++, -1.0, 1.0);
      const double im = rng.uniform(c++, -1.0, 1.0);
      a(i, j) = {re, im};
    }
  }
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

inline RealMatrix random_real(int rows, int cols, std::uint64_t seed) {
  const CounterRng rng(seed, 91);
  RealMatrix m(rows, cols);
  std::uint64_t c = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(c++, -1.0, 1.0);
  }
  return m;
}

// Composite index (a, i) -> a * dim_b + i; sum over a of rho[(a,i),(a,j)].
inline ComplexMatrix partial_trace_oracle(const ComplexMatrix& rho, int dim_a) {
  const int dim_b = static_cast<int>(rho.rows()) / dim_a;
  ComplexMatrix out = ComplexMatrix::Zero(dim_b, dim_b);
  for (int i = 0; i < dim_b; ++i) {
    for (int j = 0; j < dim_b; ++j) {
      complex s = 0.0;
      for (int a = 0; a < dim_a; ++a) s += rho(a * dim_b + i, a * dim_b + j);
      out(i, j) = s;
    }
  }
  return out;
}

// exp(M) by scaling and squaring around a truncated Taylor series.
inline ComplexMatrix taylor_expm(const ComplexMatrix& m, int terms = 12) {
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.25) ++squarings;
  const ComplexMatrix a = m / std::pow(2.0, squarings);
  ComplexMatrix term = ComplexMatrix::Identity(m.rows(), m.cols());
  ComplexMatrix sum = term;
  for (int k = 1; k <= terms; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

// Gell-Mann lambda_1 .. lambda_8, written out entry by entry.
inline std::vector<ComplexMatrix> gell_mann_table() {
  const complex i(0.0, 1.0);
  const double r3 = 1.0 / std::sqrt(3.0);
  std::vector<ComplexMatrix> g(8, ComplexMatrix::Zero(3, 3));
  g[0] << 0, 1, 0,
          1, 0, 0,
          0, 0, 0;
  g[1] << 0, -i, 0,
          i, 0, 0,
          0, 0, 0;
  g[2] << 1, 0, 0,
          0, -1, 0,
          0, 0, 0;
  g[3] << 0, 0, 1,
          0, 0, 0,
          1, 0, 0;
  g[4] << 0, 0, -i,
          0, 0, 0,
          i, 0, 0;
  g[5] << 0, 0, 0,
          0, 0, 1,
          0, 1, 0;
  g[6] << 0, 0, 0,
          0, 0, -i,
          0, i, 0;
  g[7] << r3, 0, 0,
          0, r3, 0,
          0, 0, -2 * r3;
  return g;
}

// W = (R^T R + ridge I)^{-1} R^T Y, solved via LDL^T of the normal matrix.
inline RealMatrix ridge_normal_equations(const RealMatrix& r, const RealMatrix& y, double ridge) {
  const RealMatrix a =
      r.transpose() * r + ridge * RealMatrix::Identity(r.cols(), r.cols());
  return a.ldlt().solve(r.transpose() * y);
}

// Symbolic 8x8 Lorenz H0: digits are diagonal values, C the constant,
// lower-case letters x_k, y_k, z_k and upper-case x_{k-1}, y_{k-1}, z_{k-1};
// a cell with several letters is their product.
inline const std::array<std::array<const char*, 8>, 8>& lorenz_h0_symbols() {
  static const std::array<std::array<const char*, 8>, 8> table{{
      {"200", "C", "x", "y", "z", "X", "Y", "Z"},
      {"C", "400", "xx", "xy", "xz", "xX", "xY", "xZ"},
      {"x", "xx", "600", "yy", "yz", "yX", "yY", "yZ"},
      {"y", "xy", "yy", "800", "zz", "zX", "zY", "zZ"},
      {"z", "xz", "yz", "zz", "800", "XX", "XY", "XZ"},
      {"X", "xX", "yX", "zX", "XX", "600", "YY", "YZ"},
      {"Y", "xY", "yY", "zY", "XY", "YY", "400", "ZZ"},
      {"Z", "xZ", "yZ", "zZ", "XZ", "YZ", "ZZ", "200"},
  }};
  return table;
}

// Evaluates a symbol from lorenz_h0_symbols() for given probe values.
inline double eval_symbol(const std::string& sym, double c, const std::array<double, 6>& v) {
  if (!sym.empty() && std::isdigit(static_cast<unsigned char>(sym[0]))) return std::stod(sym);
  const std::string names = "xyzXYZ";
  double out = 1.0;
  for (char ch : sym) out *= ch == 'C' ? c : v[names.find(ch)];
  return out;
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("qrc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace qrc::testing
