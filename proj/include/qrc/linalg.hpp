#pragma once

#include <complex>
#include <span>

#include <Eigen/Dense>

namespace qrc {

using complex = std::complex<double>;

using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

// Row-major storage keeps a T x d trajectory contiguous per sample.
using StateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> as_span(const RealVector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

inline Eigen::Map<const RealVector> as_vector(std::span<const double> s) {
  return {s.data(), static_cast<Eigen::Index>(s.size())};
}

}  // namespace qrc
