#include <doctest.h>

#include "qrc/error.hpp"
#include "qrc/tomography.hpp"
#include "support.hpp"

using namespace qrc;
using qrc::testing::max_abs;

TEST_CASE("d = 2 generators are the Pauli matrices") {
  const auto g = su_generators(2);
  REQUIRE(g.size() == 3);
  CHECK(g[0](0, 1) == complex(1.0));
  CHECK(g[1](0, 1) == complex(0.0, -1.0));
  CHECK(g[1](1, 0) == complex(0.0, 1.0));
  CHECK(g[2](0, 0) == complex(1.0));
  CHECK(g[2](1, 1) == complex(-1.0));
}

TEST_CASE("d = 3 generators match the Gell-Mann table exactly") {
  const auto got = su_generators(3);
  const auto table = testing::gell_mann_table();
  REQUIRE(got.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    INFO("lambda_" << i + 1);
    CHECK(max_abs(got[i] - table[i]) < 1e-15);
  }
}

TEST_CASE("generators are traceless, Hermitian and orthogonal") {
  for (int d = 2; d <= 16; ++d) {
    const OperatorBasis basis(d);
    REQUIRE(basis.size() == static_cast<std::size_t>(d * d));
    double worst = 0.0;
    for (std::size_t a = 0; a < basis.size(); ++a) {
      if (a > 0) {
        CHECK(std::abs(basis[a].trace()) < 1e-12);
        CHECK(basis.entries(a).size() <= static_cast<std::size_t>(d));
      }
      CHECK(max_abs(basis[a] - basis[a].adjoint()) == 0.0);
      for (std::size_t b = 1; b < basis.size(); ++b) {
        if (a == 0) continue;
        const complex ip = (basis[a] * basis[b]).trace();
        worst = std::max(worst, std::abs(ip - complex(a == b ? 2.0 : 0.0)));
      }
    }
    INFO("d = " << d);
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("measurement agrees with dense traces") {
  const OperatorBasis basis(4);
  const ComplexMatrix rho = testing::random_density(4, 11);
  const RealVector r = measure_all(rho, basis);
  CHECK(r[0] == doctest::Approx(1.0));
  for (std::size_t o = 0; o < basis.size(); ++o) {
    CHECK(std::abs((basis[o] * rho).trace() - complex(r[static_cast<Eigen::Index>(o)])) < 1e-13);
  }
}

TEST_CASE("maximally mixed state has only the identity expectation") {
  const OperatorBasis basis(8);
  const RealVector r = measure_all(ComplexMatrix::Identity(8, 8) / 8.0, basis);
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r.tail(63).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("reconstruct inverts measure_all") {
  for (int d : {2, 3, 4, 8, 16}) {
    const OperatorBasis basis(d);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const ComplexMatrix rho = testing::random_density(d, seed);
      const RealVector r = measure_all(rho, basis);
      CHECK(max_abs(reconstruct(as_span(r), basis) - rho) <= 1e-10);
    }
  }
}

TEST_CASE("bloch coefficients of a pure state saturate the purity bound") {
  const int d = 4;
  const OperatorBasis basis(d);
  ComplexVector psi(d);
  psi << complex(0.5, 0.1), 0.3, complex(-0.2, 0.7), 0.4;
  psi.normalize();
  const RealVector r = measure_all(ComplexMatrix(psi * psi.adjoint()), basis);
  const RealVector alpha = bloch_coefficients(as_span(r), d);
  CHECK(alpha[0] == 1.0);
  CHECK(alpha.tail(alpha.size() - 1).squaredNorm() == doctest::Approx(d * (d - 1) / 2.0));

  const RealVector mixed = measure_all(testing::random_density(d, 4), basis);
  CHECK(bloch_coefficients(as_span(mixed), d).tail(15).squaredNorm() < d * (d - 1) / 2.0);
}

TEST_CASE("tomography error paths") {
  const OperatorBasis basis(3);
  CHECK_THROWS_AS(su_generators(1), ConfigError);
  CHECK_THROWS_AS(measure_all(ComplexMatrix::Identity(4, 4), basis), ConfigError);
  ComplexMatrix skew = ComplexMatrix::Identity(3, 3) / 3.0;
  skew(0, 1) = 0.2;
  CHECK_THROWS_AS(measure_all(skew, basis), NumericalError);
  RealVector r = RealVector::Zero(9);
  CHECK_THROWS_AS(reconstruct(as_span(r), basis), DomainError);
  RealVector short_r = RealVector::Ones(4);
  CHECK_THROWS_AS(reconstruct(as_span(short_r), basis), ConfigError);
}
