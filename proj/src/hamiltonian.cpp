#include "qrc/hamiltonian.hpp"

#include <cmath>
#include <string>

#include "qrc/error.hpp"
#include "qrc/rng.hpp"

namespace qrc {

namespace {

std::size_t triangle(std::size_t n) { return n * (n - 1) / 2; }

}  // namespace

int active_dimension(std::size_t q_k) {
  if (q_k < 1) throw ConfigError("active_dimension: need at least one feature");
  std::size_t n = 2;
  while (triangle(n) < q_k) ++n;
  return static_cast<int>(n);
}

int default_total_dimension(int n_active, int d_pad) {
  if (n_active < 1 || d_pad < 1) throw ConfigError("default_total_dimension: bad sizes");
  for (long n = 1; n <= (1L << 20); n <<= 1) {
    if (n >= n_active && n % d_pad == 0) return static_cast<int>(n);
  }
  throw ConfigError("default_total_dimension: no power of two is a multiple of " +
                    std::to_string(d_pad));
}

HamiltonianTemplate HamiltonianTemplate::create(std::size_t q_k, RealVector diagonal,
                                                std::optional<double> fill_constant,
                                                int n_total, int active_offset) {
  HamiltonianTemplate t;
  t.q_k_ = q_k;
  t.n_active_ = active_dimension(q_k);
  t.n_total_ = n_total == 0 ? t.n_active_ : n_total;
  if (t.n_total_ < t.n_active_) {
    throw ConfigError("hamiltonian: total dimension " + std::to_string(t.n_total_) +
                      " smaller than active block " + std::to_string(t.n_active_));
  }
  t.active_offset_ = active_offset < 0 ? (t.n_total_ - t.n_active_) / 2 : active_offset;
  if (t.active_offset_ + t.n_active_ > t.n_total_) {
    throw ConfigError("hamiltonian: active block does not fit at offset " +
                      std::to_string(t.active_offset_));
  }
  if (diagonal.size() != t.n_active_) {
    throw ConfigError("hamiltonian: diagonal has " + std::to_string(diagonal.size()) +
                      " entries, active block needs " + std::to_string(t.n_active_));
  }
  t.diagonal_ = std::move(diagonal);

  const bool exact = triangle(t.n_active_) == q_k;
  if (!fill_constant && !exact) {
    throw ConfigError("hamiltonian: fill_constant required, " + std::to_string(q_k) +
                      " features leave " + std::to_string(triangle(t.n_active_) - q_k) +
                      " slots empty");
  }
  t.fill_constant_ = fill_constant.value_or(0.0);

  const int off = t.active_offset_;
  for (int r = 0; r < t.n_active_; ++r) {
    for (int c = r + 1; c < t.n_active_; ++c) t.slots_.emplace_back(off + r, off + c);
  }
  return t;
}

HamiltonianMatrix assemble_h0(std::span<const double> features,
                              const HamiltonianTemplate& tmpl) {
  if (features.size() != tmpl.q_k()) {
    throw ConfigError("assemble_h0: got " + std::to_string(features.size()) +
                      " features, template expects " + std::to_string(tmpl.q_k()));
  }
  HamiltonianMatrix h = HamiltonianMatrix::Zero(tmpl.n_total(), tmpl.n_total());
  for (std::size_t i = 0; i < tmpl.slot_count(); ++i) {
    const auto [r, c] = tmpl.slot(i);
    const double v = i < features.size() ? features[i] : tmpl.fill_constant();
    h(r, c) = v;
    h(c, r) = v;
  }
  for (int i = 0; i < tmpl.n_active(); ++i) {
    h(tmpl.active_offset() + i, tmpl.active_offset() + i) = tmpl.diagonal()[i];
  }
  return h;
}

HamiltonianMatrix effective_hamiltonian(const HamiltonianMatrix& h0,
                                        std::span<const double> rho_diag, double g) {
  if (static_cast<Eigen::Index>(rho_diag.size()) != h0.rows()) {
    throw ConfigError("effective_hamiltonian: population vector has wrong size");
  }
  double total = 0.0;
  for (double p : rho_diag) {
    if (!(p >= -1e-10 && p <= 1.0 + 1e-10)) {
      throw DomainError("effective_hamiltonian: population outside [0, 1]");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-8) {
    throw DomainError("effective_hamiltonian: populations do not sum to 1");
  }
  HamiltonianMatrix h = h0;
  for (std::size_t i = 0; i < rho_diag.size(); ++i) {
    h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) -= g * rho_diag[i];
  }
  return h;
}

RealVector lorenz_diagonal() {
  RealVector d(8);
  d << 200, 400, 600, 800, 800, 600, 400, 200;
  return d;
}

RealVector doublescroll_diagonal() { return RealVector::Constant(12, 4000.0); }

RealVector random_diagonal(int n, double lo, double hi, std::uint64_t seed) {
  const CounterRng rng(seed, /*stream=*/1);
  RealVector d(n);
  for (int i = 0; i < n; ++i) d[i] = rng.uniform(static_cast<std::uint64_t>(i), lo, hi);
  return d;
}

}  // namespace qrc
