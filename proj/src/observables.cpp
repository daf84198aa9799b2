#include "vibron/observables.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

namespace vibron {

namespace {

const Complex I1(0.0, 1.0);

// Exactly Hermitian sum M + M†.
Matrix hermitian_pair(const Matrix& m) { return m + Matrix(m.adjoint()); }

// Exact entrywise symmetrization of an almost-Hermitian product.
Matrix symmetrized(const Matrix& m) { return 0.5 * (m + Matrix(m.adjoint())); }

Matrix ladder(Index dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (Index n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

HermitianOperator composite_with_sigma_x(const Matrix& vib_part, const ModeLayout& layout) {
  const Matrix h = Eigen::kroneckerProduct(vib_part, pauli_x());
  return HermitianOperator(layout, Subspace::composite, h);
}

}  // namespace

// --------------------------- atomic matrices ---------------------------

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, -I1, I1, 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix sigma_plus() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1;
  return m;
}

// ---------------------------- mode operators ---------------------------

Matrix annihilation(Mode m, const ModeLayout& layout) {
  return tensor_embed(ladder(layout.mode_dim(m)), {m}, false, layout, Subspace::vibrational);
}

Matrix creation(Mode m, const ModeLayout& layout) {
  return annihilation(m, layout).adjoint();
}

HermitianOperator number_operator(Mode m, const ModeLayout& layout) {
  const Index d = layout.mode_dim(m);
  Matrix n = Matrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return HermitianOperator(layout, Subspace::vibrational,
                           tensor_embed(n, {m}, false, layout, Subspace::vibrational));
}

HermitianOperator total_number_operator(const ModeLayout& layout) {
  Matrix sum = Matrix::Zero(layout.vib_dim(), layout.vib_dim());
  for (Index i = 0; i < layout.mode_count(); ++i)
    sum += number_operator(layout.mode(i), layout).matrix();
  return HermitianOperator(layout, Subspace::vibrational, sum);
}

HermitianOperator angular_momentum_z(const ModeLayout& layout) {
  if (!layout.has_mode(Mode::x) || !layout.has_mode(Mode::y))
    throw std::invalid_argument("angular_momentum_z: modes x and y required");
  if (layout.mode_dim(Mode::x) != layout.mode_dim(Mode::y))
    throw std::invalid_argument("angular_momentum_z: modes x and y must share a truncation");
  const Matrix p = annihilation(Mode::x, layout) * creation(Mode::y, layout);
  const Matrix lz = I1 * (p - Matrix(p.adjoint()));
  return HermitianOperator(layout, Subspace::vibrational, lz);
}

HermitianOperator correlation(Mode i, Mode j, const ModeLayout& layout) {
  if (i == j) throw std::invalid_argument("correlation: modes must differ");
  const Matrix p = annihilation(i, layout) * creation(j, layout);
  return HermitianOperator(layout, Subspace::vibrational, hermitian_pair(p));
}

HermitianOperator position_quadrature(Mode m, const ModeLayout& layout) {
  const Matrix a = annihilation(m, layout);
  return HermitianOperator(layout, Subspace::vibrational, hermitian_pair(a) / std::sqrt(2.0));
}

HermitianOperator momentum_quadrature(Mode m, const ModeLayout& layout) {
  const Matrix a = annihilation(m, layout);
  const Matrix p = I1 * (Matrix(a.adjoint()) - a) / std::sqrt(2.0);
  return HermitianOperator(layout, Subspace::vibrational, p);
}

// ------------------------- coupling Hamiltonians -----------------------

HermitianOperator coupling_hamiltonian(const HermitianOperator& observable, double gamma) {
  if (observable.subspace() != Subspace::vibrational)
    throw std::invalid_argument("coupling_hamiltonian: observable must be vibrational");
  if (!std::isfinite(gamma)) throw std::invalid_argument("coupling_hamiltonian: gamma not finite");
  return composite_with_sigma_x(gamma * observable.matrix(), observable.layout());
}

double laguerre(Index n, double x) {
  if (n < 0) throw std::invalid_argument("laguerre: order must be non-negative");
  double prev = 1.0;  // L_0
  if (n == 0) return prev;
  double cur = 1.0 - x;  // L_1
  for (Index k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double next = ((2.0 * kk + 1.0 - x) * cur - kk * prev) / (kk + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

double carrier_nonlinearity(double eta, Index n) {
  return std::exp(-0.5 * eta * eta) * laguerre(n, eta * eta);
}

namespace {

void check_raman_config(const RamanConfig& cfg) {
  if (!(cfg.eta > 0.0 && cfg.eta < 1.0))
    throw std::invalid_argument("raman: eta must lie in (0, 1)");
  if (!(cfg.rabi_rate > 0.0)) throw std::invalid_argument("raman: rabi_rate must be positive");
}

// Γ⁻¹·H restricted to the vibrational factor: W†[f(n̂_x) − f(n̂_y)]W with the
// rotated-mode basis change W = exp(iπ/4 L̂z).
Matrix raman_vibrational_part(const RamanConfig& cfg, const ModeLayout& layout) {
  const HermitianOperator lz = angular_momentum_z(layout);
  const Matrix w = unitary_exp(lz, M_PI / 4.0);

  const Index d = layout.mode_dim(Mode::x);
  Matrix f = Matrix::Zero(d, d);
  for (Index n = 0; n < d; ++n) f(n, n) = carrier_nonlinearity(cfg.eta, n);
  const Matrix fx = tensor_embed(f, {Mode::x}, false, layout, Subspace::vibrational);
  const Matrix fy = tensor_embed(f, {Mode::y}, false, layout, Subspace::vibrational);

  return symmetrized(w.adjoint() * (fx - fy) * w);
}

}  // namespace

HermitianOperator raman_cxy_hamiltonian(const RamanConfig& cfg, const ModeLayout& layout) {
  check_raman_config(cfg);
  return composite_with_sigma_x(cfg.rabi_rate * raman_vibrational_part(cfg, layout), layout);
}

double raman_effective_gamma(const RamanConfig& cfg) {
  check_raman_config(cfg);
  return -cfg.rabi_rate * cfg.eta * cfg.eta;
}

double raman_reduction_residual(const RamanConfig& cfg, const ModeLayout& layout) {
  check_raman_config(cfg);
  const Matrix difference =
      raman_vibrational_part(cfg, layout) +
      cfg.eta * cfg.eta * correlation(Mode::x, Mode::y, layout).matrix();
  const auto block = total_excitation_block(layout, cfg.block_n);
  if (block.empty()) throw std::invalid_argument("raman: block_n outside the truncated basis");
  // ‖M ⊗ σ̂x‖_max on the block equals ‖M‖_max on the block.
  return submatrix(difference, block).cwiseAbs().maxCoeff();
}

HermitianOperator sideband_qx_hamiltonian(double gamma1, double gamma2,
                                          const ModeLayout& layout) {
  if (!std::isfinite(gamma1) || !std::isfinite(gamma2))
    throw std::invalid_argument("sideband: rates must be finite");
  const Matrix ax = annihilation(Mode::x, layout);
  const Matrix red = Eigen::kroneckerProduct(ax, sigma_plus());
  const Matrix blue = Eigen::kroneckerProduct(Matrix(ax.adjoint()), sigma_plus());
  const Matrix h = gamma1 * hermitian_pair(red) + gamma2 * hermitian_pair(blue);
  return HermitianOperator(layout, Subspace::composite, h);
}

HermitianOperator two_boson_jc_hamiltonian(double gamma, const ModeLayout& layout) {
  if (!std::isfinite(gamma)) throw std::invalid_argument("two_boson_jc: gamma not finite");
  const Matrix pair = annihilation(Mode::x, layout) * annihilation(Mode::y, layout);
  const Matrix h = gamma * hermitian_pair(Eigen::kroneckerProduct(pair, sigma_plus()));
  return HermitianOperator(layout, Subspace::composite, h);
}

HermitianOperator two_boson_excitation(const ModeLayout& layout) {
  const Matrix nvib = number_operator(Mode::x, layout).matrix() +
                      number_operator(Mode::y, layout).matrix();
  const Matrix excited = sigma_plus() * sigma_plus().adjoint();  // |+⟩⟨+|
  const Matrix k = Eigen::kroneckerProduct(nvib, Matrix::Identity(2, 2)) +
                   2.0 * Eigen::kroneckerProduct(Matrix::Identity(layout.vib_dim(),
                                                                  layout.vib_dim()),
                                                 excited);
  return HermitianOperator(layout, Subspace::composite, k);
}

}  // namespace vibron
