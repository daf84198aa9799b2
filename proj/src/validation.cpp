#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "vibron/cli.hpp"
#include "vibron/dynamics.hpp"
#include "vibron/experiments.hpp"
#include "vibron/hilbert.hpp"
#include "vibron/observables.hpp"
#include "vibron/protocol.hpp"

namespace vibron {

namespace {

ValidationCheck residual_check(std::string name, double residual, double tolerance) {
  ValidationCheck check;
  check.name = std::move(name);
  check.passed = residual <= tolerance;
  std::ostringstream os;
  os << "max deviation " << residual << " (tolerance " << tolerance << ")";
  check.detail = os.str();
  return check;
}

ValidationCheck interval_check(std::string name, const std::string& quantity, double low,
                               double high, double required_low, double required_high) {
  ValidationCheck check;
  check.name = std::move(name);
  check.passed = low >= required_low && high <= required_high;
  std::ostringstream os;
  os << quantity << " within [" << low << ", " << high << "] (required ["
     << required_low << ", " << required_high << "])";
  check.detail = os.str();
  return check;
}

Matrix random_hermitian(Index dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(dim, dim);
  for (Index r = 0; r < dim; ++r)
    for (Index c = 0; c < dim; ++c) m(r, c) = Complex(u(rng), u(rng));
  return m + Matrix(m.adjoint());
}

StateVector random_vibrational_state(const ModeLayout& layout, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector amps(layout.vib_dim());
  for (Index i = 0; i < amps.size(); ++i) amps(i) = Complex(u(rng), u(rng));
  return StateVector::normalized(layout, Subspace::vibrational, amps);
}

// Pulse-probability law for observable eigenstates across Fock levels 0..5.
ValidationCheck check_rabi_law() {
  const ModeLayout layout({Mode::x}, {8});
  const HermitianOperator n_op = number_operator(Mode::x, layout);
  std::vector<double> grid;
  for (int k = 0; k < 100; ++k) grid.push_back(2.0 * k / 99.0);

  double worst = 0.0;
  for (Index n = 0; n <= 5; ++n) {
    const std::vector<RabiPoint> scan =
        rabi_scan(fock_state(layout, {n}), n_op, 1.0, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double s = std::sin(static_cast<double>(n) * grid[k]);
      worst = std::max(worst, std::abs(scan[k].p_plus - s * s));
    }
  }
  return residual_check("eigenstate-rabi-law", worst, 1e-10);
}

// Conjugated σ̂z against its closed cos/sin decomposition for random
// couplings.
ValidationCheck check_heisenberg_identity() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> duration(0.0, 2.0);

  double worst = 0.0;
  for (int draw = 0; draw < 50; ++draw) {
    const Index dim = 2 + draw % 7;
    const ModeLayout layout({Mode::x}, {dim});
    const HermitianOperator a_op(layout, Subspace::vibrational,
                                 random_hermitian(dim, rng));
    const double t = duration(rng);

    const Matrix propagator = unitary_exp(coupling_hamiltonian(a_op, 1.0), -t);
    const Matrix sigma_z_emb =
        tensor_embed(pauli_z(), {}, true, layout, Subspace::composite);
    const Matrix conjugated = propagator.adjoint() * sigma_z_emb * propagator;
    const Matrix closed = heisenberg_sigma_z(a_op, 1.0, t).matrix();
    worst = std::max(worst, (conjugated - closed).cwiseAbs().maxCoeff());
  }
  return residual_check("heisenberg-readout-identity", worst, 1e-9);
}

// Full prepare/evolve/readout pass against −⟨sin(2γÂt)⟩ on random states.
ValidationCheck check_readout_law() {
  const ModeLayout layout({Mode::x, Mode::y}, {3, 3});
  const std::vector<HermitianOperator> observables = {
      number_operator(Mode::x, layout), angular_momentum_z(layout),
      correlation(Mode::x, Mode::y, layout), position_quadrature(Mode::x, layout)};
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> duration(0.0, 2.0);

  double worst = 0.0;
  for (const HermitianOperator& a_op : observables) {
    for (int draw = 0; draw < 5; ++draw) {
      const StateVector psi = random_vibrational_state(layout, rng);
      const double t = duration(rng);
      const double measured =
          readout(evolve_vibronic(prepare(psi), a_op, 1.0, t), 0, 0).sigma_z_mean;
      const HermitianOperator sine =
          hermitian_function(a_op, [t](double x) { return std::sin(2.0 * t * x); });
      worst = std::max(worst, std::abs(measured + expectation(psi, sine)));
    }
  }
  return residual_check("interaction-readout-law", worst, 1e-9);
}

struct BiasSample {
  double bias = 0.0;
  double bound = 0.0;
};

std::vector<BiasSample> bias_suite(double t) {
  const ModeLayout layout({Mode::x, Mode::y}, {12, 12});
  const std::vector<StateVector> states = {
      fock_state(layout, {3, 0}),
      coherent_state(layout, {Complex(0.9, 0.0), Complex(0.0, 0.5)}),
      StateVector::normalized(layout, Subspace::vibrational,
                              fock_state(layout, {0, 0}).amplitudes() +
                                  Complex(0.0, 1.0) *
                                      fock_state(layout, {3, 1}).amplitudes()),
      fock_state(layout, {2, 2})};
  const std::vector<HermitianOperator> observables = {
      total_number_operator(layout), angular_momentum_z(layout),
      correlation(Mode::x, Mode::y, layout), position_quadrature(Mode::x, layout)};

  ProtocolConfig cfg;
  cfg.gamma = 1e4;
  cfg.t = t;
  cfg.window.alpha_max = 20.0;

  std::vector<BiasSample> samples;
  for (const StateVector& psi : states)
    for (const HermitianOperator& a_op : observables) {
      const EstimateResult r = estimate_mean(psi, a_op, cfg);
      BiasSample sample;
      sample.bias = std::abs(r.estimate - expectation(psi, a_op));
      sample.bound = r.bias_bound;
      samples.push_back(sample);
    }
  return samples;
}

// Linearization envelope in the reference regime (γ=1e4 rad/s, t=1e−6 s,
// window 20), plus the closed-form coherent-state oracle.
ValidationCheck check_bias_bound() {
  double margin = -std::numeric_limits<double>::infinity();
  for (const BiasSample& sample : bias_suite(1e-6))
    margin = std::max(margin, sample.bias - sample.bound);

  const ModeLayout single({Mode::x}, {32});
  const StateVector coherent = coherent_state(single, {Complex(1.0, 0.0)});
  ProtocolConfig cfg;
  cfg.gamma = 1e4;
  cfg.t = 1e-6;
  cfg.window.alpha_max = 20.0;
  const double theta = 2.0 * cfg.gamma * cfg.t;
  const double oracle =
      std::exp(std::cos(theta) - 1.0) * std::sin(std::sin(theta)) / theta;
  const double estimate =
      estimate_mean(coherent, number_operator(Mode::x, single), cfg).estimate;
  const double oracle_deviation = std::abs(estimate - oracle);

  ValidationCheck check;
  check.name = "estimator-bias-bound";
  check.passed = margin <= 0.0 && oracle_deviation <= 1e-10;
  std::ostringstream os;
  os << "worst bias-minus-bound margin " << margin
     << " (must be <= 0); coherent-oracle deviation " << oracle_deviation
     << " (tolerance 1e-10)";
  check.detail = os.str();
  return check;
}

// Halving the pulse duration must shrink every resolvable bias nearly
// fourfold.
ValidationCheck check_quadratic_scaling() {
  const std::vector<BiasSample> full = bias_suite(1e-6);
  const std::vector<BiasSample> half = bias_suite(5e-7);

  double low = std::numeric_limits<double>::infinity();
  double high = 0.0;
  for (std::size_t k = 0; k < full.size(); ++k) {
    if (full[k].bias <= 1e-12) continue;
    const double ratio = full[k].bias / half[k].bias;
    low = std::min(low, ratio);
    high = std::max(high, ratio);
  }
  ValidationCheck check =
      interval_check("quadratic-bias-scaling", "bias ratios", low, high, 3.0, 5.0);
  if (!(low <= high)) check.passed = false;
  return check;
}

ValidationCheck check_sideband_construction() {
  const ModeLayout layout({Mode::x}, {8});
  const Matrix matched = sideband_qx_hamiltonian(1.7, 1.7, layout).matrix();
  const Matrix ladder_sum = annihilation(Mode::x, layout) + creation(Mode::x, layout);
  const Matrix target = 1.7 * Eigen::kroneckerProduct(ladder_sum, pauli_x()).eval();
  const double worst = (matched - target).cwiseAbs().maxCoeff();
  return residual_check("matched-sideband-construction", worst, 1e-14);
}

// Rotating the space correlation by a quarter turn of L̂z yields the mode
// population imbalance on every complete total-excitation block.
ValidationCheck check_canonical_equivalence() {
  const ModeLayout layout({Mode::x, Mode::y}, {7, 7});
  const Matrix rotation = unitary_exp(angular_momentum_z(layout), M_PI / 4.0);
  const Matrix rotated = rotation * correlation(Mode::x, Mode::y, layout).matrix() *
                         rotation.adjoint();
  const Matrix imbalance = number_operator(Mode::x, layout).matrix() -
                           number_operator(Mode::y, layout).matrix();

  double worst = 0.0;
  for (Index n = 0; n <= 6; ++n) {
    const std::vector<Index> block = total_excitation_block(layout, n);
    worst = std::max(
        worst, submatrix(rotated - imbalance, block).cwiseAbs().maxCoeff());
  }
  return residual_check("canonical-equivalence", worst, 1e-9);
}

ValidationCheck check_raman_slope() {
  const ModeLayout layout({Mode::x, Mode::y}, {8, 8});
  const double slope =
      raman_reduction_study(layout, {0.2, 0.1, 0.05, 0.025}, 2).fitted_slope;
  return interval_check("lamb-dicke-reduction-slope", "fitted slope", slope, slope,
                        3.5, 4.5);
}

}  // namespace

std::vector<ValidationCheck> run_validation_checks() {
  return {check_rabi_law(),
          check_heisenberg_identity(),
          check_readout_law(),
          check_bias_bound(),
          check_quadratic_scaling(),
          check_sideband_construction(),
          check_canonical_equivalence(),
          check_raman_slope()};
}

}  // namespace vibron
