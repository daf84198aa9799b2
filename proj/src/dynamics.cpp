#include "vibron/dynamics.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <stdexcept>

#include "vibron/observables.hpp"

namespace vibron {

namespace {

const Complex I1(0.0, 1.0);

constexpr double unitarity_tol = 1e-10;

using AtomBlockMap = Eigen::Map<const Eigen::Matrix<Complex, 2, Eigen::Dynamic>>;

// The composite layout stores the atomic index innermost, so a composite
// amplitude vector is, column-major, a 2×(vib dim) matrix with one column
// per vibrational basis state.
AtomBlockMap atom_blocks(const StateVector& state) {
  return AtomBlockMap(state.amplitudes().data(), 2, state.dim() / 2);
}

StateVector repack(const StateVector& reference,
                   const Eigen::Matrix<Complex, 2, Eigen::Dynamic>& blocks) {
  const Vector flat =
      Eigen::Map<const Vector>(blocks.data(), blocks.size());
  if (std::abs(flat.norm() - 1.0) > unitarity_tol)
    throw std::runtime_error("dynamics: propagator lost unitarity");
  return StateVector::normalized(reference.layout(), reference.subspace(), flat);
}

void require_composite(const StateVector& state, const char* where) {
  if (state.subspace() != Subspace::composite)
    throw std::invalid_argument(std::string(where) + ": state must be composite");
}

}  // namespace

// -------------------------------- PulseSpec ----------------------------

PulseSpec PulseSpec::carrier(double theta) {
  if (!(theta >= 0.0 && theta < 2.0 * M_PI))
    throw std::invalid_argument("pulse: carrier angle must lie in [0, 2π)");
  PulseSpec spec;
  spec.kind_ = PulseKind::carrier_x;
  spec.angle_ = theta;
  return spec;
}

PulseSpec PulseSpec::vibronic(HermitianOperator observable, double gamma, double t) {
  if (observable.subspace() != Subspace::vibrational)
    throw std::invalid_argument("pulse: vibronic observable must be vibrational");
  if (!std::isfinite(gamma)) throw std::invalid_argument("pulse: gamma not finite");
  if (!(t >= 0.0)) throw std::invalid_argument("pulse: duration must be non-negative");
  PulseSpec spec;
  spec.kind_ = PulseKind::vibronic;
  spec.observable_ = std::move(observable);
  spec.gamma_ = gamma;
  spec.duration_ = t;
  return spec;
}

double PulseSpec::angle() const {
  if (kind_ != PulseKind::carrier_x)
    throw std::logic_error("pulse: angle is defined for carrier pulses only");
  return angle_;
}

const HermitianOperator& PulseSpec::observable() const {
  if (!observable_) throw std::logic_error("pulse: no observable on a carrier pulse");
  return *observable_;
}

double PulseSpec::gamma() const {
  if (kind_ != PulseKind::vibronic)
    throw std::logic_error("pulse: gamma is defined for vibronic pulses only");
  return gamma_;
}

double PulseSpec::duration() const {
  if (kind_ != PulseKind::vibronic)
    throw std::logic_error("pulse: duration is defined for vibronic pulses only");
  return duration_;
}

// -------------------------------- evolution ----------------------------

StateVector evolve_vibronic(const StateVector& state, const HermitianOperator& observable,
                            double gamma, double t) {
  require_composite(state, "evolve_vibronic");
  if (observable.subspace() != Subspace::vibrational)
    throw std::invalid_argument("evolve_vibronic: observable must be vibrational");
  if (!(state.layout() == observable.layout()))
    throw std::invalid_argument("evolve_vibronic: layout mismatch");
  if (!std::isfinite(gamma) || !std::isfinite(t))
    throw std::invalid_argument("evolve_vibronic: gamma and t must be finite");

  const double scale = gamma * t;
  const Matrix cos_part =
      matrix_function(observable, [scale](double x) { return Complex(std::cos(scale * x)); });
  const Matrix sin_part =
      matrix_function(observable, [scale](double x) { return Complex(std::sin(scale * x)); });

  // (M ⊗ N)ψ on the 2×vib block matrix form is N·ψ·Mᵀ.
  const AtomBlockMap psi = atom_blocks(state);
  const Eigen::Matrix<Complex, 2, Eigen::Dynamic> blocks =
      psi * cos_part.transpose() - I1 * (pauli_x() * psi) * sin_part.transpose();
  return repack(state, blocks);
}

StateVector carrier_pulse(const StateVector& state, double theta) {
  require_composite(state, "carrier_pulse");
  const Complex c(std::cos(theta), 0.0);
  const Complex s(0.0, std::sin(theta));
  Matrix u(2, 2);  // exp(iθσ̂x)
  u << c, s, s, c;
  const Eigen::Matrix<Complex, 2, Eigen::Dynamic> blocks = u * atom_blocks(state);
  return repack(state, blocks);
}

StateVector evolve_generic(const StateVector& state, const HermitianOperator& hamiltonian,
                           double t) {
  if (state.subspace() != hamiltonian.subspace() ||
      !(state.layout() == hamiltonian.layout()))
    throw std::invalid_argument("evolve_generic: state and hamiltonian must share a space");
  if (!std::isfinite(t)) throw std::invalid_argument("evolve_generic: t must be finite");

  const Matrix u = matrix_function(
      hamiltonian, [t](double x) { return std::exp(Complex(0.0, -t * x)); });
  const Vector evolved = u * state.amplitudes();
  if (std::abs(evolved.norm() - 1.0) > unitarity_tol)
    throw std::runtime_error("dynamics: propagator lost unitarity");
  return StateVector::normalized(state.layout(), state.subspace(), evolved);
}

StateVector apply_pulse(const StateVector& state, const PulseSpec& pulse) {
  if (pulse.kind() == PulseKind::carrier_x) return carrier_pulse(state, pulse.angle());
  return evolve_vibronic(state, pulse.observable(), pulse.gamma(), pulse.duration());
}

HermitianOperator heisenberg_sigma_z(const HermitianOperator& observable, double gamma,
                                     double t) {
  if (observable.subspace() != Subspace::vibrational)
    throw std::invalid_argument("heisenberg_sigma_z: observable must be vibrational");
  const double scale = 2.0 * gamma * t;
  const Matrix cos_part =
      hermitian_function(observable, [scale](double x) { return std::cos(scale * x); })
          .matrix();
  const Matrix sin_part =
      hermitian_function(observable, [scale](double x) { return std::sin(scale * x); })
          .matrix();
  const Matrix image = Eigen::kroneckerProduct(cos_part, pauli_z()) +
                       Eigen::kroneckerProduct(sin_part, pauli_y());
  return HermitianOperator(observable.layout(), Subspace::composite, image);
}

}  // namespace vibron
