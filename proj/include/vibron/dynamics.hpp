// Exact unitary dynamics: the vibronic coupling propagator, atom-only
// carrier pulses, generic Hermitian evolution and the Heisenberg-picture
// image of σ̂z.  All propagators are built from spectral decompositions of
// the vibrational observable, never by exponentiating the composite matrix.
#pragma once

#include <optional>

#include "vibron/hilbert.hpp"

namespace vibron {

enum class PulseKind { carrier_x, vibronic };

// One step of a pulse sequence: either an atom-only rotation about x or a
// vibronic coupling interval driven by a vibrational observable.
class PulseSpec {
 public:
  // Rotation exp(iθσ̂x) of the atomic factor; θ in [0, 2π).  θ = π/4 takes
  // |−⟩ to the σ̂y eigenstate with eigenvalue −1.
  static PulseSpec carrier(double theta);

  // Coupling exp(−iγÂσ̂x t); requires a vibrational observable, finite γ
  // and a non-negative duration.
  static PulseSpec vibronic(HermitianOperator observable, double gamma, double t);

  PulseKind kind() const { return kind_; }
  double angle() const;                    // carrier pulses only
  const HermitianOperator& observable() const;  // vibronic pulses only
  double gamma() const;
  double duration() const;

 private:
  PulseSpec() = default;

  PulseKind kind_ = PulseKind::carrier_x;
  double angle_ = 0.0;
  std::optional<HermitianOperator> observable_;
  double gamma_ = 0.0;
  double duration_ = 0.0;
};

// Propagates a composite state under exp(−iγÂσ̂x t) using
// U = cos(γÂt) ⊗ I − i sin(γÂt) ⊗ σ̂x; Â must be vibrational and share the
// state's layout.
StateVector evolve_vibronic(const StateVector& state, const HermitianOperator& observable,
                            double gamma, double t);

// Applies exp(iθσ̂x) to the atomic factor of a composite state.
StateVector carrier_pulse(const StateVector& state, double theta);

// Propagates under exp(−iĤt) for any Hermitian Ĥ on the state's subspace.
StateVector evolve_generic(const StateVector& state, const HermitianOperator& hamiltonian,
                           double t);

// Dispatches on the pulse kind.
StateVector apply_pulse(const StateVector& state, const PulseSpec& pulse);

// Heisenberg image of σ̂z under the vibronic coupling:
// cos(2γÂt) ⊗ σ̂z + sin(2γÂt) ⊗ σ̂y.
HermitianOperator heisenberg_sigma_z(const HermitianOperator& observable, double gamma,
                                     double t);

}  // namespace vibron
