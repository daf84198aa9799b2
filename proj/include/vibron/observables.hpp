// Mode observables (ladder, number, angular momentum,
// correlation, quadratures) and the vibronic coupling Hamiltonians: the
// generic Â⊗σ̂x coupling plus the Raman, sideband and two-boson
// Jaynes-Cummings realizations.  Hamiltonians absorb ħ: all rates are in
// rad/s and H has units of rad/s throughout.
#pragma once

#include "vibron/hilbert.hpp"

namespace vibron {

// --------------------------- atomic matrices ---------------------------
//
// Basis {|+⟩, |−⟩} with σ̂z = diag(+1, −1).  σ̂y = i(|−⟩⟨+| − |+⟩⟨−|), the
// right-handed companion of σ̂x and σ̂z: the state reached from |−⟩ by the
// preparation pulse, (|−⟩ + i|+⟩)/√2, is its −1 eigenstate.

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix sigma_plus();  // |+⟩⟨−|

// ---------------------------- mode operators ---------------------------
//
// All of these act on the vibrational subspace of the layout, identity on
// every mode they do not touch.

Matrix annihilation(Mode m, const ModeLayout& layout);
Matrix creation(Mode m, const ModeLayout& layout);

HermitianOperator number_operator(Mode m, const ModeLayout& layout);
// Σ_m n̂_m over every layout mode.
HermitianOperator total_number_operator(const ModeLayout& layout);

// L̂z = i(â_x â_y† − â_x† â_y); requires modes x and y with equal dims.
// The circular superposition (|1,0⟩ + i|0,1⟩)/√2 has eigenvalue +1.
HermitianOperator angular_momentum_z(const ModeLayout& layout);

// Ĉ_ij = â_i â_j† + â_j â_i†  (equals Q̂_iQ̂_j + P̂_iP̂_j on truncation-safe
// blocks).
HermitianOperator correlation(Mode i, Mode j, const ModeLayout& layout);

// Q̂ = (â + â†)/√2, P̂ = i(â† − â)/√2.
HermitianOperator position_quadrature(Mode m, const ModeLayout& layout);
HermitianOperator momentum_quadrature(Mode m, const ModeLayout& layout);

// ------------------------- coupling Hamiltonians -----------------------

// H = γ Â ⊗ σ̂x for a vibrational Hermitian Â; γ in rad/s.
HermitianOperator coupling_hamiltonian(const HermitianOperator& observable, double gamma);

// Raman pair coupling in the rotated-mode basis â± = (â_x ± â_y)/√2:
//   H = Γ [f(η, n̂₊) − f(η, n̂₋)] ⊗ σ̂x,   f(η, n) = e^{−η²/2} L_n(η²).
// To leading order in η this is −Γη² Ĉ_xy ⊗ σ̂x.
struct RamanConfig {
  double eta = 0.1;        // Lamb-Dicke parameter, must lie in (0, 1)
  double rabi_rate = 1.0;  // two-photon Rabi rate Γ, rad/s, positive
  Index block_n = 2;       // total-excitation block used by reduction checks
};

double laguerre(Index n, double x);
double carrier_nonlinearity(double eta, Index n);  // f(η, n)

HermitianOperator raman_cxy_hamiltonian(const RamanConfig& cfg, const ModeLayout& layout);
// Effective coupling rate of the leading-order reduction (sign included).
double raman_effective_gamma(const RamanConfig& cfg);
// R(η) = ‖H/Γ + η² Ĉ_xy ⊗ σ̂x‖_max restricted to the N = block_n subspace.
double raman_reduction_residual(const RamanConfig& cfg, const ModeLayout& layout);

// Red/blue sideband pair on mode x:
//   H = γ₁(â_x|+⟩⟨−| + â_x†|−⟩⟨+|) + γ₂(â_x†|+⟩⟨−| + â_x|−⟩⟨+|);
// at γ₁ = γ₂ = γ this is exactly γ(â_x + â_x†) ⊗ σ̂x.
HermitianOperator sideband_qx_hamiltonian(double gamma1, double gamma2,
                                          const ModeLayout& layout);

// Bimodal two-boson Jaynes-Cummings coupling:
//   H = γ(â_x â_y|+⟩⟨−| + â_x†â_y†|−⟩⟨+|).
HermitianOperator two_boson_jc_hamiltonian(double gamma, const ModeLayout& layout);
// Conserved bookkeeping operator n̂_x + n̂_y + 2σ̂₊σ̂₋ of that coupling.
HermitianOperator two_boson_excitation(const ModeLayout& layout);

}  // namespace vibron
