// The measurement protocol: pulse-area calibration, preparation of the
// lower σ̂y eigenstate, vibronic interaction, population readout with
// optional shot noise, and the linearized mean-value estimator with its
// bias and noise budget.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "vibron/hilbert.hpp"

namespace vibron {

// Requested pulse area outside the configured linearizable zone.
class zone_violation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Spectral support assumption for the estimator: the state only weighs
// eigenvalues of the observable inside [−alpha_max, alpha_max], and the
// accumulated phase 2γt·alpha_max must stay inside the zone where
// sin x ≈ x holds to the accepted bias.
struct SpectralWindow {
  // Unset: derived as the observable's spectral radius, the worst case
  // inside the truncated basis.
  std::optional<double> alpha_max;
  double zone_half_width = 0.4;
};

struct ProtocolConfig {
  double gamma = 1e4;  // coupling strength, rad/s (sign-aware)
  double t = 1e-6;     // interaction time, s
  Index shots = 0;     // 0 = noiseless expectation readout
  SpectralWindow window;
  std::uint64_t rng_seed = 0;
  bool allow_zone_violation = false;
};

struct EstimateResult {
  double estimate = 0.0;      // units of the observable
  double sigma_z_mean = 0.0;  // in [−1, 1]
  Index shots_plus = 0;
  Index shots_minus = 0;
  double standard_error = 0.0;  // 0 in noiseless mode
  double bias_bound = 0.0;      // linearization envelope, units of the observable
  double pulse_area = 0.0;      // 2|γ|t·alpha_max
  bool unsafe = false;          // ran despite a zone violation
};

struct Calibration {
  double gamma = 0.0;
  double t = 0.0;
};

// Picks (γ, t) with 2γt·alpha_max equal to the zone half-width; γ defaults
// to the typical trap coupling 1e4 rad/s unless fixed by the caller.
Calibration calibrate(double alpha_max, double zone_half_width,
                      std::optional<double> gamma_fixed = std::nullopt);

// |ψ_vibr⟩ ↦ |ψ_vibr⟩ ⊗ |−⟩_y with |−⟩_y = (|−⟩ + i|+⟩)/√2, the state a
// θ = π/4 carrier pulse produces from |−⟩; checks that the prepared atom
// has ⟨σ̂y⟩ = −1 within 1e−10.
StateVector prepare(const StateVector& psi_vibr);

struct Readout {
  double sigma_z_mean = 0.0;
  Index shots_plus = 0;
  Index shots_minus = 0;
};

// Population measurement of the atomic factor.  shots = 0 returns the
// exact P₊ − P₋; otherwise draws shots Bernoulli(P₊) samples, each taken
// as (next mt19937_64 output ≫ 11)·2⁻⁵³ < P₊, so counts are reproducible
// across platforms for a fixed seed, and reports (N₊ − N₋)/shots.
Readout readout(const StateVector& state, Index shots, std::uint64_t rng_seed);

// Worst-case magnitude of the discarded nonlinear series,
// (x − sin x)/(2|γ|t) with x = 2|γ|t·alpha_max.
double linearization_bound(double alpha_max, double gamma, double t);

// Looser textbook envelope x³/(6·2|γ|t) for the same remainder.
double cubic_linearization_bound(double alpha_max, double gamma, double t);

// Probability weight of the state outside the observable's
// [−alpha_max, alpha_max] spectral window.
double verify_finite_spectrum(const StateVector& psi_vibr, const HermitianOperator& observable,
                              double alpha_max);

// Full protocol pass: prepare, evolve under γÂσ̂x for t, read out, and map
// the population imbalance through the estimator −⟨σ̂z⟩/(2γt).
EstimateResult estimate_mean(const StateVector& psi_vibr, const HermitianOperator& observable,
                             const ProtocolConfig& cfg);

}  // namespace vibron
