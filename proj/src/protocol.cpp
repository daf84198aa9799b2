#include "vibron/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "vibron/dynamics.hpp"
#include "vibron/observables.hpp"

namespace vibron {

namespace {

constexpr double preparation_tol = 1e-10;
constexpr double zone_slack = 1e-9;  // relative cushion for exact-boundary areas
constexpr double default_gamma = 1e4;

double spectral_radius(const HermitianOperator& op) {
  const auto& values = op.eigensystem().values;
  return std::max(std::abs(values(0)), std::abs(values(values.size() - 1)));
}

Index sample_binomial(Index shots, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Index successes = 0;
  for (Index k = 0; k < shots; ++k) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u < p) ++successes;
  }
  return successes;
}

void check_alpha_max(double alpha_max) {
  if (!(alpha_max >= 0.0) || !std::isfinite(alpha_max))
    throw std::invalid_argument("protocol: alpha_max must be non-negative");
}

void check_zone_inputs(double alpha_max, double zone_half_width) {
  check_alpha_max(alpha_max);
  if (!(zone_half_width > 0.0 && zone_half_width < M_PI / 2.0))
    throw std::invalid_argument("protocol: zone half-width must lie in (0, pi/2)");
}

}  // namespace

Calibration calibrate(double alpha_max, double zone_half_width,
                      std::optional<double> gamma_fixed) {
  check_zone_inputs(alpha_max, zone_half_width);
  if (!(alpha_max > 0.0))
    throw std::invalid_argument("protocol: calibration needs a positive alpha_max");
  if (gamma_fixed && !(*gamma_fixed > 0.0))
    throw std::invalid_argument("protocol: fixed gamma must be positive");
  Calibration cal;
  cal.gamma = gamma_fixed.value_or(default_gamma);
  cal.t = zone_half_width / (2.0 * cal.gamma * alpha_max);
  return cal;
}

StateVector prepare(const StateVector& psi_vibr) {
  if (psi_vibr.subspace() != Subspace::vibrational)
    throw std::invalid_argument("prepare: input must be a vibrational state");
  // The θ = π/4 carrier pulse takes |−⟩ to (|−⟩ + i|+⟩)/√2.  Tensoring that
  // target directly keeps the two branch weights bit-for-bit equal, which a
  // rounded cos/sin pair at π/4 would not.
  const Vector minus_y = (Vector(2) << Complex(0.0, M_SQRT1_2), Complex(M_SQRT1_2, 0.0))
                             .finished();
  const StateVector rotated = attach_atom(psi_vibr, minus_y);

  const HermitianOperator sigma_y(
      rotated.layout(), Subspace::composite,
      tensor_embed(pauli_y(), {}, true, rotated.layout(), Subspace::composite));
  if (std::abs(expectation(rotated, sigma_y) + 1.0) > preparation_tol)
    throw std::runtime_error("prepare: failed to reach the lower sigma-y eigenstate");
  return rotated;
}

Readout readout(const StateVector& state, Index shots, std::uint64_t rng_seed) {
  if (state.subspace() != Subspace::composite)
    throw std::invalid_argument("readout: state must be composite");
  if (shots < 0) throw std::invalid_argument("readout: shot count must be non-negative");

  const double p_plus = std::clamp(atom_branch(state, 0).population, 0.0, 1.0);
  const double p_minus = std::clamp(atom_branch(state, 1).population, 0.0, 1.0);

  Readout result;
  if (shots == 0) {
    // The symmetric difference keeps balanced branches at exactly zero.
    result.sigma_z_mean = p_plus - p_minus;
    return result;
  }
  result.shots_plus = sample_binomial(shots, p_plus, rng_seed);
  result.shots_minus = shots - result.shots_plus;
  result.sigma_z_mean =
      static_cast<double>(result.shots_plus - result.shots_minus) /
      static_cast<double>(shots);
  return result;
}

double linearization_bound(double alpha_max, double gamma, double t) {
  check_alpha_max(alpha_max);
  const double phase = 2.0 * std::abs(gamma) * t;
  if (!(phase > 0.0)) throw std::invalid_argument("protocol: 2|gamma|t must be positive");
  const double x = phase * alpha_max;
  return (x - std::sin(x)) / phase;
}

double cubic_linearization_bound(double alpha_max, double gamma, double t) {
  const double phase = 2.0 * std::abs(gamma) * t;
  if (!(phase > 0.0)) throw std::invalid_argument("protocol: 2|gamma|t must be positive");
  const double x = phase * alpha_max;
  return x * x * x / (6.0 * phase);
}

double verify_finite_spectrum(const StateVector& psi_vibr,
                              const HermitianOperator& observable, double alpha_max) {
  if (psi_vibr.subspace() != observable.subspace() ||
      !(psi_vibr.layout() == observable.layout()))
    throw std::invalid_argument("verify_finite_spectrum: state/observable mismatch");
  if (!(alpha_max >= 0.0))
    throw std::invalid_argument("verify_finite_spectrum: alpha_max must be non-negative");

  const Eigensystem& sys = observable.eigensystem();
  double tail = 0.0;
  for (Index k = 0; k < sys.values.size(); ++k) {
    if (std::abs(sys.values(k)) > alpha_max)
      tail += std::norm(sys.vectors.col(k).dot(psi_vibr.amplitudes()));
  }
  return tail;
}

EstimateResult estimate_mean(const StateVector& psi_vibr, const HermitianOperator& observable,
                             const ProtocolConfig& cfg) {
  if (observable.subspace() != Subspace::vibrational)
    throw std::invalid_argument("estimate_mean: observable must be vibrational");
  if (!(psi_vibr.layout() == observable.layout()))
    throw std::invalid_argument("estimate_mean: layout mismatch");
  if (!std::isfinite(cfg.gamma) || cfg.gamma == 0.0)
    throw std::invalid_argument("estimate_mean: gamma must be finite and nonzero");
  if (!(cfg.t > 0.0) || !std::isfinite(cfg.t))
    throw std::invalid_argument("estimate_mean: t must be positive");
  if (cfg.shots < 0) throw std::invalid_argument("estimate_mean: shots must be non-negative");

  const double alpha_max = cfg.window.alpha_max.value_or(spectral_radius(observable));
  check_zone_inputs(alpha_max, cfg.window.zone_half_width);

  const double phase = 2.0 * std::abs(cfg.gamma) * cfg.t;
  EstimateResult result;
  result.pulse_area = phase * alpha_max;

  const bool violated =
      result.pulse_area > cfg.window.zone_half_width * (1.0 + zone_slack);
  if (violated && !cfg.allow_zone_violation) {
    std::ostringstream os;
    os << "estimate_mean: pulse area " << result.pulse_area
       << " exceeds the linearizable zone " << cfg.window.zone_half_width;
    throw zone_violation(os.str());
  }
  result.unsafe = violated;

  const StateVector evolved =
      evolve_vibronic(prepare(psi_vibr), observable, cfg.gamma, cfg.t);
  const Readout counts = readout(evolved, cfg.shots, cfg.rng_seed);

  result.sigma_z_mean = counts.sigma_z_mean;
  result.shots_plus = counts.shots_plus;
  result.shots_minus = counts.shots_minus;
  result.estimate = -result.sigma_z_mean / (2.0 * cfg.gamma * cfg.t);
  if (cfg.shots > 0) {
    result.standard_error =
        std::sqrt((1.0 - result.sigma_z_mean * result.sigma_z_mean) /
                  static_cast<double>(cfg.shots)) /
        phase;
  }
  result.bias_bound = linearization_bound(alpha_max, cfg.gamma, cfg.t);
  return result;
}

}  // namespace vibron
