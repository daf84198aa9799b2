#include "vibron/experiments.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "vibron/dynamics.hpp"
#include "vibron/observables.hpp"

namespace vibron {

namespace {

constexpr double eigenstate_tol = 1e-8;
constexpr double capture_floor = 1.0 - 1e-8;

const Vector& atom_minus() {
  static const Vector v = (Vector(2) << 0.0, 1.0).finished();
  return v;
}

double binomial_coefficient(Index n, Index k) {
  double b = 1.0;
  for (Index j = 1; j <= k; ++j)
    b *= static_cast<double>(n - k + j) / static_cast<double>(j);
  return b;
}

}  // namespace

// ------------------------------ state specs ----------------------------

StateSpec StateSpec::fock_levels(std::vector<Index> occupations) {
  StateSpec spec;
  spec.kind = StateKind::fock;
  spec.occupations = std::move(occupations);
  return spec;
}

StateSpec StateSpec::coherent(std::vector<Complex> alphas) {
  StateSpec spec;
  spec.kind = StateKind::coherent;
  spec.alphas = std::move(alphas);
  return spec;
}

StateSpec StateSpec::su2(Complex tau, Index n0) {
  StateSpec spec;
  spec.kind = StateKind::su2_coherent;
  spec.tau = tau;
  spec.n0 = n0;
  return spec;
}

StateSpec StateSpec::superposition(std::vector<SuperpositionTerm> terms) {
  StateSpec spec;
  spec.kind = StateKind::superposition;
  spec.terms = std::move(terms);
  return spec;
}

StateSpec StateSpec::product(std::vector<ModeFactor> factors) {
  StateSpec spec;
  spec.kind = StateKind::product;
  spec.factors = std::move(factors);
  return spec;
}

StateVector build_state(const StateSpec& spec, const ModeLayout& layout) {
  switch (spec.kind) {
    case StateKind::fock:
      return fock_state(layout, spec.occupations);
    case StateKind::coherent:
      return coherent_state(layout, spec.alphas);
    case StateKind::su2_coherent:
      return su2_coherent_state(spec.tau, spec.n0, layout);
    case StateKind::superposition: {
      if (spec.terms.empty())
        throw std::invalid_argument("build_state: superposition needs components");
      Vector amps = Vector::Zero(layout.vib_dim());
      for (const auto& term : spec.terms)
        amps(layout.vib_index(term.occupations)) += term.weight;
      return StateVector::normalized(layout, Subspace::vibrational, amps);
    }
    case StateKind::product: {
      if (static_cast<Index>(spec.factors.size()) != layout.mode_count())
        throw std::invalid_argument("build_state: one product factor per mode required");
      Vector amps = Vector::Ones(1);
      double capture = 1.0;
      for (Index m = 0; m < layout.mode_count(); ++m) {
        const ModeFactor& factor = spec.factors[static_cast<std::size_t>(m)];
        const Index dim = layout.mode_dim(layout.mode(m));
        Vector single;
        if (factor.is_fock) {
          if (factor.level < 0 || factor.level >= dim)
            throw std::invalid_argument("build_state: fock level outside the mode basis");
          single = Vector::Zero(dim);
          single(factor.level) = 1.0;
        } else {
          single = coherent_amplitudes(factor.alpha, dim);
          capture *= single.squaredNorm();
        }
        amps = Eigen::kroneckerProduct(amps, single).eval();
      }
      if (capture < capture_floor) {
        std::ostringstream os;
        os << "build_state: product state keeps only " << capture
           << " of its weight in the truncated basis";
        throw truncation_error(os.str());
      }
      return StateVector::normalized(layout, Subspace::vibrational, amps);
    }
  }
  throw std::logic_error("build_state: unhandled state kind");
}

StateVector su2_coherent_state(Complex tau, Index n0, const ModeLayout& layout) {
  if (!layout.has_mode(Mode::x) || !layout.has_mode(Mode::y))
    throw std::invalid_argument("su2_coherent_state: modes x and y required");
  if (n0 < 0) throw std::invalid_argument("su2_coherent_state: n0 must be non-negative");
  if (n0 >= layout.mode_dim(Mode::x) || n0 >= layout.mode_dim(Mode::y))
    throw std::invalid_argument("su2_coherent_state: n0 must fit below both truncations");

  Vector amps = Vector::Zero(layout.vib_dim());
  Complex tau_power(1.0, 0.0);
  for (Index k = 0; k <= n0; ++k) {
    amps(layout.vib_index({k, n0 - k})) =
        std::sqrt(binomial_coefficient(n0, k)) * tau_power;
    tau_power *= tau;
  }
  return StateVector::normalized(layout, Subspace::vibrational, amps);
}

// ------------------------------- rabi scan -----------------------------

std::vector<RabiPoint> rabi_scan(const StateVector& eigenstate,
                                 const HermitianOperator& observable, double gamma,
                                 const std::vector<double>& t_grid) {
  if (eigenstate.subspace() != Subspace::vibrational)
    throw std::invalid_argument("rabi_scan: initial state must be vibrational");
  const double mean = expectation(eigenstate, observable);
  const double off =
      (observable.matrix() * eigenstate.amplitudes() - mean * eigenstate.amplitudes())
          .norm();
  if (off > eigenstate_tol)
    throw std::invalid_argument("rabi_scan: state is not an observable eigenstate");

  const StateVector start = attach_atom(eigenstate, atom_minus());
  std::vector<RabiPoint> table;
  table.reserve(t_grid.size());
  for (const double t : t_grid) {
    if (!(t >= 0.0) || !std::isfinite(t))
      throw std::invalid_argument("rabi_scan: times must be non-negative");
    RabiPoint point;
    point.t = t;
    point.p_plus = atom_branch(evolve_vibronic(start, observable, gamma, t), 0).population;
    table.push_back(point);
  }
  return table;
}

// ---------------------------- estimator sweep --------------------------

std::vector<SweepRow> estimator_sweep(const StateVector& psi_vibr,
                                      const HermitianOperator& observable, SweepAxis axis,
                                      const std::vector<double>& grid,
                                      const ProtocolConfig& cfg) {
  if (grid.empty()) throw std::invalid_argument("estimator_sweep: empty grid");
  const double truth = expectation(psi_vibr, observable);

  std::vector<SweepRow> table;
  table.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    ProtocolConfig point_cfg = cfg;
    point_cfg.rng_seed = cfg.rng_seed + k;
    const double value = grid[k];
    switch (axis) {
      case SweepAxis::t:
        point_cfg.t = value;
        break;
      case SweepAxis::gamma:
        point_cfg.gamma = value;
        break;
      case SweepAxis::shots: {
        const double rounded = std::nearbyint(value);
        if (!(value >= 0.0) || rounded != value)
          throw std::invalid_argument("estimator_sweep: shot counts must be whole");
        point_cfg.shots = static_cast<Index>(rounded);
        break;
      }
    }
    const EstimateResult r = estimate_mean(psi_vibr, observable, point_cfg);
    SweepRow row;
    row.axis_value = value;
    row.estimate = r.estimate;
    row.true_mean = truth;
    row.bias = std::abs(r.estimate - truth);
    row.bias_bound = r.bias_bound;
    row.standard_error = r.standard_error;
    table.push_back(row);
  }
  return table;
}

// ------------------------------ parity demo ----------------------------

ParityReport parity_demo(const ParityDemoConfig& cfg) {
  if (cfg.n0 < 1) throw std::invalid_argument("parity_demo: n0 must be at least 1");
  const Index dim = cfg.mode_dim > 0 ? cfg.mode_dim : cfg.n0 + 2;
  if (dim <= cfg.n0)
    throw std::invalid_argument("parity_demo: mode dimension must exceed n0");
  if (cfg.scan_steps < 2)
    throw std::invalid_argument("parity_demo: scan needs at least two points");
  if (!(cfg.scan_start >= 0.0) || !(cfg.scan_stop > cfg.scan_start))
    throw std::invalid_argument("parity_demo: scan interval must be increasing");
  if (!std::isfinite(cfg.gamma_jc))
    throw std::invalid_argument("parity_demo: gamma_jc must be finite");

  const ModeLayout layout({Mode::x, Mode::y}, {dim, dim});
  const StateVector initial =
      attach_atom(su2_coherent_state(cfg.tau, cfg.n0, layout), atom_minus());
  const HermitianOperator hamiltonian = two_boson_jc_hamiltonian(cfg.gamma_jc, layout);
  const HermitianOperator excitation = two_boson_excitation(layout);
  const HermitianOperator cxy = correlation(Mode::x, Mode::y, layout);
  const HermitianOperator cxy_full = tensor_embed(cxy);
  const HermitianOperator cxy_sq_full(
      layout, Subspace::composite, cxy_full.matrix() * cxy_full.matrix());
  const double excitation_start = expectation(initial, excitation);

  ParityReport report;
  report.n0 = cfg.n0;
  report.points.reserve(static_cast<std::size_t>(cfg.scan_steps));

  const double step =
      (cfg.scan_stop - cfg.scan_start) / static_cast<double>(cfg.scan_steps - 1);
  for (Index k = 0; k < cfg.scan_steps; ++k) {
    const double t = cfg.scan_start + static_cast<double>(k) * step;
    const StateVector evolved = evolve_generic(initial, hamiltonian, t);

    ParityScanPoint point;
    point.time = t;
    point.direct_cxy = expectation(evolved, cxy_full);
    point.cxy_squared = expectation(evolved, cxy_sq_full);
    point.excitation_drift =
        std::abs(expectation(evolved, excitation) - excitation_start);

    const AtomBranch plus = atom_branch(evolved, 0);
    const AtomBranch minus = atom_branch(evolved, 1);
    const AtomBranch& dominant = plus.population >= minus.population ? plus : minus;
    point.branch_population = dominant.population;
    const StateVector branch = StateVector::normalized(layout, Subspace::vibrational,
                                                       dominant.vib_amplitudes);
    point.branch_cxy = expectation(branch, cxy);

    ProtocolConfig overlay = cfg.measurement;
    overlay.rng_seed = cfg.measurement.rng_seed + static_cast<std::uint64_t>(k);
    const EstimateResult indirect = estimate_mean(branch, cxy, overlay);
    point.indirect_estimate = indirect.estimate;
    point.indirect_stderr = indirect.standard_error;

    report.max_excitation_drift =
        std::max(report.max_excitation_drift, point.excitation_drift);
    report.points.push_back(point);
  }

  // A clear negative excursion decides the verdict; otherwise the scan
  // maximum does.  The threshold scales with the +N₀ ceiling so rounding
  // noise around zero can never masquerade as a negative dip.
  const auto minimum = std::min_element(
      report.points.begin(), report.points.end(),
      [](const auto& a, const auto& b) { return a.direct_cxy < b.direct_cxy; });
  const auto maximum = std::max_element(
      report.points.begin(), report.points.end(),
      [](const auto& a, const auto& b) { return a.direct_cxy < b.direct_cxy; });
  const bool negative_dip =
      minimum->direct_cxy < -1e-9 * static_cast<double>(cfg.n0);
  const auto& extreme = negative_dip ? *minimum : *maximum;
  report.extreme_value = extreme.direct_cxy;
  report.extreme_time = extreme.time;
  report.parity_sign = report.extreme_value > 0.0 ? 1 : -1;
  const int expected = cfg.n0 % 2 == 1 ? 1 : -1;
  report.sign_matches_parity = report.parity_sign == expected;
  return report;
}

// --------------------------- raman residual study ----------------------

RamanStudy raman_reduction_study(const ModeLayout& layout,
                                 const std::vector<double>& eta_grid, Index block_n) {
  if (eta_grid.size() < 2)
    throw std::invalid_argument("raman_reduction_study: slope fit needs two eta values");

  RamanStudy study;
  study.rows.reserve(eta_grid.size());
  double sum_x = 0.0;
  double sum_y = 0.0;
  double sum_xx = 0.0;
  double sum_xy = 0.0;
  for (const double eta : eta_grid) {
    RamanConfig cfg;
    cfg.eta = eta;
    cfg.block_n = block_n;
    RamanStudyRow row;
    row.eta = eta;
    row.residual = raman_reduction_residual(cfg, layout);
    study.rows.push_back(row);

    const double x = std::log(eta);
    const double y = std::log(row.residual);
    sum_x += x;
    sum_y += y;
    sum_xx += x * x;
    sum_xy += x * y;
  }
  const double n = static_cast<double>(eta_grid.size());
  study.fitted_slope = (n * sum_xy - sum_x * sum_y) / (n * sum_xx - sum_x * sum_x);
  return study;
}

}  // namespace vibron
