// Truncated bosonic modes tensored with a two-level atom:
// layouts, state vectors, Hermitian operators with cached spectral
// decompositions, and the embedding/expectation/matrix-function primitives
// everything else is built from.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace vibron {

using Complex    = std::complex<double>;
using Matrix     = Eigen::MatrixXcd;
using Vector     = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index      = Eigen::Index;

// Thrown when a physical state loses more than the allowed norm to Fock
// truncation, or when a requested component lies outside the truncated basis.
class truncation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ------------------------------- modes ---------------------------------

enum class Mode { x, y, z };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& name);  // throws std::invalid_argument

// Which tensor factors an operator or state covers.  The composite space is
// the vibrational space (all modes) tensored with the two-level atom.
enum class Subspace { vibrational, composite };

// ------------------------------ ModeLayout -----------------------------
//
// Basis ordering convention, fixed across the library:
//
//   flat composite index = ((n_{m0}·d_1 + n_{m1})·d_2 + ...)·2 + a
//
// Vibrational Fock indices run in layout order with the first mode slowest;
// the atomic index a is innermost (fastest).  a = 0 is |+⟩ (σ̂z = +1),
// a = 1 is |−⟩.

class ModeLayout {
 public:
  static constexpr Index atom_levels      = 2;
  static constexpr Index default_dim_guard = 4096;

  ModeLayout() = default;  // atom-only layout, no vibrational modes
  ModeLayout(std::vector<Mode> modes, std::vector<Index> dims,
             Index dim_guard = default_dim_guard);

  Index mode_count() const { return static_cast<Index>(modes_.size()); }
  Mode mode(Index i) const { return modes_.at(static_cast<std::size_t>(i)); }
  Index mode_dim(Index i) const { return dims_.at(static_cast<std::size_t>(i)); }
  Index mode_dim(Mode m) const { return dims_.at(static_cast<std::size_t>(mode_index(m))); }
  bool has_mode(Mode m) const;
  Index mode_index(Mode m) const;  // throws std::invalid_argument if absent

  Index vib_dim() const;
  Index dim(Subspace s) const;

  // Flat vibrational index of a Fock occupation tuple (one entry per mode).
  Index vib_index(const std::vector<Index>& occupations) const;
  // Inverse of vib_index.
  std::vector<Index> occupations(Index vib_index) const;

  bool operator==(const ModeLayout& other) const;
  bool operator!=(const ModeLayout& other) const { return !(*this == other); }

 private:
  std::vector<Mode> modes_;
  std::vector<Index> dims_;
};

// All vibrational flat indices whose total occupation sums to n_total.
std::vector<Index> total_excitation_block(const ModeLayout& layout, Index n_total);

// Square restriction of a matrix to the listed row/column indices.
Matrix submatrix(const Matrix& m, const std::vector<Index>& indices);

// ----------------------------- Eigensystem -----------------------------

struct Eigensystem {
  RealVector values;  // ascending
  Matrix vectors;     // orthonormal columns, deterministic phases
};

// Full Hermitian eigendecomposition.  Eigenvalues ascend; each eigenvector's
// first non-negligible component is made real positive so repeated runs give
// identical output.  Throws std::runtime_error if the solver fails or the
// reconstruction/unitarity residual exceeds 1e-9.
Eigensystem spectral_decomposition(const Matrix& hermitian);

// --------------------------- HermitianOperator -------------------------

namespace detail {
struct EigensystemCache;
}

class HermitianOperator {
 public:
  // Validates squareness, the layout/subspace dimension, and Hermiticity
  // (max-norm deviation from the adjoint at most 1e-12).
  HermitianOperator(ModeLayout layout, Subspace subspace, Matrix matrix);

  const ModeLayout& layout() const { return layout_; }
  Subspace subspace() const { return subspace_; }
  const Matrix& matrix() const { return matrix_; }
  Index dim() const { return matrix_.rows(); }

  // Spectral decomposition, computed once on first use and shared between
  // copies; safe to call concurrently.
  const Eigensystem& eigensystem() const;

 private:
  ModeLayout layout_;
  Subspace subspace_ = Subspace::vibrational;
  Matrix matrix_;
  std::shared_ptr<detail::EigensystemCache> cache_;
};

// ------------------------------ StateVector ----------------------------

class StateVector {
 public:
  // Amplitudes must match the layout/subspace dimension and be normalized
  // to within 1e-12; throws std::invalid_argument otherwise.
  StateVector(ModeLayout layout, Subspace subspace, Vector amplitudes);

  // Normalizes a raw amplitude vector (rejects vanishing norm).
  static StateVector normalized(ModeLayout layout, Subspace subspace, Vector amplitudes);

  const ModeLayout& layout() const { return layout_; }
  Subspace subspace() const { return subspace_; }
  const Vector& amplitudes() const { return amplitudes_; }
  Index dim() const { return amplitudes_.size(); }
  double norm() const { return amplitudes_.norm(); }

 private:
  ModeLayout layout_;
  Subspace subspace_ = Subspace::vibrational;
  Vector amplitudes_;
};

// ------------------------------ operations -----------------------------

// Embeds op, acting on the listed modes (tensor order as listed, atomic
// factor innermost when with_atom is set), into the target subspace of
// layout, acting as the identity on every other factor.
Matrix tensor_embed(const Matrix& op, const std::vector<Mode>& modes, bool with_atom,
                    const ModeLayout& layout, Subspace target);

// Vibrational operator into the composite space (identity on the atom).
HermitianOperator tensor_embed(const HermitianOperator& op);

// Real expectation value ⟨ψ|A|ψ⟩; asserts the imaginary residue is below
// 1e-10 before discarding it.  State and operator must share layout and
// subspace.
double expectation(const StateVector& state, const HermitianOperator& op);

// g applied through the spectral decomposition: V·diag(g(λ))·V†.
Matrix matrix_function(const HermitianOperator& op, const std::function<Complex(double)>& g);

// Same for real g; the product is symmetrized exactly and returned as an
// operator on the same factors.
HermitianOperator hermitian_function(const HermitianOperator& op,
                                     const std::function<double(double)>& g);

// exp(i·scale·op), unitary for real scale.
Matrix unitary_exp(const HermitianOperator& op, double scale);

// ------------------------------- states --------------------------------

// Minimum norm a physical state must retain inside the truncated basis.
inline constexpr double default_min_capture = 1.0 - 1e-8;

StateVector fock_state(const ModeLayout& layout, const std::vector<Index>& occupations);
StateVector vacuum_state(const ModeLayout& layout);

// Unnormalized truncated coherent amplitudes e^{-|α|²/2} αⁿ/√n!; the squared
// norm is the captured probability.
Vector coherent_amplitudes(Complex alpha, Index dim);

// Product of single-mode coherent states (one α per layout mode).  Throws
// truncation_error when the captured norm falls below min_capture, otherwise
// renormalizes.
StateVector coherent_state(const ModeLayout& layout, const std::vector<Complex>& alphas,
                           double min_capture = default_min_capture);

// Vibrational state tensored with a normalized two-component atomic state.
StateVector attach_atom(const StateVector& vib, const Vector& atom_amplitudes);

// Unnormalized vibrational amplitudes of one atomic branch of a composite
// state; population is the squared norm.
struct AtomBranch {
  double population = 0.0;
  Vector vib_amplitudes;
};
AtomBranch atom_branch(const StateVector& composite, Index atom_index);

}  // namespace vibron
