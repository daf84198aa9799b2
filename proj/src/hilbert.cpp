#include "vibron/hilbert.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>

namespace vibron {

namespace {

constexpr double hermiticity_tol   = 1e-12;
constexpr double decomposition_tol = 1e-9;
constexpr double norm_tol          = 1e-12;
constexpr double imag_tol          = 1e-10;

std::string dim_mismatch(const char* what, Index got, Index want) {
  std::ostringstream os;
  os << what << ": dimension " << got << ", expected " << want;
  return os.str();
}

}  // namespace

// ------------------------------- modes ---------------------------------

const char* to_string(Mode m) {
  switch (m) {
    case Mode::x: return "x";
    case Mode::y: return "y";
    case Mode::z: return "z";
  }
  throw std::invalid_argument("unknown mode");
}

Mode mode_from_string(const std::string& name) {
  if (name == "x") return Mode::x;
  if (name == "y") return Mode::y;
  if (name == "z") return Mode::z;
  throw std::invalid_argument("unknown mode label '" + name + "' (expected x, y or z)");
}

// ------------------------------ ModeLayout -----------------------------

ModeLayout::ModeLayout(std::vector<Mode> modes, std::vector<Index> dims, Index dim_guard)
    : modes_(std::move(modes)), dims_(std::move(dims)) {
  if (modes_.size() != dims_.size())
    throw std::invalid_argument("ModeLayout: one dimension per mode required");
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (dims_[i] < 2)
      throw std::invalid_argument("ModeLayout: Fock truncation must be at least 2");
    for (std::size_t j = i + 1; j < modes_.size(); ++j)
      if (modes_[i] == modes_[j])
        throw std::invalid_argument(std::string("ModeLayout: duplicate mode ") + to_string(modes_[i]));
  }
  if (dim(Subspace::composite) > dim_guard) {
    std::ostringstream os;
    os << "ModeLayout: composite dimension " << dim(Subspace::composite)
       << " exceeds guard " << dim_guard;
    throw std::invalid_argument(os.str());
  }
}

bool ModeLayout::has_mode(Mode m) const {
  return std::find(modes_.begin(), modes_.end(), m) != modes_.end();
}

Index ModeLayout::mode_index(Mode m) const {
  auto it = std::find(modes_.begin(), modes_.end(), m);
  if (it == modes_.end())
    throw std::invalid_argument(std::string("ModeLayout: mode ") + to_string(m) + " not present");
  return static_cast<Index>(it - modes_.begin());
}

Index ModeLayout::vib_dim() const {
  Index d = 1;
  for (Index dm : dims_) d *= dm;
  return d;
}

Index ModeLayout::dim(Subspace s) const {
  return s == Subspace::vibrational ? vib_dim() : vib_dim() * atom_levels;
}

Index ModeLayout::vib_index(const std::vector<Index>& occupations) const {
  if (occupations.size() != modes_.size())
    throw std::invalid_argument("vib_index: one occupation per mode required");
  Index idx = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (occupations[i] < 0 || occupations[i] >= dims_[i])
      throw truncation_error("vib_index: occupation outside the truncated basis");
    idx = idx * dims_[i] + occupations[i];
  }
  return idx;
}

std::vector<Index> ModeLayout::occupations(Index vib_index) const {
  if (vib_index < 0 || vib_index >= vib_dim())
    throw std::invalid_argument("occupations: flat index out of range");
  std::vector<Index> occ(modes_.size(), 0);
  for (std::size_t i = modes_.size(); i-- > 0;) {
    occ[i] = vib_index % dims_[i];
    vib_index /= dims_[i];
  }
  return occ;
}

bool ModeLayout::operator==(const ModeLayout& other) const {
  return modes_ == other.modes_ && dims_ == other.dims_;
}

std::vector<Index> total_excitation_block(const ModeLayout& layout, Index n_total) {
  std::vector<Index> block;
  for (Index v = 0; v < layout.vib_dim(); ++v) {
    const auto occ = layout.occupations(v);
    if (std::accumulate(occ.begin(), occ.end(), Index{0}) == n_total) block.push_back(v);
  }
  return block;
}

Matrix submatrix(const Matrix& m, const std::vector<Index>& indices) {
  Matrix out(static_cast<Index>(indices.size()), static_cast<Index>(indices.size()));
  for (std::size_t r = 0; r < indices.size(); ++r)
    for (std::size_t c = 0; c < indices.size(); ++c)
      out(static_cast<Index>(r), static_cast<Index>(c)) = m(indices[r], indices[c]);
  return out;
}

// ----------------------------- Eigensystem -----------------------------

Eigensystem spectral_decomposition(const Matrix& hermitian) {
  if (hermitian.rows() != hermitian.cols())
    throw std::invalid_argument("spectral_decomposition: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("spectral_decomposition: eigensolver failed to converge");

  Eigensystem es{solver.eigenvalues(), solver.eigenvectors()};

  // Deterministic phases: first non-negligible component real positive.
  for (Index j = 0; j < es.vectors.cols(); ++j) {
    for (Index i = 0; i < es.vectors.rows(); ++i) {
      const Complex v = es.vectors(i, j);
      if (std::abs(v) > 1e-12) {
        es.vectors.col(j) *= std::conj(v) / std::abs(v);
        break;
      }
    }
  }

  const Index n = hermitian.rows();
  const double unitarity =
      (es.vectors.adjoint() * es.vectors - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  const double reconstruction =
      (es.vectors * es.values.cast<Complex>().asDiagonal() * es.vectors.adjoint() - hermitian)
          .cwiseAbs()
          .maxCoeff();
  if (unitarity > decomposition_tol || reconstruction > decomposition_tol)
    throw std::runtime_error("spectral_decomposition: residual above tolerance");
  return es;
}

// --------------------------- HermitianOperator -------------------------

namespace detail {
struct EigensystemCache {
  std::once_flag once;
  std::unique_ptr<const Eigensystem> eigensystem;
};
}  // namespace detail

HermitianOperator::HermitianOperator(ModeLayout layout, Subspace subspace, Matrix matrix)
    : layout_(std::move(layout)),
      subspace_(subspace),
      matrix_(std::move(matrix)),
      cache_(std::make_shared<detail::EigensystemCache>()) {
  if (matrix_.rows() != matrix_.cols())
    throw std::invalid_argument("HermitianOperator: matrix must be square");
  if (matrix_.rows() != layout_.dim(subspace_))
    throw std::invalid_argument(
        dim_mismatch("HermitianOperator", matrix_.rows(), layout_.dim(subspace_)));
  const double dev = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (dev > hermiticity_tol) {
    std::ostringstream os;
    os << "HermitianOperator: matrix is not Hermitian (max deviation " << dev << ")";
    throw std::invalid_argument(os.str());
  }
}

const Eigensystem& HermitianOperator::eigensystem() const {
  std::call_once(cache_->once, [this] {
    cache_->eigensystem = std::make_unique<const Eigensystem>(spectral_decomposition(matrix_));
  });
  return *cache_->eigensystem;
}

// ------------------------------ StateVector ----------------------------

StateVector::StateVector(ModeLayout layout, Subspace subspace, Vector amplitudes)
    : layout_(std::move(layout)), subspace_(subspace), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != layout_.dim(subspace_))
    throw std::invalid_argument(
        dim_mismatch("StateVector", amplitudes_.size(), layout_.dim(subspace_)));
  if (std::abs(amplitudes_.norm() - 1.0) > norm_tol)
    throw std::invalid_argument("StateVector: amplitudes are not normalized");
}

StateVector StateVector::normalized(ModeLayout layout, Subspace subspace, Vector amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 1e-15)) throw std::invalid_argument("StateVector: cannot normalize a null vector");
  return StateVector(std::move(layout), subspace, amplitudes / n);
}

// ------------------------------ operations -----------------------------

Matrix tensor_embed(const Matrix& op, const std::vector<Mode>& modes, bool with_atom,
                    const ModeLayout& layout, Subspace target) {
  if (op.rows() != op.cols()) throw std::invalid_argument("tensor_embed: operator must be square");
  if (with_atom && target == Subspace::vibrational)
    throw std::invalid_argument("tensor_embed: atomic factor requires a composite target");
  for (std::size_t i = 0; i < modes.size(); ++i)
    for (std::size_t j = i + 1; j < modes.size(); ++j)
      if (modes[i] == modes[j]) throw std::invalid_argument("tensor_embed: duplicate mode");

  // Target factor table: layout modes in order, atom last when composite.
  const Index n_modes = layout.mode_count();
  const bool atom_in_target = target == Subspace::composite;
  const Index n_factors = n_modes + (atom_in_target ? 1 : 0);
  std::vector<Index> fdim(static_cast<std::size_t>(n_factors));
  for (Index i = 0; i < n_modes; ++i) fdim[static_cast<std::size_t>(i)] = layout.mode_dim(i);
  if (atom_in_target) fdim[static_cast<std::size_t>(n_modes)] = ModeLayout::atom_levels;
  std::vector<Index> fstride(static_cast<std::size_t>(n_factors), 1);
  for (Index i = n_factors - 2; i >= 0; --i)
    fstride[static_cast<std::size_t>(i)] =
        fstride[static_cast<std::size_t>(i + 1)] * fdim[static_cast<std::size_t>(i + 1)];

  // Operator factor table, in the listed order (atom innermost).
  std::vector<Index> op_factor;  // positions into the target factor table
  op_factor.reserve(modes.size() + 1);
  Index op_dim = 1;
  for (Mode m : modes) {
    const Index pos = layout.mode_index(m);
    op_factor.push_back(pos);
    op_dim *= layout.mode_dim(pos);
  }
  if (with_atom) {
    op_factor.push_back(n_modes);
    op_dim *= ModeLayout::atom_levels;
  }
  if (op.rows() != op_dim)
    throw std::invalid_argument(dim_mismatch("tensor_embed", op.rows(), op_dim));

  // Flat offsets of every assignment of the untouched factors.
  std::vector<bool> covered(static_cast<std::size_t>(n_factors), false);
  for (Index pos : op_factor) covered[static_cast<std::size_t>(pos)] = true;
  std::vector<Index> rest_offsets{0};
  for (Index f = 0; f < n_factors; ++f) {
    if (covered[static_cast<std::size_t>(f)]) continue;
    std::vector<Index> grown;
    grown.reserve(rest_offsets.size() * static_cast<std::size_t>(fdim[static_cast<std::size_t>(f)]));
    for (Index k = 0; k < fdim[static_cast<std::size_t>(f)]; ++k)
      for (Index base : rest_offsets)
        grown.push_back(base + k * fstride[static_cast<std::size_t>(f)]);
    rest_offsets.swap(grown);
  }

  // Flat target offset of an operator-local index.
  auto target_offset = [&](Index local) {
    Index offset = 0;
    for (std::size_t k = op_factor.size(); k-- > 0;) {
      const Index pos = op_factor[k];
      const Index d = fdim[static_cast<std::size_t>(pos)];
      offset += (local % d) * fstride[static_cast<std::size_t>(pos)];
      local /= d;
    }
    return offset;
  };

  Matrix out = Matrix::Zero(layout.dim(target), layout.dim(target));
  for (Index r = 0; r < op_dim; ++r) {
    const Index row_base = target_offset(r);
    for (Index c = 0; c < op_dim; ++c) {
      const Complex v = op(r, c);
      if (v == Complex(0.0, 0.0)) continue;
      const Index col_base = target_offset(c);
      for (Index rest : rest_offsets) out(row_base + rest, col_base + rest) = v;
    }
  }
  return out;
}

HermitianOperator tensor_embed(const HermitianOperator& op) {
  if (op.subspace() != Subspace::vibrational)
    throw std::invalid_argument("tensor_embed: operator is already composite");
  const Matrix out =
      Eigen::kroneckerProduct(op.matrix(), Matrix::Identity(ModeLayout::atom_levels,
                                                            ModeLayout::atom_levels));
  return HermitianOperator(op.layout(), Subspace::composite, out);
}

double expectation(const StateVector& state, const HermitianOperator& op) {
  if (state.layout() != op.layout() || state.subspace() != op.subspace())
    throw std::invalid_argument("expectation: state and operator live on different spaces");
  const Complex value = (state.amplitudes().adjoint() * op.matrix() * state.amplitudes())(0, 0);
  if (std::abs(value.imag()) > imag_tol)
    throw std::runtime_error("expectation: imaginary residue above tolerance");
  return value.real();
}

Matrix matrix_function(const HermitianOperator& op, const std::function<Complex(double)>& g) {
  const Eigensystem& es = op.eigensystem();
  Vector gl(es.values.size());
  for (Index i = 0; i < es.values.size(); ++i) gl(i) = g(es.values(i));
  return es.vectors * gl.asDiagonal() * es.vectors.adjoint();
}

HermitianOperator hermitian_function(const HermitianOperator& op,
                                     const std::function<double(double)>& g) {
  const Matrix m = matrix_function(op, [&g](double x) { return Complex(g(x), 0.0); });
  const Matrix sym = 0.5 * (m + m.adjoint());
  return HermitianOperator(op.layout(), op.subspace(), sym);
}

Matrix unitary_exp(const HermitianOperator& op, double scale) {
  return matrix_function(
      op, [scale](double x) { return std::exp(Complex(0.0, scale * x)); });
}

// ------------------------------- states --------------------------------

StateVector fock_state(const ModeLayout& layout, const std::vector<Index>& occupations) {
  Vector amps = Vector::Zero(layout.vib_dim());
  amps(layout.vib_index(occupations)) = 1.0;
  return StateVector(layout, Subspace::vibrational, std::move(amps));
}

StateVector vacuum_state(const ModeLayout& layout) {
  return fock_state(layout, std::vector<Index>(static_cast<std::size_t>(layout.mode_count()), 0));
}

Vector coherent_amplitudes(Complex alpha, Index dim) {
  if (dim < 1) throw std::invalid_argument("coherent_amplitudes: dimension must be positive");
  Vector c(dim);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (Index n = 1; n < dim; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return c;
}

StateVector coherent_state(const ModeLayout& layout, const std::vector<Complex>& alphas,
                           double min_capture) {
  if (static_cast<Index>(alphas.size()) != layout.mode_count())
    throw std::invalid_argument("coherent_state: one alpha per mode required");
  if (layout.mode_count() == 0)
    throw std::invalid_argument("coherent_state: layout has no vibrational modes");

  Vector amps = Vector::Ones(1);
  double capture = 1.0;
  for (Index i = 0; i < layout.mode_count(); ++i) {
    const Vector c = coherent_amplitudes(alphas[static_cast<std::size_t>(i)], layout.mode_dim(i));
    capture *= c.squaredNorm();
    amps = Eigen::kroneckerProduct(amps, c).eval();
  }
  if (capture < min_capture) {
    std::ostringstream os;
    os << std::setprecision(12) << "coherent_state: truncated basis captures only "
       << capture << " of the norm (minimum " << min_capture << ")";
    throw truncation_error(os.str());
  }
  return StateVector::normalized(layout, Subspace::vibrational, std::move(amps));
}

StateVector attach_atom(const StateVector& vib, const Vector& atom_amplitudes) {
  if (vib.subspace() != Subspace::vibrational)
    throw std::invalid_argument("attach_atom: state is already composite");
  if (atom_amplitudes.size() != ModeLayout::atom_levels)
    throw std::invalid_argument("attach_atom: atomic state must have two components");
  if (std::abs(atom_amplitudes.norm() - 1.0) > norm_tol)
    throw std::invalid_argument("attach_atom: atomic state is not normalized");
  const Vector amps = Eigen::kroneckerProduct(vib.amplitudes(), atom_amplitudes);
  return StateVector::normalized(vib.layout(), Subspace::composite, amps);
}

AtomBranch atom_branch(const StateVector& composite, Index atom_index) {
  if (composite.subspace() != Subspace::composite)
    throw std::invalid_argument("atom_branch: state has no atomic factor");
  if (atom_index < 0 || atom_index >= ModeLayout::atom_levels)
    throw std::invalid_argument("atom_branch: atomic index out of range");
  const Index vd = composite.layout().vib_dim();
  AtomBranch branch;
  branch.vib_amplitudes = Vector(vd);
  for (Index v = 0; v < vd; ++v)
    branch.vib_amplitudes(v) = composite.amplitudes()(v * ModeLayout::atom_levels + atom_index);
  branch.population = branch.vib_amplitudes.squaredNorm();
  return branch;
}

}  // namespace vibron
