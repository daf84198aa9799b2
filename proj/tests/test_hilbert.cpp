#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <complex>
#include <random>

#include "vibron/hilbert.hpp"

using namespace vibron;
using doctest::Approx;

namespace {

const Complex I1(0.0, 1.0);

Matrix pauli_z_2x2() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix pauli_x_2x2() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix number_matrix(Index d) {
  Matrix m = Matrix::Zero(d, d);
  for (Index n = 0; n < d; ++n) m(n, n) = static_cast<double>(n);
  return m;
}

Matrix random_hermitian(Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
  return 0.5 * (a + a.adjoint()).eval();
}

Vector random_state(Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = Complex(g(rng), g(rng));
  return v / v.norm();
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("mode labels round-trip and reject junk") {
  CHECK(mode_from_string("x") == Mode::x);
  CHECK(mode_from_string("y") == Mode::y);
  CHECK(mode_from_string("z") == Mode::z);
  CHECK(std::string(to_string(Mode::z)) == "z");
  CHECK_THROWS_AS(mode_from_string("w"), std::invalid_argument);
}

TEST_CASE("layout dimensions and index arithmetic") {
  ModeLayout layout({Mode::x, Mode::y}, {3, 2});
  CHECK(layout.vib_dim() == 6);
  CHECK(layout.dim(Subspace::composite) == 12);
  CHECK(layout.mode_dim(Mode::y) == 2);
  CHECK(layout.mode_index(Mode::y) == 1);
  CHECK(layout.has_mode(Mode::x));
  CHECK(!layout.has_mode(Mode::z));

  // first mode slowest
  CHECK(layout.vib_index({0, 0}) == 0);
  CHECK(layout.vib_index({0, 1}) == 1);
  CHECK(layout.vib_index({1, 0}) == 2);
  CHECK(layout.vib_index({2, 1}) == 5);
  for (Index v = 0; v < layout.vib_dim(); ++v) CHECK(layout.vib_index(layout.occupations(v)) == v);

  CHECK_THROWS_AS(layout.mode_index(Mode::z), std::invalid_argument);
  CHECK_THROWS_AS(layout.vib_index({3, 0}), truncation_error);
  CHECK_THROWS_AS(ModeLayout({Mode::x}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(ModeLayout({Mode::x, Mode::x}, {2, 2}), std::invalid_argument);
  CHECK_THROWS_AS(ModeLayout({Mode::x, Mode::y}, {2}), std::invalid_argument);
}

TEST_CASE("composite dimension guard") {
  CHECK_NOTHROW(ModeLayout({Mode::x, Mode::y}, {64, 32}));  // 64*32*2 = 4096, at the cap
  CHECK_THROWS_AS(ModeLayout({Mode::x, Mode::y}, {64, 64}), std::invalid_argument);
  CHECK_NOTHROW(ModeLayout({Mode::x, Mode::y}, {64, 64}, 1 << 14));  // explicit override
}

TEST_CASE("total excitation blocks enumerate the expected tuples") {
  ModeLayout layout({Mode::x, Mode::y}, {3, 3});
  const auto block = total_excitation_block(layout, 2);
  REQUIRE(block.size() == 3);  // |0,2>, |1,1>, |2,0>
  CHECK(block[0] == layout.vib_index({0, 2}));
  CHECK(block[1] == layout.vib_index({1, 1}));
  CHECK(block[2] == layout.vib_index({2, 0}));
  CHECK(total_excitation_block(layout, 4).size() == 1);  // |2,2> only
}

TEST_CASE("embedding the atomic sigma_z into a dim-2 mode layout") {
  ModeLayout layout({Mode::x}, {2});
  const Matrix m = tensor_embed(pauli_z_2x2(), {}, true, layout, Subspace::composite);
  Matrix want = Matrix::Zero(4, 4);
  want.diagonal() << 1, -1, 1, -1;  // atom index innermost
  CHECK(max_abs(m - want) == 0.0);
}

TEST_CASE("embedding the identity gives the identity") {
  ModeLayout layout({Mode::x, Mode::y}, {3, 2});
  const Matrix m =
      tensor_embed(Matrix::Identity(3, 3), {Mode::x}, false, layout, Subspace::composite);
  CHECK(max_abs(m - Matrix::Identity(12, 12)) == 0.0);
}

TEST_CASE("embedded number operator keeps its trace times the untouched dimensions") {
  ModeLayout layout({Mode::x, Mode::y}, {3, 2});
  const Matrix m = tensor_embed(number_matrix(3), {Mode::x}, false, layout, Subspace::composite);
  // oracle: tr(n ⊗ I_2 ⊗ I_2) = (0+1+2) * 2 * 2
  const double want = (0.0 + 1.0 + 2.0) * 2.0 * 2.0;
  CHECK(m.trace().real() == Approx(want).epsilon(1e-14));
  CHECK(m.rows() == 12);

  // against a hand-built Kronecker product (first mode slowest, atom innermost)
  const Matrix direct = Eigen::kroneckerProduct(
      number_matrix(3), Matrix::Identity(4, 4)).eval();
  CHECK(max_abs(m - direct) == 0.0);
}

TEST_CASE("embedding handles a non-leading mode and preserves Hermiticity") {
  ModeLayout layout({Mode::x, Mode::y}, {3, 4});
  const Matrix h = random_hermitian(4, 11);
  const Matrix m = tensor_embed(h, {Mode::y}, false, layout, Subspace::vibrational);
  const Matrix direct = Eigen::kroneckerProduct(Matrix::Identity(3, 3), h).eval();
  CHECK(max_abs(m - direct) == 0.0);
  CHECK(max_abs(m - m.adjoint()) == 0.0);
}

TEST_CASE("embedding a two-mode operator in swapped listed order") {
  ModeLayout layout({Mode::x, Mode::y}, {2, 3});
  // op indexed with y slowest, x fastest: op = A_y ⊗ A_x
  const Matrix ax = random_hermitian(2, 21);
  const Matrix ay = random_hermitian(3, 22);
  const Matrix op = Eigen::kroneckerProduct(ay, ax).eval();
  const Matrix m = tensor_embed(op, {Mode::y, Mode::x}, false, layout, Subspace::vibrational);
  const Matrix direct = Eigen::kroneckerProduct(ax, ay).eval();  // layout order: x slow
  CHECK(max_abs(m - direct) < 1e-14);
}

TEST_CASE("tensor_embed commutes with addition and real scaling") {
  ModeLayout layout({Mode::x, Mode::y}, {3, 3});
  const Matrix a = random_hermitian(3, 31);
  const Matrix b = random_hermitian(3, 32);
  const Matrix lhs = tensor_embed((2.5 * a + b).eval(), {Mode::y}, false, layout, Subspace::composite);
  const Matrix rhs = 2.5 * tensor_embed(a, {Mode::y}, false, layout, Subspace::composite) +
                     tensor_embed(b, {Mode::y}, false, layout, Subspace::composite);
  CHECK(max_abs(lhs - rhs) < 1e-14);
}

TEST_CASE("tensor_embed rejects bad requests") {
  ModeLayout layout({Mode::x}, {3});
  CHECK_THROWS_AS(tensor_embed(Matrix::Identity(2, 2), {}, true, layout, Subspace::vibrational),
                  std::invalid_argument);
  CHECK_THROWS_AS(tensor_embed(Matrix::Identity(4, 4), {Mode::x}, false, layout,
                               Subspace::vibrational),
                  std::invalid_argument);
  CHECK_THROWS_AS(tensor_embed(Matrix::Identity(3, 3), {Mode::y}, false, layout,
                               Subspace::vibrational),
                  std::invalid_argument);
}

TEST_CASE("expectation values of basis states") {
  ModeLayout layout({Mode::x}, {4});
  HermitianOperator n_op(layout, Subspace::vibrational, number_matrix(4));
  CHECK(expectation(fock_state(layout, {0}), n_op) == 0.0);
  CHECK(expectation(fock_state(layout, {3}), n_op) == Approx(3.0));

  // atom-only layout: <-|sigma_z|-> = -1
  ModeLayout atom_only;
  HermitianOperator sz(atom_only, Subspace::composite,
                       tensor_embed(pauli_z_2x2(), {}, true, atom_only, Subspace::composite));
  Vector minus(2);
  minus << 0, 1;
  StateVector state(atom_only, Subspace::composite, minus);
  CHECK(expectation(state, sz) == Approx(-1.0));
}

TEST_CASE("expectation is real for random Hermitian operators") {
  ModeLayout layout({Mode::x}, {8});
  for (std::uint64_t s = 0; s < 5; ++s) {
    HermitianOperator op(layout, Subspace::vibrational, random_hermitian(8, 100 + s));
    StateVector psi(layout, Subspace::vibrational, random_state(8, 200 + s));
    CHECK_NOTHROW(expectation(psi, op));
  }
}

TEST_CASE("expectation rejects mismatched spaces") {
  ModeLayout a({Mode::x}, {4});
  ModeLayout b({Mode::x}, {5});
  HermitianOperator op(a, Subspace::vibrational, number_matrix(4));
  StateVector psi = fock_state(b, {0});
  CHECK_THROWS_AS(expectation(psi, op), std::invalid_argument);
}

TEST_CASE("coherent state mean occupation matches the truncated Poisson sum") {
  ModeLayout layout({Mode::x}, {32});
  const StateVector psi = coherent_state(layout, {Complex(1.0, 0.0)});
  HermitianOperator n_op(layout, Subspace::vibrational, number_matrix(32));

  // independent oracle: truncated, renormalized Poisson moments at |alpha|^2 = 1
  double p = std::exp(-1.0), z = 0.0, m1 = 0.0;
  for (Index n = 0; n < 32; ++n) {
    z += p;
    m1 += static_cast<double>(n) * p;
    p /= static_cast<double>(n + 1);
  }
  const double mean = expectation(psi, n_op);
  CHECK(mean == Approx(m1 / z).epsilon(1e-12));
  CHECK(std::abs(mean - 1.0) < 1e-10);
}

TEST_CASE("coherent state fails loudly when the truncation cannot hold it") {
  ModeLayout layout({Mode::x}, {4});
  CHECK_THROWS_AS(coherent_state(layout, {Complex(3.0, 0.0)}), truncation_error);
}

TEST_CASE("two-mode coherent product state") {
  ModeLayout layout({Mode::x, Mode::y}, {24, 24});
  const Complex ax(0.8, 0.0), ay(0.0, 0.6);
  const StateVector psi = coherent_state(layout, {ax, ay});
  HermitianOperator nx(layout, Subspace::vibrational,
                       tensor_embed(number_matrix(24), {Mode::x}, false, layout,
                                    Subspace::vibrational));
  HermitianOperator ny(layout, Subspace::vibrational,
                       tensor_embed(number_matrix(24), {Mode::y}, false, layout,
                                    Subspace::vibrational));
  CHECK(expectation(psi, nx) == Approx(std::norm(ax)).epsilon(1e-10));
  CHECK(expectation(psi, ny) == Approx(std::norm(ay)).epsilon(1e-10));
}

TEST_CASE("matrix_function with the identity map returns the operator") {
  ModeLayout layout({Mode::x}, {6});
  HermitianOperator op(layout, Subspace::vibrational, random_hermitian(6, 41));
  const Matrix m = matrix_function(op, [](double x) { return Complex(x, 0.0); });
  CHECK(max_abs(m - op.matrix()) < 1e-10);
}

TEST_CASE("matrix_function of a diagonal operator applies g entrywise") {
  ModeLayout layout({Mode::x}, {4});
  HermitianOperator n_op(layout, Subspace::vibrational, number_matrix(4));
  const Matrix m = matrix_function(n_op, [](double x) { return Complex(std::sin(x), 0.0); });
  Matrix want = Matrix::Zero(4, 4);
  for (Index n = 0; n < 4; ++n) want(n, n) = std::sin(static_cast<double>(n));
  CHECK(max_abs(m - want) < 1e-12);
}

TEST_CASE("exp(-i pi sigma_x) is minus the identity") {
  ModeLayout atom_only;
  HermitianOperator sx(atom_only, Subspace::composite,
                       tensor_embed(pauli_x_2x2(), {}, true, atom_only, Subspace::composite));
  const Matrix u = unitary_exp(sx, -M_PI);
  CHECK(max_abs(u + Matrix::Identity(2, 2)) < 1e-12);
}

TEST_CASE("unitary matrix functions preserve the norm and invert cleanly") {
  ModeLayout layout({Mode::x}, {7});
  HermitianOperator op(layout, Subspace::vibrational, random_hermitian(7, 51));
  const Matrix u = unitary_exp(op, 0.37);
  const Matrix udag = unitary_exp(op, -0.37);
  CHECK(max_abs(u * udag - Matrix::Identity(7, 7)) < 1e-10);

  const Vector psi = random_state(7, 52);
  CHECK(std::abs((u * psi).norm() - 1.0) < 1e-12);
}

TEST_CASE("spectral decomposition of sigma_x") {
  ModeLayout atom_only;
  HermitianOperator sx(atom_only, Subspace::composite,
                       tensor_embed(pauli_x_2x2(), {}, true, atom_only, Subspace::composite));
  const Eigensystem& es = sx.eigensystem();
  CHECK(es.values(0) == Approx(-1.0).epsilon(1e-12));
  CHECK(es.values(1) == Approx(1.0).epsilon(1e-12));
  // phase convention: first non-negligible component real positive
  CHECK(es.vectors(0, 0).real() == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(es.vectors(0, 0).imag() == Approx(0.0).scale(1).epsilon(1e-12));
  CHECK(es.vectors(1, 0).real() == Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("spectral decomposition of the number operator is exact") {
  ModeLayout layout({Mode::x}, {5});
  HermitianOperator n_op(layout, Subspace::vibrational, number_matrix(5));
  const Eigensystem& es = n_op.eigensystem();
  for (Index n = 0; n < 5; ++n) CHECK(std::abs(es.values(n) - static_cast<double>(n)) < 1e-12);
}

TEST_CASE("spectral decomposition satisfies its residual guarantees") {
  ModeLayout layout({Mode::x, Mode::y}, {4, 3});
  HermitianOperator op(layout, Subspace::vibrational, random_hermitian(12, 61));
  const Eigensystem& es = op.eigensystem();
  for (Index i = 1; i < es.values.size(); ++i) CHECK(es.values(i) >= es.values(i - 1));
  CHECK(max_abs(es.vectors.adjoint() * es.vectors - Matrix::Identity(12, 12)) < 1e-9);
  CHECK(max_abs(es.vectors * es.values.cast<Complex>().asDiagonal() * es.vectors.adjoint() -
                op.matrix()) < 1e-9);
}

TEST_CASE("hermitian operators reject non-Hermitian input") {
  ModeLayout layout({Mode::x}, {2});
  Matrix bad(2, 2);
  bad << 0, 1, 0, 0;
  CHECK_THROWS_AS(HermitianOperator(layout, Subspace::vibrational, bad), std::invalid_argument);
}

TEST_CASE("state vectors reject unnormalized amplitudes but normalize on request") {
  ModeLayout layout({Mode::x}, {3});
  Vector raw(3);
  raw << 1.0, 1.0, 0.0;
  CHECK_THROWS_AS(StateVector(layout, Subspace::vibrational, raw), std::invalid_argument);
  const StateVector psi = StateVector::normalized(layout, Subspace::vibrational, raw);
  CHECK(psi.norm() == Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(StateVector::normalized(layout, Subspace::vibrational, Vector::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("attach_atom and atom_branch round-trip") {
  ModeLayout layout({Mode::x}, {3});
  const StateVector vib = StateVector::normalized(layout, Subspace::vibrational,
                                                  random_state(3, 71));
  Vector atom(2);
  atom << Complex(0.0, 1.0) / std::sqrt(2.0), Complex(1.0, 0.0) / std::sqrt(2.0);
  const StateVector full = attach_atom(vib, atom);
  CHECK(full.dim() == 6);

  const AtomBranch plus = atom_branch(full, 0);
  const AtomBranch minus = atom_branch(full, 1);
  CHECK(plus.population == Approx(0.5).epsilon(1e-12));
  CHECK(minus.population == Approx(0.5).epsilon(1e-12));
  CHECK((minus.vib_amplitudes * std::sqrt(2.0) - vib.amplitudes()).norm() < 1e-12);
}

TEST_CASE("eigensystem cache is shared across copies") {
  ModeLayout layout({Mode::x}, {16});
  HermitianOperator op(layout, Subspace::vibrational, random_hermitian(16, 81));
  const Eigensystem& a = op.eigensystem();
  HermitianOperator copy = op;
  const Eigensystem& b = copy.eigensystem();
  CHECK(&a == &b);
}
