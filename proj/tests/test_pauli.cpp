#include <gtest/gtest.h>

#include "httn/pauli.hpp"

using namespace httn;
using pauli::Pauli;

namespace {

// Kronecker-product oracle independent of the library's bit manipulation.
Matrix kron_string(std::size_t n, const std::map<std::size_t, Pauli>& letters) {
  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t s = 0; s < n; ++s) {
    auto it = letters.find(s);
    Matrix f = Matrix::Identity(2, 2);
    if (it != letters.end()) {
      switch (it->second) {
        case Pauli::X: f << 0, 1, 1, 0; break;
        case Pauli::Y: f << 0, cplx(0, -1), cplx(0, 1), 0; break;
        case Pauli::Z: f << 1, 0, 0, -1; break;
        default: break;
      }
    }
    Matrix next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = out(i, j) * f;
    out = next;
  }
  return out;
}

Matrix oracle_dense(const pauli::OperatorSum& op) {
  const auto d = Eigen::Index{1} << op.n_sites();
  Matrix h = Matrix::Zero(d, d);
  for (const auto& t : op.terms()) h += t.coefficient * kron_string(op.n_sites(), t.letters);
  return h;
}

double oracle_ground(const pauli::OperatorSum& op) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(oracle_dense(op));
  return es.eigenvalues()[0];
}

}  // namespace

TEST(OperatorSum, MergesAndCancels) {
  pauli::OperatorSum op(3);
  op.add(1.0, {{0, Pauli::X}});
  op.add(2.0, {{0, Pauli::X}});
  EXPECT_EQ(op.size(), 1u);
  EXPECT_NEAR(op.terms()[0].coefficient.real(), 3.0, 1e-15);
  op.add(-3.0, {{0, Pauli::X}});
  EXPECT_TRUE(op.empty());
}

TEST(OperatorSum, SiteOutOfRangeThrows) {
  pauli::OperatorSum op(2);
  EXPECT_THROW(op.add(1.0, {{2, Pauli::Z}}), std::out_of_range);
}

TEST(OperatorSum, DenseMatchesKroneckerOracle) {
  pauli::OperatorSum op(3);
  op.add(cplx(0.5, 0.0), {{0, Pauli::X}, {2, Pauli::Y}});
  op.add(-1.25, {{1, Pauli::Z}, {2, Pauli::X}});
  op.add(0.75, {{0, Pauli::Y}, {1, Pauli::Y}});
  EXPECT_LT((pauli::to_dense(op).to_matrix() - oracle_dense(op)).norm(), 1e-14);
}

TEST(OperatorSum, ApplyMatchesDense) {
  const auto op = pauli::ising_2d(3, 2, 1.0, 0.7, true);
  Vector psi = Vector::Random(64);
  EXPECT_LT((pauli::apply_to_state(op, psi) - oracle_dense(op) * psi).norm(), 1e-12);
}

TEST(Models, IsingTermCounts) {
  EXPECT_EQ(pauli::ising_1d(8, 1, 1, true).size(), 16u);
  EXPECT_EQ(pauli::ising_1d(8, 1, 1, false).size(), 15u);
  EXPECT_EQ(pauli::ising_2d(4, 4, 1, 1, true).size(), 48u);
  EXPECT_THROW(pauli::ising_1d(1, 1, 1, true), pauli::ModelError);
}

TEST(Models, CriticalIsingEightSites) {
  // Free-fermion closed form for the periodic chain in the even-parity sector.
  const std::size_t n = 8;
  double e = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double q = M_PI * (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(n);
    e -= std::sqrt(2.0 + 2.0 * std::cos(q));
  }
  EXPECT_NEAR(pauli::ground_energy(pauli::ising_1d(n, 1, 1, true)), e, 1e-10);
  EXPECT_NEAR(oracle_ground(pauli::ising_1d(n, 1, 1, true)), e, 1e-10);
}

TEST(Models, ToricStabilizersCommute) {
  const auto op = pauli::toric_code(4, 4);
  EXPECT_EQ(op.size(), 16u);
  for (const auto& a : op.terms())
    for (const auto& b : op.terms()) EXPECT_TRUE(a.commutes_with(b));
}

TEST(Models, ToricGroundEnergy) {
  EXPECT_NEAR(pauli::ground_energy(pauli::toric_code(4, 4)), -16.0, 1e-9);
}

TEST(Lanczos, AgreesWithDense) {
  const auto op = pauli::ising_2d(3, 3, 1.0, 1.0, true);
  EXPECT_NEAR(pauli::lanczos_ground_energy(op), oracle_ground(op), 1e-9);
}

TEST(Text, RoundTrip) {
  pauli::OperatorSum op(4);
  op.add(cplx(0.1, 0.2), {{0, Pauli::X}, {3, Pauli::Z}});
  op.add(1.0 / 3.0, {{1, Pauli::Y}});
  EXPECT_TRUE(pauli::from_text(pauli::to_text(op)).equals(op, 0.0));
  EXPECT_THROW(pauli::from_text("sites 2\n1 5:X\n"), std::out_of_range);
}

TEST(Hermiticity, AdjointOfImaginaryCoefficient) {
  pauli::OperatorSum op(1);
  op.add(cplx(0, 1), {{0, Pauli::Z}});
  EXPECT_FALSE(op.is_hermitian());
  pauli::OperatorSum h = pauli::ising_1d(4, 1, 1, true);
  EXPECT_TRUE(h.is_hermitian());
}
