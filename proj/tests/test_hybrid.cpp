#include <gtest/gtest.h>

#include <random>

#include "httn/hybrid.hpp"

using namespace httn;
using namespace httn::hybrid;

namespace {

Matrix random_hermitian(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  return (a + a.adjoint()) / 2.0;
}

Matrix random_matrix(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  return a;
}

qsim::Params random_params(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  qsim::Params p(static_cast<Eigen::Index>(n));
  for (auto& x : p) x = g(rng);
  return p;
}

// Two terms on a (4, 4) node: one on both legs, one on leg 1 only.
ttn::EffectiveHamiltonian random_heff(std::mt19937_64& rng) {
  ttn::EffectiveHamiltonian h;
  h.dims = {4, 4};
  ttn::ProductTerm a;
  a.weight = 0.7;
  a.legs = {random_hermitian(4, rng), random_hermitian(4, rng)};
  ttn::ProductTerm b;
  b.weight = -1.3;
  b.legs = {std::nullopt, random_hermitian(4, rng)};
  h.terms = {a, b};
  return h;
}

QuantumTensor random_qt(std::mt19937_64& rng) {
  const auto circ = qsim::ladder(4, 2);
  return QuantumTensor(circ, random_params(circ.n_params(), rng), {2, 2});
}

// Dense oracle: T = (P0 x P1)|psi>, energy T^dag H T, norm T^dag T.
std::pair<double, double> dense_energy_norm(const QuantumTensor& qt, const ttn::EffectiveHamiltonian& h) {
  Matrix p(16, 16);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) p.block(4 * i, 4 * j, 4, 4) = qt.p(0)(i, j) * qt.p(1);
  const Vector t = p * qt.state();
  return {t.dot(h.assemble() * t).real(), t.squaredNorm()};
}

pauli::OperatorSum ising8() { return pauli::ising_1d(8, 1.0, 1.0, true); }

double exact_ground(const pauli::OperatorSum& op) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(pauli::to_dense(op).to_matrix());
  return es.eigenvalues()[0];
}

}  // namespace

TEST(Strategy, StringRoundTrip) {
  for (auto s : {Strategy::kKeepWithPenalty, Strategy::kProjectUnitary, Strategy::kReinitialize})
    EXPECT_EQ(strategy_from_string(to_string(s)), s);
  EXPECT_THROW(strategy_from_string("iv"), std::invalid_argument);
}

TEST(Loss, IdentityOperatorGivesOne) {
  std::mt19937_64 rng(1);
  const QuantumTensor qt = random_qt(rng);
  ttn::EffectiveHamiltonian h;
  h.dims = {4, 4};
  ttn::ProductTerm id;
  id.legs = {std::nullopt, std::nullopt};
  h.terms = {id};
  const auto parts = loss(qt, h, 1000.0);
  EXPECT_NEAR(parts.total, 1.0, 1e-12);
  EXPECT_FALSE(parts.penalized);
}

TEST(Loss, UnitaryPMatchesDenseEnergy) {
  std::mt19937_64 rng(2);
  QuantumTensor qt = random_qt(rng);
  const auto h = random_heff(rng);
  qt.set_p(0, project_to_unitary(random_matrix(4, rng)));
  const auto parts = loss(qt, h, 1000.0);
  const auto [e, n] = dense_energy_norm(qt, h);
  EXPECT_NEAR(parts.energy, e, 1e-10);
  EXPECT_NEAR(parts.total, e, 1e-10);
  EXPECT_NEAR(n, 1.0, 1e-12);
}

TEST(Loss, ScaledPAddsPenalty) {
  std::mt19937_64 rng(3);
  QuantumTensor qt = random_qt(rng);
  const auto h = random_heff(rng);
  qt.set_p(1, 2.0 * Matrix::Identity(4, 4));
  const auto parts = loss(qt, h, 10.0);
  const auto [e, n] = dense_energy_norm(qt, h);
  EXPECT_TRUE(parts.penalized);
  EXPECT_NEAR(parts.norm, 4.0, 1e-12);
  EXPECT_NEAR(n, 4.0, 1e-12);
  EXPECT_NEAR(parts.energy, e, 1e-10);
  EXPECT_NEAR(parts.total, e + 10.0 * 3.0, 1e-10);
}

TEST(Loss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  QuantumTensor qt = random_qt(rng);
  const auto h = random_heff(rng);
  qt.set_p(0, random_matrix(4, rng) * 0.5);
  Eigen::VectorXd grad;
  const qsim::Params x = qt.params();
  loss_and_gradient(qt, x, h, 5.0, grad);
  for (Eigen::Index k = 0; k < x.size(); k += 7) {
    qsim::Params a = x, b = x;
    a[k] += 1e-6;
    b[k] -= 1e-6;
    Eigen::VectorXd unused;
    const double fd = (loss_and_gradient(qt, a, h, 5.0, unused) - loss_and_gradient(qt, b, h, 5.0, unused)) / 2e-6;
    EXPECT_NEAR(grad[k], fd, 1e-5 * std::max(1.0, std::abs(fd))) << "parameter " << k;
  }
}

TEST(Loss, NormIsNonNegativeForRandomP) {
  std::mt19937_64 rng(5);
  const auto h = random_heff(rng);
  for (int trial = 0; trial < 100; ++trial) {
    QuantumTensor qt = random_qt(rng);
    qt.set_p(0, random_matrix(4, rng));
    qt.set_p(1, random_matrix(4, rng));
    const auto parts = loss(qt, h, 1.0);
    EXPECT_GE(parts.norm, 0.0);
    EXPECT_NEAR(parts.norm, dense_energy_norm(qt, h).second, 1e-9 * std::max(1.0, parts.norm));
  }
}

TEST(Loss, NoiseStandardDeviation) {
  std::mt19937_64 rng(6);
  const QuantumTensor qt = random_qt(rng);
  ttn::EffectiveHamiltonian h;
  h.dims = {4, 4};
  ttn::ProductTerm t;
  t.weight = 2.0;
  t.legs = {Matrix(Matrix::Identity(4, 4) * 0.5), std::nullopt};
  h.terms = {t};
  NoiseSource noise({0.1, 42, true, false});
  const double exact = loss(qt, h, 1.0).total;
  const int n = 4000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = loss(qt, h, 1.0, &noise).total - exact;
    sum += d;
    sq += d * d;
  }
  const double mean = sum / n, sd = std::sqrt(sq / n - mean * mean);
  // one draw of scale |w| * ||0.5 I|| = 1
  EXPECT_NEAR(sd, 0.1, 0.01);
  EXPECT_NEAR(mean, 0.0, 0.01);
}

TEST(Vqe, ReachesLocalGroundStateOfSmallHeff) {
  std::mt19937_64 rng(7);
  QuantumTensor qt = random_qt(rng);
  const auto h = random_heff(rng);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.assemble());
  VqeOptions opts;
  opts.max_iterations = 500;
  const auto r = vqe_optimize(qt, h, opts);
  EXPECT_LE(r.final_loss, r.initial_loss);
  EXPECT_NEAR(r.final_loss, es.eigenvalues()[0], 1e-6);
  EXPECT_FALSE(r.diverged);
}

TEST(Hybridize, SingleBottomNodeKeepsState) {
  auto net = ttn::TreeNetwork::binary(8, 4, ttn::Init::kRandomIsometric, 3);
  const Vector before = net.dense_state();
  CircuitOptions opts;
  opts.m = 4;
  std::size_t qt = 0;
  auto hybrid = hybridize(net, {1}, opts, &qt);
  EXPECT_TRUE(hybrid.is_quantum(qt));
  EXPECT_EQ(hybrid.center(), qt);
  const Vector after = hybrid.dense_state();
  EXPECT_NEAR(after.norm(), 1.0, 1e-10);
  EXPECT_GT(qsim::fidelity(before, after), 1.0 - 1e-6);
}

TEST(Hybridize, TopPairFidelityMatchesEncoding) {
  auto net = ttn::TreeNetwork::binary(8, 4, ttn::Init::kRandomIsometric, 4);
  const Vector before = net.dense_state();
  const auto upper = upper_nodes(net.topology());
  ASSERT_EQ(upper.size(), 2u);
  CircuitOptions opts;
  opts.m = 2;
  std::size_t qt = 0;
  auto hybrid = hybridize(net, upper, opts, &qt);
  EXPECT_EQ(hybrid.quantum(qt).leg_partition(), (std::vector<std::size_t>{2, 2, 2, 2}));
  const QuantumTensor& q = hybrid.quantum(qt);
  const double f = qsim::fidelity(before, hybrid.dense_state());
  EXPECT_GT(f, 0.9);
  EXPECT_LE(f, 1.0 + 1e-12);
  EXPECT_EQ(q.n_qubits(), 8u);
}

TEST(Hybridize, RejectsDisconnectedGroup) {
  auto net = ttn::TreeNetwork::binary(8, 4, ttn::Init::kRandomIsometric, 5);
  EXPECT_THROW(hybridize(net, {0, 3}, CircuitOptions{}), std::invalid_argument);
}

TEST(MultiQuantum, NormalizedAndIsometric) {
  MultiQuantumOptions opts;
  opts.layers = 2;
  std::vector<std::size_t> order(8);
  for (std::size_t i = 0; i < 8; ++i) order[i] = i;
  auto net = multi_quantum_network(8, order, opts);
  EXPECT_EQ(quantum_nodes(net).size(), 2u);
  EXPECT_NEAR(net.dense_state().norm(), 1.0, 1e-8);
  EXPECT_LT(net.max_isometry_violation(), 1e-8);
}

TEST(HybridSweep, LowersEnergyAndStaysVariational) {
  const auto op = ising8();
  auto classical = ttn::TreeNetwork::binary(8, 4, ttn::Init::kRandomIsometric, 6);
  auto net = hybridize(classical, upper_nodes(classical.topology()), CircuitOptions{});
  ttn::EnvironmentCache cache(op);
  const double start = ttn::dense_energy(net, op);
  SweepSettings s;
  s.vqe.max_iterations = 100;
  double last = start;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto rec = httn_sweep(net, cache, s, k);
    EXPECT_GT(rec.tomography_settings, 0u);
    last = ttn::dense_energy(net, op);
  }
  EXPECT_LT(last, start);
  EXPECT_GE(last, exact_ground(op) - 1e-9);
  EXPECT_EQ(net.center(), quantum_nodes(net).front());
}

TEST(HybridSweep, ReinitializeResetsP) {
  const auto op = ising8();
  auto classical = ttn::TreeNetwork::binary(8, 4, ttn::Init::kRandomIsometric, 7);
  auto net = hybridize(classical, upper_nodes(classical.topology()), CircuitOptions{});
  ttn::EnvironmentCache cache(op);
  SweepSettings s;
  s.strategy = Strategy::kReinitialize;
  s.vqe.max_iterations = 20;
  httn_sweep(net, cache, s, 0);
  const auto qt = quantum_nodes(net).front();
  reinit_from_classical(net, cache, qt, 16, CircuitOptions{});
  EXPECT_TRUE(net.quantum(qt).p_unitary());
  EXPECT_NEAR(net.dense_state().norm(), 1.0, 1e-10);
  httn_sweep(net, cache, s, 1);
  EXPECT_GE(ttn::dense_energy(net, op), exact_ground(op) - 1e-9);
}
