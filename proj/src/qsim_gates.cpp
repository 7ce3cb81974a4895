#include "httn/qsim.hpp"

#include <cmath>

namespace httn::qsim {

namespace {

const cplx kI{0.0, 1.0};

Gate4 kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Gate4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Eigen::Matrix2cd rz(double a) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = std::exp(-0.5 * kI * a);
  m(1, 1) = std::exp(0.5 * kI * a);
  return m;
}

Eigen::Matrix2cd ry(double b) {
  Eigen::Matrix2cd m;
  const double c = std::cos(0.5 * b), s = std::sin(0.5 * b);
  m << c, -s, s, c;
  return m;
}

Eigen::Matrix2cd pauli2(pauli::Pauli p) { return pauli::matrix(p); }

struct SingleJacobian {
  Eigen::Matrix2cd u;
  std::array<Eigen::Matrix2cd, 3> d;
};

SingleJacobian single_jacobian(double a, double b, double c) {
  const Eigen::Matrix2cd z = pauli2(pauli::Pauli::Z), y = pauli2(pauli::Pauli::Y);
  const Eigen::Matrix2cd ra = rz(a), rb = ry(b), rc = rz(c);
  SingleJacobian j;
  j.u = ra * rb * rc;
  j.d[0] = -0.5 * kI * z * j.u;
  j.d[1] = ra * (-0.5 * kI * y) * rb * rc;
  j.d[2] = j.u * (-0.5 * kI * z);
  return j;
}

const std::array<Gate4, 3>& interaction_generators() {
  static const std::array<Gate4, 3> g = [] {
    using pauli::Pauli;
    return std::array<Gate4, 3>{kron(pauli2(Pauli::X), pauli2(Pauli::X)),
                                kron(pauli2(Pauli::Y), pauli2(Pauli::Y)),
                                kron(pauli2(Pauli::Z), pauli2(Pauli::Z))};
  }();
  return g;
}

void check_count(std::span<const double> theta) {
  if (theta.size() != kGateParams)
    throw std::invalid_argument("Cartan gate needs exactly 15 parameters, got " +
                                std::to_string(theta.size()));
}

}  // namespace

Eigen::Matrix2cd single_qubit_unitary(double a, double b, double c) { return rz(a) * ry(b) * rz(c); }

Gate4 cartan_unitary(std::span<const double> theta) {
  check_count(theta);
  const auto& gen = interaction_generators();
  Gate4 n = Gate4::Identity();
  for (int k = 0; k < 3; ++k)
    n = n * (std::cos(theta[6 + k]) * Gate4::Identity() + kI * std::sin(theta[6 + k]) * gen[k]);
  const Gate4 b = kron(single_qubit_unitary(theta[0], theta[1], theta[2]),
                       single_qubit_unitary(theta[3], theta[4], theta[5]));
  const Gate4 a = kron(single_qubit_unitary(theta[9], theta[10], theta[11]),
                       single_qubit_unitary(theta[12], theta[13], theta[14]));
  return a * n * b;
}

GateJacobian cartan_jacobian(std::span<const double> theta) {
  check_count(theta);
  const auto& gen = interaction_generators();
  Gate4 n = Gate4::Identity();
  for (int k = 0; k < 3; ++k)
    n = n * (std::cos(theta[6 + k]) * Gate4::Identity() + kI * std::sin(theta[6 + k]) * gen[k]);
  const SingleJacobian b1 = single_jacobian(theta[0], theta[1], theta[2]);
  const SingleJacobian b2 = single_jacobian(theta[3], theta[4], theta[5]);
  const SingleJacobian a1 = single_jacobian(theta[9], theta[10], theta[11]);
  const SingleJacobian a2 = single_jacobian(theta[12], theta[13], theta[14]);
  const Gate4 a = kron(a1.u, a2.u), b = kron(b1.u, b2.u);
  const Gate4 an = a * n;
  GateJacobian j;
  j.u = an * b;
  for (int k = 0; k < 3; ++k) {
    j.d[k] = an * kron(b1.d[k], b2.u);
    j.d[3 + k] = an * kron(b1.u, b2.d[k]);
    j.d[6 + k] = a * (kI * gen[k]) * n * b;
    j.d[9 + k] = kron(a1.d[k], a2.u) * n * b;
    j.d[12 + k] = kron(a1.u, a2.d[k]) * n * b;
  }
  return j;
}

void apply_gate(Vector& state, std::size_t n_qubits, std::size_t q0, std::size_t q1, const Gate4& u) {
  if (q0 >= n_qubits || q1 >= n_qubits || q0 == q1)
    throw std::invalid_argument("gate qubits out of range or repeated");
  const std::size_t p0 = n_qubits - 1 - q0, p1 = n_qubits - 1 - q1;
  const std::size_t lo = std::min(p0, p1), hi = std::max(p0, p1);
  const std::uint64_t b0 = std::uint64_t{1} << p0, b1 = std::uint64_t{1} << p1;
  const std::uint64_t quarter = std::uint64_t{1} << (n_qubits - 2);
  cplx* data = state.data();
  for (std::uint64_t i = 0; i < quarter; ++i) {
    // insert zero bits at positions lo and hi
    std::uint64_t x = i;
    x = ((x >> lo) << (lo + 1)) | (x & ((std::uint64_t{1} << lo) - 1));
    x = ((x >> hi) << (hi + 1)) | (x & ((std::uint64_t{1} << hi) - 1));
    const std::uint64_t idx[4] = {x, x | b1, x | b0, x | b0 | b1};
    const cplx v0 = data[idx[0]], v1 = data[idx[1]], v2 = data[idx[2]], v3 = data[idx[3]];
    for (int r = 0; r < 4; ++r)
      data[idx[r]] = u(r, 0) * v0 + u(r, 1) * v1 + u(r, 2) * v2 + u(r, 3) * v3;
  }
}

void apply_register_operator(Vector& state, std::size_t n_qubits, std::size_t first, std::size_t count,
                             const Matrix& op) {
  if (first + count > n_qubits) throw std::invalid_argument("register exceeds the qubit count");
  const Eigen::Index reg = Eigen::Index{1} << count;
  if (op.rows() != reg || op.cols() != reg)
    throw std::invalid_argument("register operator dimension does not match its register");
  const Eigen::Index post = Eigen::Index{1} << (n_qubits - first - count);
  const Eigen::Index pre = Eigen::Index{1} << first;
  RowMajorMatrix buffer(reg, post);
  for (Eigen::Index p = 0; p < pre; ++p) {
    Eigen::Map<RowMajorMatrix> block(state.data() + p * reg * post, reg, post);
    buffer.noalias() = op * block;
    block = buffer;
  }
}

}  // namespace httn::qsim
