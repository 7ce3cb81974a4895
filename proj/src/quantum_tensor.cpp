#include "httn/quantum_tensor.hpp"

#include <numeric>

namespace httn {

NoiseSource::NoiseSource(NoiseModel model) : model_(model), rng_(model.seed) {
  if (model.epsilon < 0.0) throw std::invalid_argument("noise epsilon must be nonnegative");
}

double NoiseSource::draw(double scale) {
  if (model_.epsilon == 0.0) return 0.0;
  return model_.epsilon * scale * normal_(rng_);
}

double noisy_expectation(double exact, NoiseSource& noise) { return exact + noise.draw(); }

QuantumTensor::QuantumTensor(qsim::CircuitSpec circuit, qsim::Params params, std::vector<std::size_t> leg_qubits)
    : circuit_(std::move(circuit)), params_(std::move(params)), leg_qubits_(std::move(leg_qubits)) {
  circuit_.validate();
  if (static_cast<std::size_t>(params_.size()) != circuit_.n_params())
    throw std::invalid_argument("parameter vector length must be 15 x gate count");
  if (leg_qubits_.empty()) throw std::invalid_argument("quantum tensor needs at least one leg");
  const std::size_t total = std::accumulate(leg_qubits_.begin(), leg_qubits_.end(), std::size_t{0});
  if (total != circuit_.n_qubits)
    throw std::invalid_argument("leg qubit counts must add up to the circuit's qubit count");
  for (auto q : leg_qubits_)
    if (q == 0) throw std::invalid_argument("every leg needs at least one qubit");
  reset_p();
}

std::size_t QuantumTensor::leg_offset(std::size_t leg) const {
  if (leg >= leg_qubits_.size()) throw std::out_of_range("leg index out of range");
  return std::accumulate(leg_qubits_.begin(), leg_qubits_.begin() + static_cast<std::ptrdiff_t>(leg),
                         std::size_t{0});
}

void QuantumTensor::set_params(qsim::Params params) {
  if (params.size() != params_.size()) throw std::invalid_argument("parameter vector length changed");
  params_ = std::move(params);
  state_.reset();
}

void QuantumTensor::set_circuit(qsim::CircuitSpec circuit, qsim::Params params) {
  circuit.validate();
  if (circuit.n_qubits != circuit_.n_qubits) throw std::invalid_argument("circuit qubit count changed");
  if (static_cast<std::size_t>(params.size()) != circuit.n_params())
    throw std::invalid_argument("parameter vector length must be 15 x gate count");
  circuit_ = std::move(circuit);
  params_ = std::move(params);
  state_.reset();
}

const Vector& QuantumTensor::state() const {
  if (!state_) state_ = qsim::simulate(circuit_, params_);
  return *state_;
}

void QuantumTensor::set_p(std::size_t leg, Matrix p) {
  const auto d = static_cast<Eigen::Index>(leg_dim(leg));
  if (p.rows() != d || p.cols() != d)
    throw std::invalid_argument("P matrix must be square with the leg dimension");
  p_[leg] = std::move(p);
}

void QuantumTensor::reset_p() {
  p_.clear();
  for (std::size_t l = 0; l < leg_qubits_.size(); ++l)
    p_.push_back(Matrix::Identity(static_cast<Eigen::Index>(leg_dim(l)), static_cast<Eigen::Index>(leg_dim(l))));
}

bool QuantumTensor::p_unitary(double tol) const {
  for (const auto& p : p_)
    if ((p.adjoint() * p - Matrix::Identity(p.rows(), p.cols())).norm() > tol) return false;
  return true;
}

DenseTensor QuantumTensor::network_tensor() const {
  Vector t = state();
  for (std::size_t l = 0; l < n_legs(); ++l)
    qsim::apply_register_operator(t, n_qubits(), leg_offset(l), leg_qubits_[l], p_[l]);
  std::vector<std::size_t> dims;
  for (std::size_t l = 0; l < n_legs(); ++l) dims.push_back(leg_dim(l));
  return DenseTensor::from_vector(t, dims);
}

void absorb_r(DenseTensor& neighbor, std::size_t leg, const Matrix& r) {
  if (leg >= neighbor.rank()) throw std::out_of_range("absorb_r: leg out of range");
  neighbor = apply_to_leg(neighbor, leg, r);
}

void absorb_r(QuantumTensor& neighbor, std::size_t leg, const Matrix& r) {
  if (r.cols() != neighbor.p(leg).rows() || r.rows() != r.cols())
    throw std::invalid_argument("absorb_r: R must be square with the leg dimension");
  neighbor.set_p(leg, r * neighbor.p(leg));
}

Matrix project_to_unitary(const Matrix& p) {
  if (p.rows() != p.cols()) throw std::invalid_argument("project_to_unitary needs a square matrix");
  Eigen::JacobiSVD<Matrix> svd(p, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace httn
