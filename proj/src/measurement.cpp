#include <cmath>

#include "httn/quantum_tensor.hpp"

namespace httn {

MeasurementPlan local_diagonalize(const std::vector<Matrix>& per_leg_obs) {
  MeasurementSetting setting;
  for (const auto& o : per_leg_obs) {
    if (o.rows() != o.cols()) throw std::invalid_argument("leg observable must be square");
    const Matrix off = o - Matrix(o.diagonal().asDiagonal());
    if (off.cwiseAbs().maxCoeff() == 0.0) {
      setting.basis_change.push_back(Matrix::Identity(o.rows(), o.cols()));
      setting.diagonal.push_back(o.diagonal().real());
      continue;
    }
    const MatrixEigh eig = eigh(o);
    setting.basis_change.push_back(eig.vectors.adjoint());
    setting.diagonal.push_back(eig.values);
  }
  MeasurementPlan plan;
  plan.settings.push_back(std::move(setting));
  return plan;
}

double evaluate_plan(const MeasurementPlan& plan, const Vector& state, std::span<const std::size_t> leg_qubits,
                     NoiseSource* noise) {
  std::size_t n = 0;
  for (auto q : leg_qubits) n += q;
  if (state.size() != (Eigen::Index{1} << n)) throw std::invalid_argument("state length does not match legs");
  double total = 0.0;
  for (const auto& s : plan.settings) {
    if (s.basis_change.size() != leg_qubits.size() || s.diagonal.size() != leg_qubits.size())
      throw std::invalid_argument("measurement setting does not match the leg partition");
    Vector phi = state;
    std::size_t first = 0;
    for (std::size_t l = 0; l < leg_qubits.size(); ++l) {
      qsim::apply_register_operator(phi, n, first, leg_qubits[l], s.basis_change[l]);
      first += leg_qubits[l];
    }
    // diagonal observable: product of per-leg eigenvalues of each basis state
    Eigen::VectorXd diag = Eigen::VectorXd::Ones(phi.size());
    std::size_t shift = n;
    double scale = 1.0;
    for (std::size_t l = 0; l < leg_qubits.size(); ++l) {
      shift -= leg_qubits[l];
      const std::uint64_t mask = (std::uint64_t{1} << leg_qubits[l]) - 1;
      for (Eigen::Index x = 0; x < phi.size(); ++x)
        diag[x] *= s.diagonal[l][static_cast<Eigen::Index>((static_cast<std::uint64_t>(x) >> shift) & mask)];
      scale *= s.diagonal[l].cwiseAbs().maxCoeff();
    }
    double value = phi.cwiseAbs2().dot(diag);
    if (noise) value += noise->draw(scale);
    total += (s.weight * value).real();
  }
  return total;
}

double expect_qt(const QuantumTensor& qt, const std::vector<std::optional<Matrix>>& per_leg_obs, NoiseSource* noise) {
  if (per_leg_obs.size() != qt.n_legs()) throw std::invalid_argument("one observable slot per leg expected");
  std::vector<Matrix> folded;
  for (std::size_t l = 0; l < qt.n_legs(); ++l) {
    const Matrix& p = qt.p(l);
    if (per_leg_obs[l]) {
      if (per_leg_obs[l]->rows() != p.rows() || per_leg_obs[l]->cols() != p.cols())
        throw std::invalid_argument("observable dimension does not match leg " + std::to_string(l));
      folded.push_back(p.adjoint() * *per_leg_obs[l] * p);
    } else {
      folded.push_back(p.adjoint() * p);
    }
  }
  return evaluate_plan(local_diagonalize(folded), qt.state(), qt.leg_partition(), noise);
}

ContractionCost plan_contraction(std::size_t open_leg_qubits, std::size_t samples_per_expectation) {
  std::size_t bases = 1;
  for (std::size_t i = 0; i < open_leg_qubits; ++i) bases *= 3;
  return {samples_per_expectation, samples_per_expectation * bases};
}

std::size_t plan_contraction(ContractionOrder order, std::size_t open_leg_qubits, std::size_t samples_per_expectation) {
  const ContractionCost c = plan_contraction(open_leg_qubits, samples_per_expectation);
  return order == ContractionOrder::kClassicalFirst ? c.classical_first : c.quantum_first;
}

}  // namespace httn
