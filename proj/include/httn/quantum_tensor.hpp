#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "httn/qsim.hpp"
#include "httn/tensor.hpp"

namespace httn {

/// Gaussian statistical noise added to every estimated expectation value.
struct NoiseModel {
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  bool in_vqe = false;
  bool in_tomography = false;
};

/// Seeded stream of noise draws; draws are consumed in call order.
class NoiseSource {
 public:
  explicit NoiseSource(NoiseModel model = {});

  const NoiseModel& model() const { return model_; }
  bool vqe_enabled() const { return model_.epsilon > 0.0 && model_.in_vqe; }
  bool tomography_enabled() const { return model_.epsilon > 0.0 && model_.in_tomography; }
  /// One Normal(0, epsilon * scale) draw; 0 without consuming when epsilon = 0.
  double draw(double scale = 1.0);

 private:
  NoiseModel model_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// exact + one Normal(0, epsilon) draw.
double noisy_expectation(double exact, NoiseSource& noise);

/// Circuit-backed tensor T = (P_0 x P_1 x ...) |psi(theta)>. Leg l spans a
/// contiguous block of qubits; leg 0 holds the lowest-indexed qubits.
class QuantumTensor {
 public:
  QuantumTensor(qsim::CircuitSpec circuit, qsim::Params params, std::vector<std::size_t> leg_qubits);

  std::size_t n_legs() const { return leg_qubits_.size(); }
  std::size_t n_qubits() const { return circuit_.n_qubits; }
  std::size_t leg_qubits(std::size_t leg) const { return leg_qubits_.at(leg); }
  const std::vector<std::size_t>& leg_partition() const { return leg_qubits_; }
  std::size_t leg_dim(std::size_t leg) const { return std::size_t{1} << leg_qubits_.at(leg); }
  std::size_t leg_offset(std::size_t leg) const;

  const qsim::CircuitSpec& circuit() const { return circuit_; }
  const qsim::Params& params() const { return params_; }
  void set_params(qsim::Params params);
  void set_circuit(qsim::CircuitSpec circuit, qsim::Params params);

  /// Normalized circuit output, cached until the parameters change.
  const Vector& state() const;

  const Matrix& p(std::size_t leg) const { return p_.at(leg); }
  void set_p(std::size_t leg, Matrix p);
  void reset_p();
  bool p_unitary(double tol = 1e-12) const;

  /// Dense network tensor with legs in leg order (dims 2^{qubits}).
  DenseTensor network_tensor() const;

 private:
  qsim::CircuitSpec circuit_;
  qsim::Params params_;
  std::vector<std::size_t> leg_qubits_;
  std::vector<Matrix> p_;
  mutable std::optional<Vector> state_;
};

struct MeasurementMatrix {
  std::size_t leg = 0;
  Matrix m;
  double epsilon = 0.0;
  std::size_t settings = 0;  ///< Pauli strings measured
};

/// Where the {P_l} of the open leg enter the tomography.
enum class TomographyFold {
  kResult,       ///< measure Pauli strings on the circuit, transport afterwards
  kObservables,  ///< measure P^dagger sigma P on the circuit directly
};

/// Open-link contraction M_{a b} = sum conj(T_{a r}) O_{r r'} T_{b r'} of
/// the network tensor, reconstructed from Pauli expectations on the open leg.
/// `observables` has one entry per leg (nullopt = identity); the open leg's
/// entry must be nullopt.
MeasurementMatrix open_link_contraction(const QuantumTensor& qt,
                                        const std::vector<std::optional<Matrix>>& observables,
                                        std::size_t open_leg, NoiseSource* noise = nullptr,
                                        TomographyFold fold = TomographyFold::kResult);

/// Family of circuit states indexed by one classical index (same circuit,
/// one parameter vector per value) on quantum legs.
struct ClassicalIndexTensor {
  qsim::CircuitSpec circuit;
  std::vector<qsim::Params> params;
  std::vector<std::size_t> leg_qubits;
};

/// M_{i' i} = <psi^{i'}| O |psi^{i}> over the classical index, every
/// quantum leg contracted with its observable (nullopt = identity). With
/// noise, real and imaginary parts of every overlap receive one draw each.
MeasurementMatrix classical_index_contraction(const ClassicalIndexTensor& t,
                                              const std::vector<std::optional<Matrix>>& observables,
                                              NoiseSource* noise = nullptr);

struct IsometrizationResult {
  Matrix r;                 ///< non-isometric part, to be absorbed by the neighbour
  MeasurementMatrix measured;
};

/// Measures M on `leg`, factors M = R^dagger R with R = sqrt(D) V^dagger and
/// composes R^{-1} (pseudo-inverse) into the leg's P matrix.
IsometrizationResult implicit_isometrize(QuantumTensor& qt, std::size_t leg, NoiseSource* noise = nullptr,
                                         TomographyFold fold = TomographyFold::kResult);

/// Classical neighbour: N'_{i..} = sum_l r_{il} N_{l..} on `leg`.
void absorb_r(DenseTensor& neighbor, std::size_t leg, const Matrix& r);
/// Quantum neighbour: P_leg <- r P_leg.
void absorb_r(QuantumTensor& neighbor, std::size_t leg, const Matrix& r);

/// Frobenius-closest unitary U V^dagger of p = U S V^dagger.
Matrix project_to_unitary(const Matrix& p);

/// One measurement setting: basis changes per leg, then a diagonal observable.
struct MeasurementSetting {
  cplx weight{1.0, 0.0};
  std::vector<Matrix> basis_change;       ///< per leg, applied to the state before measuring
  std::vector<Eigen::VectorXd> diagonal;  ///< per leg eigenvalues
};

struct MeasurementPlan {
  std::vector<MeasurementSetting> settings;
  std::size_t setting_count() const { return settings.size(); }
};

/// Diagonalizes each leg observable O_l = U_l D_l U_l^dagger; one setting.
MeasurementPlan local_diagonalize(const std::vector<Matrix>& per_leg_obs);

/// Expectation of the plan on a state with the given leg partition.
double evaluate_plan(const MeasurementPlan& plan, const Vector& state, std::span<const std::size_t> leg_qubits,
                     NoiseSource* noise = nullptr);

/// <psi| (x_l P_l^dagger O_l P_l) |psi> through the local-diagonalization
/// pipeline; nullopt observables stand for the identity.
double expect_qt(const QuantumTensor& qt, const std::vector<std::optional<Matrix>>& per_leg_obs,
                 NoiseSource* noise = nullptr);

enum class ContractionOrder { kClassicalFirst, kQuantumFirst };

struct ContractionCost {
  std::size_t classical_first = 0;
  std::size_t quantum_first = 0;
};

/// Setting counts for evaluating an open-leg contraction: classical-first
/// needs M settings, quantum-first M * 3^q.
ContractionCost plan_contraction(std::size_t open_leg_qubits, std::size_t samples_per_expectation);
std::size_t plan_contraction(ContractionOrder order, std::size_t open_leg_qubits,
                             std::size_t samples_per_expectation);

}  // namespace httn
