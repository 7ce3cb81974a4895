#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "httn/optim.hpp"
#include "httn/qsim.hpp"
#include "httn/quantum_tensor.hpp"
#include "httn/ttn.hpp"

namespace httn::hybrid {

/// Handling of the classical matrices {P_l} before a quantum tensor is optimized.
enum class Strategy {
  kKeepWithPenalty,  ///< (i) keep P, add the normalization penalty
  kProjectUnitary,   ///< (ii) replace each P by its closest unitary
  kReinitialize,     ///< (iii) re-encode from an optimized classical sub-network
};

std::string to_string(Strategy s);
/// Accepts "i", "ii", "iii".
Strategy strategy_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Loss and VQE
// ---------------------------------------------------------------------------

struct LossParts {
  double total = 0.0;    ///< energy + lambda |norm - 1|
  double energy = 0.0;   ///< <T|Heff|T>
  double norm = 1.0;     ///< <T|T>
  bool penalized = false;
};

/// Penalized loss of a quantum tensor sitting at the isometrization center.
/// With every P unitary the penalty is skipped and norm is exactly 1.
/// Noise (when enabled for the VQE) adds one draw per Heff term scaled by
/// the product of its per-leg spectral norms, plus one draw on the norm.
LossParts loss(const QuantumTensor& qt, const ttn::EffectiveHamiltonian& heff, double lambda,
               NoiseSource* noise = nullptr);

/// Exact loss and its parameter gradient.
double loss_and_gradient(const QuantumTensor& qt, const qsim::Params& params, const ttn::EffectiveHamiltonian& heff,
                         double lambda, Eigen::VectorXd& grad);

struct VqeOptions {
  std::size_t max_iterations = 1000;
  double lambda = 1000.0;
  NoiseSource* noise = nullptr;
  /// Step of the finite-difference gradient whose statistical error is emulated under noise.
  double gradient_step = 1e-5;
};

struct VqeResult {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> trace;  ///< loss after every optimizer iteration (noisy when noise is on)
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool diverged = false;  ///< a non-finite loss was met; best-seen parameters kept
  optim::LbfgsStatus status = optim::LbfgsStatus::kMaxIterations;
};

/// Minimizes the loss over the circuit parameters with L-BFGS and leaves
/// the best-seen parameters in `qt`.
VqeResult vqe_optimize(QuantumTensor& qt, const ttn::EffectiveHamiltonian& heff, const VqeOptions& options);

// ---------------------------------------------------------------------------
// Network construction
// ---------------------------------------------------------------------------

struct CircuitOptions {
  qsim::Topology topology = qsim::Topology::kLadder;
  std::size_t m = 2;        ///< layers fitted to the classical tensor
  std::size_t e = 0;        ///< extension layers
  double extension_sigma = 1e-2;
  bool wrap = false;        ///< add first-last qubit gates right away
  qsim::EncodingOptions encoding;
  std::uint64_t seed = 1;
};

/// Circuit and parameters approximating `target` (normalized internally):
/// ladder circuits use layer extraction; brick-wall circuits an overlap fit
/// from small random parameters. Returns the achieved fidelity as well.
qsim::Encoding encode_tensor(const Vector& target, std::size_t n_qubits, const CircuitOptions& options);

/// Nodes whose legs are all links (every layer above the bottom one).
std::vector<std::size_t> upper_nodes(const ttn::TreeTopology& topo);

/// Replaces the connected node set `group` of a classical network by one
/// quantum tensor encoding the contraction of the set. The center is moved
/// into the set first, so the result is normalized and its center is the
/// quantum tensor. `qt_node` receives the new node index.
ttn::TreeNetwork hybridize(ttn::TreeNetwork classical, const std::vector<std::size_t>& group,
                           const CircuitOptions& options, std::size_t* qt_node = nullptr);

struct MultiQuantumOptions {
  std::size_t qubits_per_leg = 2;
  std::size_t layers = 3;  ///< brick-wall layers per quantum tensor
  std::uint64_t seed = 1;
};

/// Binary network over `leaf_order` whose bottom nodes are classical and all
/// other nodes quantum (brick-wall circuits, parameters uniform in [-pi, pi)).
/// Nodes are isometrized toward the root, which is the center.
ttn::TreeNetwork multi_quantum_network(std::size_t n_sites, const std::vector<std::size_t>& leaf_order,
                                       const MultiQuantumOptions& options);

/// Strategy (iii): optimizes a classical binary sub-network at bond dimension
/// `chi` over the legs of the quantum tensor at `qt_node` (environment fixed),
/// encodes it with m layers, extends with e layers and resets P to identity.
void reinit_from_classical(ttn::TreeNetwork& net, ttn::EnvironmentCache& cache, std::size_t qt_node, std::size_t chi,
                           const CircuitOptions& options);

// ---------------------------------------------------------------------------
// Hybrid sweep
// ---------------------------------------------------------------------------

struct SweepSettings {
  Strategy strategy = Strategy::kProjectUnitary;
  VqeOptions vqe;
  std::size_t reinit_chi = 4;
  CircuitOptions reinit_circuit;  ///< circuit used by strategy (iii)
};

struct SweepRecord {
  double energy_estimate = 0.0;  ///< last local energy reported by the optimizers
  std::size_t vqe_iterations = 0;
  std::size_t tomography_settings = 0;  ///< Pauli strings measured during the sweep
  std::vector<double> vqe_losses;                ///< final loss of every VQE run
  std::vector<std::vector<double>> vqe_traces;  ///< per-iteration losses of every VQE run
  bool diverged = false;
};

/// Quantum nodes of a network in the sweep order starting at the first one.
std::vector<std::size_t> quantum_nodes(const ttn::TreeNetwork& net);

/// One hybrid sweep: every quantum tensor (strategy preparation + VQE),
/// then every classical tensor, both in preorder from the first quantum
/// tensor; the center ends on the first quantum tensor.
SweepRecord httn_sweep(ttn::TreeNetwork& net, ttn::EnvironmentCache& cache, const SweepSettings& settings,
                       std::size_t sweep_index);

}  // namespace httn::hybrid
