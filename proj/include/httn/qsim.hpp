#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "httn/pauli.hpp"
#include "httn/tensor.hpp"

namespace httn::qsim {

inline constexpr std::size_t kGateParams = 15;
inline constexpr std::size_t kMaxQubits = 16;

using Params = Eigen::VectorXd;
using Gate4 = Eigen::Matrix4cd;

/// Rz(a) Ry(b) Rz(c).
Eigen::Matrix2cd single_qubit_unitary(double a, double b, double c);

/// (A1 x A2) exp(i(tx XX + ty YY + tz ZZ)) (B1 x B2). Parameter layout:
/// [B1(3), B2(3), tx, ty, tz, A1(3), A2(3)]; A1 and B1 act on the first qubit.
Gate4 cartan_unitary(std::span<const double> theta);

/// Unitary and its partial derivatives with respect to all 15 parameters.
struct GateJacobian {
  Gate4 u;
  std::array<Gate4, kGateParams> d;
};
GateJacobian cartan_jacobian(std::span<const double> theta);

enum class Topology { kLadder, kBrickWall, kCustom };
std::string to_string(Topology t);
Topology topology_from_string(const std::string& s);

struct Gate {
  std::size_t q0 = 0;
  std::size_t q1 = 1;
  bool wrap = false;
};

struct CircuitSpec {
  std::size_t n_qubits = 0;
  std::vector<Gate> gates;
  Topology topology = Topology::kCustom;
  /// Index of the first gate of every layer; partitions the gate list.
  std::vector<std::size_t> layer_starts;

  std::size_t n_params() const { return kGateParams * gates.size(); }
  std::size_t n_layers() const { return layer_starts.size(); }
  /// Throws on out-of-range qubits, repeated qubits or inconsistent layers.
  void validate() const;
};

/// Nearest-neighbour staircase (0,1), (1,2), ..., (n-2,n-1) per layer.
CircuitSpec ladder(std::size_t n_qubits, std::size_t layers);
/// Even bricks followed by odd bricks per layer.
CircuitSpec brick_wall(std::size_t n_qubits, std::size_t layers);

/// Applies a two-qubit gate; the first qubit is the more significant index
/// of the 4x4 matrix. Qubit 0 is the most significant bit of the state.
void apply_gate(Vector& state, std::size_t n_qubits, std::size_t q0, std::size_t q1, const Gate4& u);

/// Gates applied in listed order to |0...0>.
Vector simulate(const CircuitSpec& circ, const Params& params);
/// Gates applied in listed order to an arbitrary initial state.
Vector simulate_from(const CircuitSpec& circ, const Params& params, Vector state);

/// Applies `op` to the contiguous qubit register [first, first + count).
void apply_register_operator(Vector& state, std::size_t n_qubits, std::size_t first, std::size_t count,
                             const Matrix& op);

double expect(const Vector& state, const pauli::OperatorSum& op);
/// Expectation of a tensor product of register operators; registers are
/// consecutive blocks of `register_qubits` qubits.
double expect(const Vector& state, std::span<const std::size_t> register_qubits,
              std::span<const Matrix> register_ops);

/// d/dtheta of Re<psi(theta)| costate-generating functional, computed as
/// 2 Re <costate| d psi> by reverse accumulation. `final_state` is the
/// simulated output of the circuit.
Params gradient_from_costate(const CircuitSpec& circ, const Params& params, Vector final_state,
                             Vector costate);
/// Exact gradient of <psi(theta)|op|psi(theta)>.
Params gradient(const CircuitSpec& circ, const Params& params, const pauli::OperatorSum& op);

struct EncodingOptions {
  /// Fitting restarts per gate when converting an exact gate to parameters.
  std::size_t gate_fit_restarts = 12;
  /// Iterations of the final overlap polish over all parameters (0 disables).
  std::size_t polish_iterations = 300;
  std::uint64_t seed = 1234;
};

struct Encoding {
  CircuitSpec circuit;
  Params params;
  double fidelity = 0.0;
};

/// Finds Cartan parameters reproducing `target` up to a global phase.
Params fit_gate(const Gate4& target, std::size_t restarts, std::uint64_t seed, double* infidelity = nullptr);

/// Approximates `target` on n qubits with an m-layer ladder circuit by
/// iterative layer extraction (bond-dimension-2 truncation, exact encoding,
/// disentangling) followed by an overlap polish.
Encoding encode_state(const Vector& target, std::size_t n_qubits, std::size_t m,
                      const EncodingOptions& options = {});

/// Maximizes |<target|psi(params)>|^2 from the given start with L-BFGS.
Params fit_circuit(const CircuitSpec& circ, Params params, const Vector& target, std::size_t iterations);

/// |<a|b>|^2 for normalized states.
double fidelity(const Vector& a, const Vector& b);

/// Appends `extra_layers` layers of the circuit's topology with parameters
/// drawn from Normal(0, sigma^2).
std::pair<CircuitSpec, Params> extend_layers(const CircuitSpec& circ, const Params& params,
                                             std::size_t extra_layers, double sigma, std::uint64_t seed);

/// Inserts one identity gate on (0, n-1) at the end of every layer.
std::pair<CircuitSpec, Params> add_wrap_gates(const CircuitSpec& circ, const Params& params);

/// Structured text listing with full double precision; round-trip exact.
std::string to_text(const CircuitSpec& circ, const Params& params);
std::pair<CircuitSpec, Params> circuit_from_text(const std::string& text);

}  // namespace httn::qsim
