#include "httn/qsim.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace httn::qsim {

std::string to_string(Topology t) {
  switch (t) {
    case Topology::kLadder: return "ladder";
    case Topology::kBrickWall: return "brick-wall";
    case Topology::kCustom: return "custom";
  }
  return "custom";
}

Topology topology_from_string(const std::string& s) {
  if (s == "ladder") return Topology::kLadder;
  if (s == "brick-wall") return Topology::kBrickWall;
  if (s == "custom") return Topology::kCustom;
  throw std::invalid_argument("unknown circuit topology '" + s + "'");
}

void CircuitSpec::validate() const {
  if (n_qubits == 0 || n_qubits > kMaxQubits)
    throw std::invalid_argument("circuit qubit count must be in [1, 16]");
  for (const auto& g : gates)
    if (g.q0 >= n_qubits || g.q1 >= n_qubits || g.q0 == g.q1)
      throw std::invalid_argument("gate qubits out of range or repeated");
  for (std::size_t i = 0; i < layer_starts.size(); ++i) {
    if (layer_starts[i] > gates.size() || (i > 0 && layer_starts[i] < layer_starts[i - 1]))
      throw std::invalid_argument("layer boundaries do not partition the gate list");
  }
  if (!gates.empty() && (layer_starts.empty() || layer_starts.front() != 0))
    throw std::invalid_argument("first layer must start at gate 0");
}

namespace {

std::vector<Gate> layer_gates(Topology topology, std::size_t n) {
  std::vector<Gate> out;
  if (topology == Topology::kLadder) {
    for (std::size_t q = 0; q + 1 < n; ++q) out.push_back({q, q + 1, false});
  } else if (topology == Topology::kBrickWall) {
    for (std::size_t q = 0; q + 1 < n; q += 2) out.push_back({q, q + 1, false});
    for (std::size_t q = 1; q + 1 < n; q += 2) out.push_back({q, q + 1, false});
  } else {
    throw std::invalid_argument("custom circuits have no default layer");
  }
  return out;
}

CircuitSpec layered(Topology topology, std::size_t n, std::size_t layers) {
  if (n < 2 || n > kMaxQubits) throw std::invalid_argument("layered circuits need 2 to 16 qubits");
  CircuitSpec c;
  c.n_qubits = n;
  c.topology = topology;
  for (std::size_t l = 0; l < layers; ++l) {
    c.layer_starts.push_back(c.gates.size());
    for (const auto& g : layer_gates(topology, n)) c.gates.push_back(g);
  }
  return c;
}

void check_params(const CircuitSpec& circ, const Params& params) {
  if (static_cast<std::size_t>(params.size()) != circ.n_params())
    throw std::invalid_argument("parameter vector length must be 15 x gate count");
}

std::span<const double> gate_params(const Params& params, std::size_t g) {
  return {params.data() + kGateParams * g, kGateParams};
}

}  // namespace

CircuitSpec ladder(std::size_t n_qubits, std::size_t layers) {
  return layered(Topology::kLadder, n_qubits, layers);
}

CircuitSpec brick_wall(std::size_t n_qubits, std::size_t layers) {
  return layered(Topology::kBrickWall, n_qubits, layers);
}

Vector simulate_from(const CircuitSpec& circ, const Params& params, Vector state) {
  check_params(circ, params);
  if (state.size() != (Eigen::Index{1} << circ.n_qubits))
    throw std::invalid_argument("initial state length does not match the circuit");
  for (std::size_t g = 0; g < circ.gates.size(); ++g)
    apply_gate(state, circ.n_qubits, circ.gates[g].q0, circ.gates[g].q1,
               cartan_unitary(gate_params(params, g)));
  return state;
}

Vector simulate(const CircuitSpec& circ, const Params& params) {
  Vector state = Vector::Zero(Eigen::Index{1} << circ.n_qubits);
  state[0] = 1.0;
  return simulate_from(circ, params, std::move(state));
}

double expect(const Vector& state, const pauli::OperatorSum& op) {
  return state.dot(pauli::apply_to_state(op, state)).real();
}

double expect(const Vector& state, std::span<const std::size_t> register_qubits,
              std::span<const Matrix> register_ops) {
  if (register_qubits.size() != register_ops.size())
    throw std::invalid_argument("one operator per register expected");
  std::size_t n = 0;
  for (auto q : register_qubits) n += q;
  if (state.size() != (Eigen::Index{1} << n)) throw std::invalid_argument("state length mismatch");
  Vector phi = state;
  std::size_t first = 0;
  for (std::size_t r = 0; r < register_qubits.size(); ++r) {
    apply_register_operator(phi, n, first, register_qubits[r], register_ops[r]);
    first += register_qubits[r];
  }
  return state.dot(phi).real();
}

Params gradient_from_costate(const CircuitSpec& circ, const Params& params, Vector psi, Vector lambda) {
  check_params(circ, params);
  const std::size_t n = circ.n_qubits;
  Params grad = Params::Zero(params.size());
  const std::uint64_t quarter = n >= 2 ? std::uint64_t{1} << (n - 2) : 0;
  for (std::size_t g = circ.gates.size(); g-- > 0;) {
    const auto& gate = circ.gates[g];
    const GateJacobian jac = cartan_jacobian(gate_params(params, g));
    const Gate4 udag = jac.u.adjoint();
    apply_gate(psi, n, gate.q0, gate.q1, udag);
    // C_ab = sum_rest conj(lambda[a, rest]) psi[b, rest]
    const std::size_t p0 = n - 1 - gate.q0, p1 = n - 1 - gate.q1;
    const std::size_t lo = std::min(p0, p1), hi = std::max(p0, p1);
    const std::uint64_t b0 = std::uint64_t{1} << p0, b1 = std::uint64_t{1} << p1;
    Gate4 c = Gate4::Zero();
    for (std::uint64_t i = 0; i < quarter; ++i) {
      std::uint64_t x = i;
      x = ((x >> lo) << (lo + 1)) | (x & ((std::uint64_t{1} << lo) - 1));
      x = ((x >> hi) << (hi + 1)) | (x & ((std::uint64_t{1} << hi) - 1));
      const std::uint64_t idx[4] = {x, x | b1, x | b0, x | b0 | b1};
      const cplx l[4] = {std::conj(lambda[idx[0]]), std::conj(lambda[idx[1]]), std::conj(lambda[idx[2]]),
                         std::conj(lambda[idx[3]])};
      const cplx p[4] = {psi[idx[0]], psi[idx[1]], psi[idx[2]], psi[idx[3]]};
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) c(a, b) += l[a] * p[b];
    }
    for (std::size_t k = 0; k < kGateParams; ++k)
      grad[kGateParams * g + k] = 2.0 * (jac.d[k].cwiseProduct(c)).sum().real();
    apply_gate(lambda, n, gate.q0, gate.q1, udag);
  }
  return grad;
}

Params gradient(const CircuitSpec& circ, const Params& params, const pauli::OperatorSum& op) {
  Vector psi = simulate(circ, params);
  Vector lambda = pauli::apply_to_state(op, psi);
  return gradient_from_costate(circ, params, std::move(psi), std::move(lambda));
}

std::pair<CircuitSpec, Params> extend_layers(const CircuitSpec& circ, const Params& params,
                                             std::size_t extra_layers, double sigma, std::uint64_t seed) {
  check_params(circ, params);
  if (sigma < 0.0) throw std::invalid_argument("sigma must be nonnegative");
  if (circ.topology == Topology::kCustom && extra_layers > 0)
    throw std::invalid_argument("custom circuits cannot be extended by layers");
  CircuitSpec out = circ;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> values(params.data(), params.data() + params.size());
  for (std::size_t l = 0; l < extra_layers; ++l) {
    out.layer_starts.push_back(out.gates.size());
    for (const auto& g : layer_gates(circ.topology, circ.n_qubits)) {
      out.gates.push_back(g);
      for (std::size_t k = 0; k < kGateParams; ++k) values.push_back(sigma * normal(rng));
    }
  }
  return {out, Eigen::Map<Params>(values.data(), values.size())};
}

std::pair<CircuitSpec, Params> add_wrap_gates(const CircuitSpec& circ, const Params& params) {
  check_params(circ, params);
  if (circ.n_qubits < 3) throw std::invalid_argument("wrap gates need at least three qubits");
  CircuitSpec out;
  out.n_qubits = circ.n_qubits;
  out.topology = circ.topology;
  std::vector<double> values;
  for (std::size_t l = 0; l < circ.layer_starts.size(); ++l) {
    const std::size_t begin = circ.layer_starts[l];
    const std::size_t end = l + 1 < circ.layer_starts.size() ? circ.layer_starts[l + 1] : circ.gates.size();
    out.layer_starts.push_back(out.gates.size());
    for (std::size_t g = begin; g < end; ++g) {
      out.gates.push_back(circ.gates[g]);
      auto p = gate_params(params, g);
      values.insert(values.end(), p.begin(), p.end());
    }
    out.gates.push_back({0, circ.n_qubits - 1, true});
    values.insert(values.end(), kGateParams, 0.0);
  }
  return {out, Eigen::Map<Params>(values.data(), values.size())};
}

std::string to_text(const CircuitSpec& circ, const Params& params) {
  check_params(circ, params);
  std::ostringstream out;
  out << std::setprecision(17);
  out << "qubits " << circ.n_qubits << '\n';
  out << "topology " << to_string(circ.topology) << '\n';
  out << "layers";
  for (auto s : circ.layer_starts) out << ' ' << s;
  out << '\n';
  for (std::size_t g = 0; g < circ.gates.size(); ++g) {
    const auto& gate = circ.gates[g];
    out << "gate " << gate.q0 << ' ' << gate.q1 << ' ' << (gate.wrap ? 1 : 0);
    for (double v : gate_params(params, g)) out << ' ' << v;
    out << '\n';
  }
  return out.str();
}

std::pair<CircuitSpec, Params> circuit_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line, word;
  CircuitSpec c;
  std::vector<double> values;
  bool have_qubits = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ls >> word;
    if (word == "qubits") {
      ls >> c.n_qubits;
      have_qubits = true;
    } else if (word == "topology") {
      std::string t;
      ls >> t;
      c.topology = topology_from_string(t);
    } else if (word == "layers") {
      std::size_t s;
      while (ls >> s) c.layer_starts.push_back(s);
    } else if (word == "gate") {
      Gate g;
      int wrap = 0;
      if (!(ls >> g.q0 >> g.q1 >> wrap)) throw std::invalid_argument("malformed gate line");
      g.wrap = wrap != 0;
      c.gates.push_back(g);
      for (std::size_t k = 0; k < kGateParams; ++k) {
        double v;
        if (!(ls >> v)) throw std::invalid_argument("gate line needs 15 parameters");
        values.push_back(v);
      }
    } else {
      throw std::invalid_argument("unknown circuit record '" + word + "'");
    }
  }
  if (!have_qubits) throw std::invalid_argument("circuit text lacks a qubit count");
  c.validate();
  return {c, Eigen::Map<Params>(values.data(), values.size())};
}

}  // namespace httn::qsim
