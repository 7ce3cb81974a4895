#include <cmath>
#include <numbers>
#include <random>

#include "httn/optim.hpp"
#include "httn/qsim.hpp"

namespace httn::qsim {

double fidelity(const Vector& a, const Vector& b) { return std::norm(a.dot(b)); }

Params fit_gate(const Gate4& target, std::size_t restarts, std::uint64_t seed, double* infidelity) {
  auto objective = [&target](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const GateJacobian jac = cartan_jacobian({x.data(), kGateParams});
    const cplx t = (jac.u.conjugate().cwiseProduct(target)).sum();
    for (std::size_t k = 0; k < kGateParams; ++k) {
      const cplx dt = (jac.d[k].conjugate().cwiseProduct(target)).sum();
      grad[k] = -2.0 / 16.0 * (std::conj(t) * dt).real();
    }
    return 1.0 - std::norm(t) / 16.0;
  };
  optim::LbfgsOptions opt;
  opt.max_iterations = 500;
  opt.gradient_tolerance = 1e-12;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-std::numbers::pi, std::numbers::pi);
  Params best = Params::Zero(kGateParams);
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r <= restarts; ++r) {
    Params x0 = Params::Zero(kGateParams);
    if (r > 0)
      for (auto& v : x0) v = uniform(rng);
    const auto res = optim::lbfgs_minimize(objective, x0, opt);
    if (res.value < best_value) {
      best_value = res.value;
      best = res.x;
    }
    if (best_value < 1e-15) break;
  }
  if (infidelity) *infidelity = best_value;
  return best;
}

Params fit_circuit(const CircuitSpec& circ, Params params, const Vector& target, std::size_t iterations) {
  if (iterations == 0) return params;
  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    Vector psi = simulate(circ, x);
    const cplx ov = target.dot(psi);
    grad = -gradient_from_costate(circ, x, psi, target * ov);
    return 1.0 - std::norm(ov);
  };
  optim::LbfgsOptions opt;
  opt.max_iterations = iterations;
  opt.gradient_tolerance = 1e-12;
  return optim::lbfgs_minimize(objective, std::move(params), opt).x;
}

namespace {

using MpsTensor = std::vector<RowMajorMatrix>;  // per site: rows = left bond, cols = (s, right bond)

// Right-to-left SVD sweep truncating to bond dimension 2; the returned
// tensors are right-canonical except the first, which carries the norm.
std::vector<RowMajorMatrix> truncate_to_bond_two(const Vector& psi, std::size_t n) {
  std::vector<RowMajorMatrix> b(n);
  Vector c = psi;
  Eigen::Index rb = 1;
  for (std::size_t k = n - 1; k >= 1; --k) {
    const Eigen::Index rows = Eigen::Index{1} << k;
    Eigen::Map<const RowMajorMatrix> m(c.data(), rows, 2 * rb);
    Eigen::BDCSVD<Matrix> svd(Matrix(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    Eigen::Index keep = 0;
    while (keep < std::min<Eigen::Index>(2, s.size()) && s[keep] > 1e-14 * std::max(1.0, s[0])) ++keep;
    keep = std::max<Eigen::Index>(keep, 1);
    Matrix u = svd.matrixU().leftCols(keep);
    Matrix vh = svd.matrixV().leftCols(keep).adjoint();
    // fix phases: the largest entry of each row of vh becomes real positive
    for (Eigen::Index r = 0; r < keep; ++r) {
      Eigen::Index arg;
      vh.row(r).cwiseAbs().maxCoeff(&arg);
      const cplx ph = vh(r, arg) / std::abs(vh(r, arg));
      vh.row(r) *= std::conj(ph);
      u.col(r) *= ph;
    }
    b[k] = vh;
    Matrix next = u * s.head(keep).asDiagonal();
    RowMajorMatrix next_rm = next;
    c = Eigen::Map<const Vector>(next_rm.data(), next_rm.size());
    rb = keep;
  }
  RowMajorMatrix first = Eigen::Map<const RowMajorMatrix>(c.data(), 1, 2 * rb);
  first /= first.norm();
  b[0] = first;
  return b;
}

// Unitary whose columns at `inputs` equal `specified`, with the remaining
// columns chosen as close to the identity as possible.
Gate4 complete_unitary(const Matrix& specified, const std::vector<int>& inputs) {
  const int k = static_cast<int>(inputs.size());
  Matrix aug(4, k + 4);
  aug << specified, Matrix::Identity(4, 4);
  Eigen::HouseholderQR<Matrix> qr(aug);
  Matrix q = qr.householderQ() * Matrix::Identity(4, 4);
  Matrix complement = q.rightCols(4 - k);
  std::vector<int> others;
  for (int c = 0; c < 4; ++c)
    if (std::find(inputs.begin(), inputs.end(), c) == inputs.end()) others.push_back(c);
  Matrix e = Matrix::Zero(4, 4 - k);
  for (int j = 0; j < 4 - k; ++j) e(others[j], j) = 1.0;
  Gate4 g;
  if (4 - k > 0) {
    Eigen::JacobiSVD<Matrix> svd(complement.adjoint() * e, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix w = complement * svd.matrixU() * svd.matrixV().adjoint();
    for (int j = 0; j < 4 - k; ++j) g.col(others[j]) = w.col(j);
  }
  for (int j = 0; j < k; ++j) g.col(inputs[j]) = specified.col(j);
  return g;
}

// Exact gates of one ladder layer preparing the bond-two MPS from |0...0>.
std::vector<Gate4> ladder_layer_gates(const std::vector<RowMajorMatrix>& b, std::size_t n) {
  std::vector<Gate4> gates;
  if (n == 2) {
    // full state on two qubits
    Matrix col(4, 1);
    const RowMajorMatrix c = b[0].reshaped<Eigen::RowMajor>(2, b[0].cols() / 2) * b[1];
    for (int s = 0; s < 2; ++s)
      for (int t = 0; t < 2; ++t) col(2 * s + t, 0) = c(s, t);
    gates.push_back(complete_unitary(col, {0}));
    return gates;
  }
  auto bond = [](const RowMajorMatrix& m) { return m.cols() / 2; };
  {
    Matrix col = Matrix::Zero(4, 1);
    const Eigen::Index rb = bond(b[0]);
    for (int s = 0; s < 2; ++s)
      for (Eigen::Index a = 0; a < rb; ++a) col(2 * s + a, 0) = b[0](0, s * rb + a);
    gates.push_back(complete_unitary(col, {0}));
  }
  for (std::size_t j = 1; j + 2 < n; ++j) {
    const Eigen::Index lb = b[j].rows(), rb = bond(b[j]);
    Matrix cols = Matrix::Zero(4, lb);
    std::vector<int> inputs;
    for (Eigen::Index a = 0; a < lb; ++a) {
      inputs.push_back(static_cast<int>(2 * a));
      for (int s = 0; s < 2; ++s)
        for (Eigen::Index a2 = 0; a2 < rb; ++a2) cols(2 * s + a2, a) = b[j](a, s * rb + a2);
    }
    gates.push_back(complete_unitary(cols, inputs));
  }
  {
    const RowMajorMatrix& bl = b[n - 2];
    const Eigen::Index lb = bl.rows(), mid = bond(bl);
    Matrix cols = Matrix::Zero(4, lb);
    std::vector<int> inputs;
    for (Eigen::Index a = 0; a < lb; ++a) {
      inputs.push_back(static_cast<int>(2 * a));
      for (int s = 0; s < 2; ++s)
        for (int t = 0; t < 2; ++t) {
          cplx v = 0.0;
          for (Eigen::Index m = 0; m < mid; ++m) v += bl(a, s * mid + m) * b[n - 1](m, t);
          cols(2 * s + t, a) = v;
        }
    }
    gates.push_back(complete_unitary(cols, inputs));
  }
  return gates;
}

Encoding disentangle(const Vector& target, std::size_t n, std::size_t m, const EncodingOptions& options) {
  Vector current = target;
  std::vector<Params> layers;
  for (std::size_t round = 0; round < m; ++round) {
    const auto b = truncate_to_bond_two(current, n);
    const auto exact = ladder_layer_gates(b, n);
    Params layer(kGateParams * exact.size());
    CircuitSpec single = ladder(n, 1);
    for (std::size_t g = 0; g < exact.size(); ++g)
      layer.segment(kGateParams * g, kGateParams) =
          fit_gate(exact[g], options.gate_fit_restarts, options.seed + 7919 * round + g);
    // undo the layer: apply the adjoint gates in reverse order
    for (std::size_t g = exact.size(); g-- > 0;)
      apply_gate(current, n, g, g + 1,
                 cartan_unitary({layer.data() + kGateParams * g, kGateParams}).adjoint());
    layers.push_back(layer);
  }
  Encoding enc;
  enc.circuit = ladder(n, m);
  enc.params.resize(enc.circuit.n_params());
  // the last extracted layer acts first
  Eigen::Index offset = 0;
  for (std::size_t l = layers.size(); l-- > 0;) {
    enc.params.segment(offset, layers[l].size()) = layers[l];
    offset += layers[l].size();
  }
  enc.params = fit_circuit(enc.circuit, enc.params, target, options.polish_iterations);
  enc.fidelity = fidelity(target, simulate(enc.circuit, enc.params));
  return enc;
}

}  // namespace

Encoding encode_state(const Vector& target, std::size_t n_qubits, std::size_t m, const EncodingOptions& options) {
  if (n_qubits < 2 || n_qubits > kMaxQubits)
    throw std::invalid_argument("encoding supports 2 to 16 qubits");
  if (target.size() != (Eigen::Index{1} << n_qubits))
    throw std::invalid_argument("target length does not match the qubit count");
  if (m == 0) throw std::invalid_argument("encoding needs at least one layer");
  const Vector normalized = target / target.norm();
  Encoding best = disentangle(normalized, n_qubits, 1, options);
  for (std::size_t layers = 2; layers <= m; ++layers) {
    Encoding fresh = disentangle(normalized, n_qubits, layers, options);
    if (fresh.fidelity < best.fidelity) {
      // warm start: previous solution preceded by an identity layer
      Encoding warm;
      warm.circuit = ladder(n_qubits, layers);
      warm.params = Params::Zero(warm.circuit.n_params());
      warm.params.tail(best.params.size()) = best.params;
      warm.params = fit_circuit(warm.circuit, warm.params, normalized, options.polish_iterations);
      warm.fidelity = fidelity(normalized, simulate(warm.circuit, warm.params));
      if (warm.fidelity < best.fidelity) {
        warm.params = Params::Zero(warm.circuit.n_params());
        warm.params.tail(best.params.size()) = best.params;
        warm.fidelity = best.fidelity;
      }
      fresh = warm.fidelity > fresh.fidelity ? warm : fresh;
    }
    best = fresh;
  }
  return best;
}

}  // namespace httn::qsim
