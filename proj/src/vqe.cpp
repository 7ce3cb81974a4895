#include <cmath>
#include <limits>

#include "httn/hybrid.hpp"

namespace httn::hybrid {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kKeepWithPenalty: return "i";
    case Strategy::kProjectUnitary: return "ii";
    case Strategy::kReinitialize: return "iii";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "i") return Strategy::kKeepWithPenalty;
  if (s == "ii") return Strategy::kProjectUnitary;
  if (s == "iii") return Strategy::kReinitialize;
  throw std::invalid_argument("unknown strategy '" + s + "' (expected i, ii or iii)");
}

namespace {

bool is_identity(const Matrix& m, double tol) {
  return (m - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

double spectral_norm(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues()[0];
}

// Loss terms folded through the P matrices: per term, optional per-leg
// operators acting on the circuit state.
struct FoldedLoss {
  std::vector<cplx> weights;
  std::vector<std::vector<std::optional<Matrix>>> ops;
  std::vector<double> scales;  // |w| times product of per-leg spectral norms
  std::vector<std::optional<Matrix>> norm_ops;
  double norm_scale = 1.0;
  bool penalized = false;
};

FoldedLoss fold(const QuantumTensor& qt, const ttn::EffectiveHamiltonian& heff) {
  const std::size_t legs = qt.n_legs();
  if (heff.dims.size() != legs) throw std::invalid_argument("effective Hamiltonian does not match the quantum tensor");
  for (std::size_t l = 0; l < legs; ++l)
    if (heff.dims[l] != qt.leg_dim(l)) throw std::invalid_argument("effective Hamiltonian leg dimension mismatch");
  FoldedLoss f;
  std::vector<std::optional<Matrix>> gram(legs);
  std::vector<double> gram_norm(legs, 1.0);
  for (std::size_t l = 0; l < legs; ++l) {
    const Matrix& p = qt.p(l);
    if (is_identity(p, 0.0)) continue;
    Matrix g = p.adjoint() * p;
    if (is_identity(g, 1e-12)) continue;
    gram_norm[l] = spectral_norm(g);
    gram[l] = std::move(g);
    f.penalized = true;
  }
  for (const auto& t : heff.terms) {
    std::vector<std::optional<Matrix>> ops(legs);
    double scale = std::abs(t.weight);
    for (std::size_t l = 0; l < legs; ++l) {
      if (t.legs[l]) {
        const Matrix& p = qt.p(l);
        ops[l] = is_identity(p, 0.0) ? *t.legs[l] : Matrix(p.adjoint() * *t.legs[l] * p);
        scale *= spectral_norm(*ops[l]);
      } else if (gram[l]) {
        ops[l] = gram[l];
        scale *= gram_norm[l];
      }
    }
    f.weights.push_back(t.weight);
    f.ops.push_back(std::move(ops));
    f.scales.push_back(scale);
  }
  if (f.penalized) {
    f.norm_ops = gram;
    for (auto g : gram_norm) f.norm_scale *= g;
  }
  return f;
}

Vector apply_ops(const QuantumTensor& qt, Vector v, const std::vector<std::optional<Matrix>>& ops) {
  for (std::size_t l = 0; l < ops.size(); ++l)
    if (ops[l]) qsim::apply_register_operator(v, qt.n_qubits(), qt.leg_offset(l), qt.leg_qubits(l), *ops[l]);
  return v;
}

struct Evaluation {
  LossParts parts;
  Vector costate;  // dLoss/d<psi| direction (Hermitian operators applied to psi)
  double noise_scale = 0.0;  // sqrt of the summed squared draw scales
};

Evaluation evaluate(const QuantumTensor& qt, const FoldedLoss& f, const Vector& psi, double lambda, bool want_costate,
                    NoiseSource* noise) {
  Evaluation e;
  if (want_costate) e.costate = Vector::Zero(psi.size());
  double energy = 0.0, var = 0.0;
  for (std::size_t t = 0; t < f.ops.size(); ++t) {
    const Vector phi = apply_ops(qt, psi, f.ops[t]);
    energy += (f.weights[t] * psi.dot(phi)).real();
    if (want_costate) e.costate += f.weights[t] * phi;
    if (noise) energy += noise->draw(f.scales[t]);
    var += f.scales[t] * f.scales[t];
  }
  e.parts.energy = energy;
  e.parts.penalized = f.penalized;
  e.parts.total = energy;
  if (f.penalized) {
    const Vector nphi = apply_ops(qt, psi, f.norm_ops);
    double norm = psi.dot(nphi).real();
    if (noise) norm += noise->draw(f.norm_scale);
    e.parts.norm = norm;
    e.parts.total += lambda * std::abs(norm - 1.0);
    var += (lambda * f.norm_scale) * (lambda * f.norm_scale);
    if (want_costate) {
      const double sign = norm > 1.0 ? 1.0 : (norm < 1.0 ? -1.0 : 0.0);
      e.costate += (lambda * sign) * nphi;
    }
  }
  e.noise_scale = std::sqrt(var);
  return e;
}

}  // namespace

LossParts loss(const QuantumTensor& qt, const ttn::EffectiveHamiltonian& heff, double lambda, NoiseSource* noise) {
  NoiseSource* active = noise && noise->vqe_enabled() ? noise : nullptr;
  return evaluate(qt, fold(qt, heff), qt.state(), lambda, false, active).parts;
}

double loss_and_gradient(const QuantumTensor& qt, const qsim::Params& params, const ttn::EffectiveHamiltonian& heff,
                         double lambda, Eigen::VectorXd& grad) {
  const FoldedLoss f = fold(qt, heff);
  const Vector psi = qsim::simulate(qt.circuit(), params);
  Evaluation e = evaluate(qt, f, psi, lambda, true, nullptr);
  grad = qsim::gradient_from_costate(qt.circuit(), params, psi, std::move(e.costate));
  return e.parts.total;
}

VqeResult vqe_optimize(QuantumTensor& qt, const ttn::EffectiveHamiltonian& heff, const VqeOptions& options) {
  const FoldedLoss f = fold(qt, heff);
  NoiseSource* noise = options.noise && options.noise->vqe_enabled() ? options.noise : nullptr;
  // central differences of noisy values: error sigma / (sqrt(2) h) per component
  const double grad_noise_factor = 1.0 / (std::sqrt(2.0) * options.gradient_step);
  const qsim::CircuitSpec& circ = qt.circuit();
  bool non_finite = false;
  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const Vector psi = qsim::simulate(circ, x);
    Evaluation e = evaluate(qt, f, psi, options.lambda, true, noise);
    grad = qsim::gradient_from_costate(circ, x, psi, std::move(e.costate));
    if (noise) {
      for (Eigen::Index k = 0; k < grad.size(); ++k) grad[k] += noise->draw(grad_noise_factor * e.noise_scale);
    }
    if (!std::isfinite(e.parts.total)) non_finite = true;
    return e.parts.total;
  };
  optim::LbfgsOptions lo;
  lo.max_iterations = options.max_iterations;
  const auto r = optim::lbfgs_minimize(objective, qt.params(), lo);
  VqeResult out;
  out.trace = r.trace;
  out.initial_loss = r.trace.empty() ? r.value : r.trace.front();
  out.final_loss = r.value;
  out.iterations = r.iterations;
  out.evaluations = r.evaluations;
  out.status = r.status;
  out.diverged = non_finite || r.status == optim::LbfgsStatus::kNonFinite;
  qt.set_params(r.x);
  return out;
}

}  // namespace httn::hybrid
