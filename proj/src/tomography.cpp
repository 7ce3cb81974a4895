#include <algorithm>
#include <mutex>

#include "httn/pauli.hpp"
#include "httn/quantum_tensor.hpp"

namespace httn {

namespace {

struct PauliBasis {
  std::vector<Matrix> strings;  // base-4 lexicographic, I < X < Y < Z, first letter on the first qubit
  std::vector<int> y_count;
};

const PauliBasis& pauli_basis(std::size_t k) {
  static std::vector<PauliBasis> cache;
  static std::mutex guard;
  std::lock_guard lock(guard);
  while (cache.size() <= k) {
    const std::size_t q = cache.size();
    PauliBasis b;
    if (q == 0) {
      b.strings.push_back(Matrix::Identity(1, 1));
      b.y_count.push_back(0);
    } else {
      const PauliBasis& prev = cache[q - 1];
      for (int letter = 0; letter < 4; ++letter) {
        const Matrix m = pauli::matrix(static_cast<pauli::Pauli>(letter));
        for (std::size_t s = 0; s < prev.strings.size(); ++s) {
          const Matrix& rest = prev.strings[s];
          Matrix kron(2 * rest.rows(), 2 * rest.cols());
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) kron.block(i * rest.rows(), j * rest.cols(), rest.rows(), rest.cols()) = m(i, j) * rest;
          b.strings.push_back(kron);
          b.y_count.push_back(prev.y_count[s] + (letter == 2 ? 1 : 0));
        }
      }
    }
    cache.push_back(std::move(b));
  }
  return cache[k];
}

bool is_identity(const Matrix& m) {
  return m.rows() == m.cols() && (m - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() == 0.0;
}

// rho_{ab} = sum_rest phi[.., a, ..] conj(psi[.., b, ..]) over all other qubits.
Matrix partial_cross(const Vector& phi, const Vector& psi, std::size_t n, std::size_t first, std::size_t count) {
  const Eigen::Index reg = Eigen::Index{1} << count;
  const Eigen::Index post = Eigen::Index{1} << (n - first - count);
  const Eigen::Index pre = Eigen::Index{1} << first;
  Matrix rho = Matrix::Zero(reg, reg);
  for (Eigen::Index p = 0; p < pre; ++p) {
    Eigen::Map<const RowMajorMatrix> a(phi.data() + p * reg * post, reg, post);
    Eigen::Map<const RowMajorMatrix> b(psi.data() + p * reg * post, reg, post);
    rho.noalias() += a * b.adjoint();
  }
  return rho;
}

// (1/chi) sum_sigma (-1)^{y(sigma)} E(sigma) sigma with E(sigma) = Tr(sigma rho)
// plus one noise draw per string in enumeration order.
Matrix reconstruct(const Matrix& rho, std::size_t k, NoiseSource* noise) {
  const PauliBasis& basis = pauli_basis(k);
  const double chi = static_cast<double>(rho.rows());
  Matrix m = Matrix::Zero(rho.rows(), rho.cols());
  for (std::size_t s = 0; s < basis.strings.size(); ++s) {
    double e = (basis.strings[s].cwiseProduct(rho.transpose())).sum().real();
    if (noise) e += noise->draw();
    const double sign = basis.y_count[s] % 2 == 0 ? 1.0 : -1.0;
    m += (sign * e / chi) * basis.strings[s];
  }
  return m;
}

}  // namespace

MeasurementMatrix open_link_contraction(const QuantumTensor& qt, const std::vector<std::optional<Matrix>>& observables,
                                        std::size_t open_leg, NoiseSource* noise, TomographyFold fold) {
  if (open_leg >= qt.n_legs()) throw std::out_of_range("open leg out of range");
  if (observables.size() != qt.n_legs()) throw std::invalid_argument("one observable slot per leg expected");
  if (observables[open_leg]) throw std::invalid_argument("the open leg cannot carry an observable");
  const std::size_t n = qt.n_qubits();
  const Vector& psi = qt.state();
  Vector phi = psi;
  bool touched = false;
  for (std::size_t l = 0; l < qt.n_legs(); ++l) {
    if (l == open_leg) continue;
    const Matrix& p = qt.p(l);
    Matrix op;
    if (observables[l]) {
      if (observables[l]->rows() != p.rows() || observables[l]->cols() != p.cols())
        throw std::invalid_argument("observable dimension does not match its leg");
      op = p.adjoint() * *observables[l] * p;
    } else {
      if (is_identity(p)) continue;
      op = p.adjoint() * p;
    }
    qsim::apply_register_operator(phi, n, qt.leg_offset(l), qt.leg_qubits(l), op);
    touched = true;
  }
  const std::size_t k = qt.leg_qubits(open_leg);
  const Matrix rho = partial_cross(touched ? phi : psi, psi, n, qt.leg_offset(open_leg), k);
  NoiseSource* active = noise && noise->tomography_enabled() ? noise : nullptr;
  const Matrix& pa = qt.p(open_leg);
  MeasurementMatrix out;
  out.leg = open_leg;
  out.epsilon = active ? active->model().epsilon : 0.0;
  out.settings = std::size_t{1} << (2 * k);
  if (fold == TomographyFold::kResult) {
    const Matrix m_psi = reconstruct(rho, k, active);
    out.m = pa.conjugate() * m_psi * pa.transpose();
  } else {
    out.m = reconstruct(pa * rho * pa.adjoint(), k, active);
  }
  return out;
}

MeasurementMatrix classical_index_contraction(const ClassicalIndexTensor& t,
                                              const std::vector<std::optional<Matrix>>& observables,
                                              NoiseSource* noise) {
  if (t.params.empty()) throw std::invalid_argument("classical index needs at least one value");
  if (observables.size() != t.leg_qubits.size()) throw std::invalid_argument("one observable slot per leg expected");
  const std::size_t n = t.circuit.n_qubits;
  const auto count = static_cast<Eigen::Index>(t.params.size());
  Matrix states(Eigen::Index{1} << n, count), applied(Eigen::Index{1} << n, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    Vector psi = qsim::simulate(t.circuit, t.params[static_cast<std::size_t>(i)]);
    states.col(i) = psi;
    std::size_t first = 0;
    for (std::size_t l = 0; l < t.leg_qubits.size(); ++l) {
      if (observables[l]) qsim::apply_register_operator(psi, n, first, t.leg_qubits[l], *observables[l]);
      first += t.leg_qubits[l];
    }
    applied.col(i) = psi;
  }
  MeasurementMatrix out;
  out.m = states.adjoint() * applied;
  NoiseSource* active = noise && noise->tomography_enabled() ? noise : nullptr;
  out.epsilon = active ? active->model().epsilon : 0.0;
  out.settings = static_cast<std::size_t>(count * count);
  if (active) {
    for (Eigen::Index a = 0; a < count; ++a) {
      out.m(a, a) += active->draw();
      for (Eigen::Index b = a + 1; b < count; ++b) {
        const cplx eta(active->draw(), active->draw());
        out.m(a, b) += eta;
        out.m(b, a) += std::conj(eta);
      }
    }
  }
  return out;
}

IsometrizationResult implicit_isometrize(QuantumTensor& qt, std::size_t leg, NoiseSource* noise, TomographyFold fold) {
  if (leg >= qt.n_legs()) throw std::out_of_range("implicit_isometrize: leg is not a leg of the tensor");
  IsometrizationResult result;
  result.measured = open_link_contraction(qt, std::vector<std::optional<Matrix>>(qt.n_legs()), leg, noise, fold);
  const MatrixEigh eig = eigh(result.measured.m);
  const Eigen::Index d = eig.values.size();
  const double largest = std::max(eig.values.maxCoeff(), 0.0);
  Eigen::VectorXd root(d), inv_root(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double v = std::max(eig.values[i], 0.0);
    root[i] = std::sqrt(v);
    inv_root[i] = (largest > 0.0 && v > Tolerances::kPseudoInverse * largest) ? 1.0 / std::sqrt(v) : 0.0;
  }
  result.r = root.asDiagonal() * eig.vectors.adjoint();
  const Matrix r_inv = eig.vectors * inv_root.asDiagonal();
  qt.set_p(leg, r_inv.transpose() * qt.p(leg));
  return result;
}

}  // namespace httn
