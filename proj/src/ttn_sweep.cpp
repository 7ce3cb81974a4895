#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "httn/ttn.hpp"

namespace httn::ttn {

Vector select_ground_vector(const MatrixEigh& eig, double degeneracy_tol) {
  const Eigen::Index d = eig.values.size();
  if (d == 0) throw std::invalid_argument("empty eigendecomposition");
  const double lowest = eig.values[0];
  Eigen::Index block = 1;
  while (block < d && eig.values[block] - lowest < degeneracy_tol * std::max(1.0, std::abs(lowest))) ++block;
  Vector v;
  if (block == 1) {
    v = eig.vectors.col(0);
  } else {
    const Matrix basis = eig.vectors.leftCols(block);
    for (Eigen::Index k = 0; k < d; ++k) {
      const Vector proj = basis * basis.row(k).adjoint();
      if (proj.norm() > 1e-8) {
        v = proj / proj.norm();
        break;
      }
    }
  }
  const double cutoff = 1e-12 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (std::abs(v[i]) > cutoff) {
      v *= std::conj(v[i]) / std::abs(v[i]);
      break;
    }
  }
  return v;
}

double optimize_center(TreeNetwork& net, const EffectiveHamiltonian& heff) {
  const std::size_t c = net.center();
  const DenseTensor& current = net.tensor(c);
  if (heff.dims != current.shape()) throw std::invalid_argument("effective Hamiltonian does not match the center");
  const MatrixEigh eig = eigh(heff.assemble());
  const Vector v = select_ground_vector(eig);
  net.mutable_tensor(c) = DenseTensor::from_vector(v, heff.dims);
  return eig.values[0];
}

std::vector<std::size_t> sweep_schedule(const TreeNetwork& net, std::size_t start) {
  return net.topology().preorder(start);
}

double sweep(TreeNetwork& net, EnvironmentCache& cache, const std::vector<std::size_t>& schedule) {
  double energy = std::numeric_limits<double>::quiet_NaN();
  for (auto node : schedule) {
    if (net.is_quantum(node)) continue;
    net.move_center(node);
    energy = optimize_center(net, cache.effective_hamiltonian(net));
  }
  return energy;
}

std::vector<double> ground_state_search(TreeNetwork& net, EnvironmentCache& cache, const SweepOptions& options) {
  const auto schedule = sweep_schedule(net, net.topology().root());
  std::vector<double> energies;
  for (std::size_t s = 0; s < options.max_sweeps; ++s) {
    energies.push_back(sweep(net, cache, schedule));
    if (energies.size() >= 2 && std::abs(energies.back() - energies[energies.size() - 2]) < options.tolerance) break;
  }
  return energies;
}

double expectation(TreeNetwork& net, const pauli::OperatorSum& obs) {
  std::set<std::size_t> support;
  for (const auto& t : obs.terms())
    for (const auto& [site, letter] : t.letters) support.insert(site);
  if (obs.n_sites() != net.topology().n_sites())
    throw std::invalid_argument("observable sites do not match the network leaves");
  const std::size_t node =
      support.empty() ? net.center() : net.topology().covering_node({support.begin(), support.end()});
  net.move_center(node);
  EnvironmentCache cache(obs);
  const EffectiveHamiltonian heff = cache.effective_hamiltonian(net);
  return heff.expectation(net.node_tensor(node).to_vector());
}

double dense_energy(const TreeNetwork& net, const pauli::OperatorSum& op) {
  if (op.n_sites() > pauli::kMaxDenseSites) throw std::length_error("dense_energy limited to 16 sites");
  const Vector psi = net.dense_state();
  return psi.dot(pauli::apply_to_state(op, psi)).real() / psi.squaredNorm();
}

}  // namespace httn::ttn
