#include "httn/hybrid.hpp"

namespace httn::hybrid {

std::vector<std::size_t> quantum_nodes(const ttn::TreeNetwork& net) {
  const auto& topo = net.topology();
  std::vector<std::size_t> out;
  for (auto n : topo.preorder(topo.root()))
    if (net.is_quantum(n)) {
      out = ttn::sweep_schedule(net, n);
      break;
    }
  std::erase_if(out, [&](std::size_t n) { return !net.is_quantum(n); });
  return out;
}

namespace {

void prepare(ttn::TreeNetwork& net, ttn::EnvironmentCache& cache, std::size_t node, const SweepSettings& settings,
             std::size_t sweep_index) {
  switch (settings.strategy) {
    case Strategy::kKeepWithPenalty:
      break;
    case Strategy::kProjectUnitary: {
      if (net.quantum(node).p_unitary()) break;
      QuantumTensor& qt = net.mutable_quantum(node);
      for (std::size_t l = 0; l < qt.n_legs(); ++l) qt.set_p(l, project_to_unitary(qt.p(l)));
      break;
    }
    case Strategy::kReinitialize:
      if (sweep_index > 0) reinit_from_classical(net, cache, node, settings.reinit_chi, settings.reinit_circuit);
      break;
  }
}

}  // namespace

SweepRecord httn_sweep(ttn::TreeNetwork& net, ttn::EnvironmentCache& cache, const SweepSettings& settings,
                       std::size_t sweep_index) {
  SweepRecord rec;
  const std::size_t settings_before = net.tomography().settings;
  const auto quantum = quantum_nodes(net);
  if (quantum.empty()) throw std::invalid_argument("hybrid sweep needs at least one quantum tensor");
  for (auto node : quantum) {
    net.move_center(node);
    prepare(net, cache, node, settings, sweep_index);
    const ttn::EffectiveHamiltonian heff = cache.effective_hamiltonian(net, node);
    const VqeResult r = vqe_optimize(net.mutable_quantum(node), heff, settings.vqe);
    rec.vqe_iterations += r.iterations;
    rec.vqe_losses.push_back(r.final_loss);
    rec.vqe_traces.push_back(r.trace);
    rec.diverged = rec.diverged || r.diverged;
    rec.energy_estimate = loss(net.quantum(node), heff, settings.vqe.lambda).energy;
  }
  for (auto node : ttn::sweep_schedule(net, quantum.front())) {
    if (net.is_quantum(node)) continue;
    net.move_center(node);
    rec.energy_estimate = ttn::optimize_center(net, cache.effective_hamiltonian(net, node));
  }
  net.move_center(quantum.front());
  rec.tomography_settings = net.tomography().settings - settings_before;
  return rec;
}

}  // namespace httn::hybrid
