#include <algorithm>
#include <limits>
#include <random>
#include <set>

#include "httn/hybrid.hpp"

namespace httn::hybrid {

namespace {

std::size_t log2_exact(std::size_t d) {
  std::size_t q = 0;
  while ((std::size_t{1} << q) < d) ++q;
  if ((std::size_t{1} << q) != d) throw std::invalid_argument("quantum legs need power-of-two dimensions");
  return q;
}

// Contraction of a connected node group; legs reported as the original references.
std::pair<DenseTensor, std::vector<ttn::LegRef>> contract_group(const ttn::TreeNetwork& net,
                                                                 const std::set<std::size_t>& group) {
  const auto& topo = net.topology();
  const std::size_t start = *group.begin();
  DenseTensor t = net.node_tensor(start);
  std::vector<ttn::LegRef> refs = topo.legs(start);
  std::set<std::size_t> done{start};
  while (done.size() < group.size()) {
    bool progressed = false;
    for (std::size_t pos = 0; pos < refs.size() && !progressed; ++pos) {
      if (refs[pos].is_site()) continue;
      const ttn::Link& k = topo.link(refs[pos].id);
      std::size_t next = std::numeric_limits<std::size_t>::max();
      for (int side = 0; side < 2; ++side)
        if (group.count(k.node[side]) && !done.count(k.node[side])) next = k.node[side];
      if (next == std::numeric_limits<std::size_t>::max()) continue;
      const std::size_t leg_next = k.node[0] == next ? k.leg[0] : k.leg[1];
      t = contract(t, net.node_tensor(next), {{pos, leg_next}});
      refs.erase(refs.begin() + static_cast<std::ptrdiff_t>(pos));
      const auto& add = topo.legs(next);
      for (std::size_t l = 0; l < add.size(); ++l)
        if (l != leg_next) refs.push_back(add[l]);
      done.insert(next);
      progressed = true;
    }
    if (!progressed) throw std::invalid_argument("node group is not connected");
  }
  return {std::move(t), std::move(refs)};
}

bool same_ref(const ttn::LegRef& a, const ttn::LegRef& b) { return a.kind == b.kind && a.id == b.id; }

}  // namespace

qsim::Encoding encode_tensor(const Vector& target, std::size_t n_qubits, const CircuitOptions& options) {
  const Vector normalized = target / target.norm();
  qsim::Encoding enc;
  if (options.topology == qsim::Topology::kLadder) {
    enc = qsim::encode_state(normalized, n_qubits, options.m, options.encoding);
    if (options.e > 0) {
      auto [c, p] = qsim::extend_layers(enc.circuit, enc.params, options.e, options.extension_sigma, options.seed);
      enc.circuit = std::move(c);
      enc.params = std::move(p);
    }
  } else if (options.topology == qsim::Topology::kBrickWall) {
    enc.circuit = qsim::brick_wall(n_qubits, options.m + options.e);
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> g(0.0, options.extension_sigma);
    enc.params = qsim::Params(static_cast<Eigen::Index>(enc.circuit.n_params()));
    for (auto& x : enc.params) x = g(rng);
    enc.params = qsim::fit_circuit(enc.circuit, enc.params, normalized, std::max<std::size_t>(options.encoding.polish_iterations, 1));
  } else {
    throw std::invalid_argument("custom circuits cannot be used for encoding");
  }
  if (options.wrap) {
    auto [c, p] = qsim::add_wrap_gates(enc.circuit, enc.params);
    enc.circuit = std::move(c);
    enc.params = std::move(p);
  }
  enc.fidelity = qsim::fidelity(normalized, qsim::simulate(enc.circuit, enc.params));
  return enc;
}

std::vector<std::size_t> upper_nodes(const ttn::TreeTopology& topo) {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < topo.n_nodes(); ++n) {
    const auto& legs = topo.legs(n);
    if (std::none_of(legs.begin(), legs.end(), [](const ttn::LegRef& r) { return r.is_site(); })) out.push_back(n);
  }
  return out;
}

ttn::TreeNetwork hybridize(ttn::TreeNetwork classical, const std::vector<std::size_t>& group,
                           const CircuitOptions& options, std::size_t* qt_node) {
  const std::set<std::size_t> members(group.begin(), group.end());
  if (members.empty()) throw std::invalid_argument("empty node group");
  const auto& topo = classical.topology();
  for (auto n : members)
    if (classical.is_quantum(n)) throw std::invalid_argument("hybridize expects classical nodes");
  // nearest member of the group along the path from the current center
  std::size_t target = *members.begin();
  for (auto n : topo.path(classical.center(), target))
    if (members.count(n)) {
      target = n;
      break;
    }
  classical.move_center(target);

  auto [tensor, refs] = contract_group(classical, members);
  std::vector<std::size_t> mapping;
  ttn::TreeTopology merged = topo.merged(group, &mapping);
  const std::size_t merged_id = merged.n_nodes() - 1;

  // merged link ids are the surviving old links in increasing order
  std::vector<std::size_t> old_link;
  for (std::size_t i = 0; i < topo.n_links(); ++i) {
    const ttn::Link& k = topo.link(i);
    if (!(members.count(k.node[0]) && members.count(k.node[1]))) old_link.push_back(i);
  }
  const auto& new_legs = merged.legs(merged_id);
  std::vector<std::size_t> perm;
  std::vector<std::size_t> leg_qubits;
  for (const auto& r : new_legs) {
    const ttn::LegRef old = r.is_site() ? r : ttn::LegRef::link(old_link.at(r.id));
    const auto it = std::find_if(refs.begin(), refs.end(), [&](const ttn::LegRef& x) { return same_ref(x, old); });
    if (it == refs.end()) throw std::logic_error("merged leg not found in the contracted group");
    perm.push_back(static_cast<std::size_t>(it - refs.begin()));
    leg_qubits.push_back(log2_exact(merged.leg_dim(merged_id, perm.size() - 1)));
  }
  const Vector target_state = tensor.permuted(perm).to_vector();
  std::size_t n_qubits = 0;
  for (auto q : leg_qubits) n_qubits += q;
  const qsim::Encoding enc = encode_tensor(target_state, n_qubits, options);

  std::vector<ttn::NodePayload> payloads(merged.n_nodes(), DenseTensor());
  for (std::size_t n = 0; n < topo.n_nodes(); ++n)
    if (!members.count(n)) payloads[mapping[n]] = classical.tensor(n);
  payloads[merged_id] = QuantumTensor(enc.circuit, enc.params, leg_qubits);
  if (qt_node) *qt_node = merged_id;
  return ttn::TreeNetwork(std::move(merged), std::move(payloads), merged_id);
}

ttn::TreeNetwork multi_quantum_network(std::size_t n_sites, const std::vector<std::size_t>& leaf_order,
                                       const MultiQuantumOptions& options) {
  const std::size_t leg_dim = std::size_t{1} << options.qubits_per_leg;
  ttn::TreeTopology topo = ttn::TreeTopology::binary(leaf_order, std::vector<std::size_t>(n_sites, 2), leg_dim);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  const auto upper = upper_nodes(topo);
  const std::set<std::size_t> quantum(upper.begin(), upper.end());
  std::vector<ttn::NodePayload> payloads;
  for (std::size_t n = 0; n < topo.n_nodes(); ++n) {
    const auto dims = topo.leg_dims(n);
    if (!quantum.count(n)) {
      payloads.emplace_back(DenseTensor::random(dims, rng));
      continue;
    }
    std::vector<std::size_t> leg_qubits;
    for (auto d : dims) leg_qubits.push_back(log2_exact(d));
    std::size_t q = 0;
    for (auto x : leg_qubits) q += x;
    const auto circ = qsim::brick_wall(q, options.layers);
    qsim::Params p(static_cast<Eigen::Index>(circ.n_params()));
    for (auto& x : p) x = angle(rng);
    payloads.emplace_back(QuantumTensor(circ, p, leg_qubits));
  }
  const std::size_t root = topo.root();
  ttn::TreeNetwork net(topo, std::move(payloads), root);
  // isometrize every node toward the root, deepest first
  const auto order = topo.preorder(root);
  for (std::size_t i = order.size(); i-- > 1;) {
    net.set_center(order[i]);
    net.shift_center(topo.path(order[i], root)[1]);
  }
  net.set_center(root);
  // normalize through the root circuit's P on its first leg
  if (net.is_quantum(root)) {
    QuantumTensor& q = net.mutable_quantum(root);
    const double norm = q.network_tensor().norm();
    q.set_p(0, q.p(0) / norm);
  } else {
    DenseTensor& t = net.mutable_tensor(root);
    t *= 1.0 / t.norm();
  }
  return net;
}

void reinit_from_classical(ttn::TreeNetwork& net, ttn::EnvironmentCache& cache, std::size_t qt_node, std::size_t chi,
                           const CircuitOptions& options) {
  if (!net.is_quantum(qt_node)) throw std::invalid_argument("reinit_from_classical needs a quantum node");
  net.move_center(qt_node);
  const ttn::EffectiveHamiltonian heff = cache.effective_hamiltonian(net, qt_node);
  const std::size_t k = heff.dims.size();
  Vector target;
  if (k >= 4 && (k & (k - 1)) == 0) {
    ttn::LocalOperator sub;
    sub.site_dims = heff.dims;
    for (const auto& t : heff.terms) {
      ttn::LocalTerm term;
      term.weight = t.weight;
      for (std::size_t l = 0; l < k; ++l)
        if (t.legs[l]) term.factors.emplace(l, *t.legs[l]);
      sub.terms.push_back(std::move(term));
    }
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    auto sub_net = ttn::TreeNetwork::from_topology(ttn::TreeTopology::binary(order, heff.dims, chi),
                                                   ttn::Init::kRandomIsometric, options.seed);
    ttn::EnvironmentCache sub_cache(std::move(sub));
    ttn::ground_state_search(sub_net, sub_cache);
    target = sub_net.dense_state();
  } else {
    // too few legs for a binary sub-network: exact local ground state
    const MatrixEigh eig = eigh(heff.assemble());
    target = ttn::select_ground_vector(eig);
  }
  const QuantumTensor& old = net.quantum(qt_node);
  const std::vector<std::size_t> leg_qubits = old.leg_partition();
  const qsim::Encoding enc = encode_tensor(target, old.n_qubits(), options);
  net.set_payload(qt_node, QuantumTensor(enc.circuit, enc.params, leg_qubits));
}

}  // namespace httn::hybrid
