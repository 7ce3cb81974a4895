#include <algorithm>
#include <atomic>
#include <functional>
#include <limits>
#include <numeric>

#include "httn/ttn.hpp"
#include "json.hpp"

namespace httn::ttn {

namespace {

std::vector<std::size_t> all_but(std::size_t rank, std::size_t skip) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rank; ++i)
    if (i != skip) out.push_back(i);
  return out;
}

// Embedding tensor: the last leg indexes the first basis states of the others.
DenseTensor embedding(const std::vector<std::size_t>& dims, std::size_t up_leg) {
  const std::size_t rank = dims.size();
  std::vector<std::size_t> others = all_but(rank, up_leg);
  std::vector<std::size_t> perm = others;
  perm.push_back(up_leg);
  std::vector<std::size_t> pdims;
  for (auto p : perm) pdims.push_back(dims[p]);
  DenseTensor work(pdims);
  const std::size_t up = dims[up_leg];
  for (std::size_t c = 0; c < up; ++c) work.data()[c * up + c] = 1.0;
  std::vector<std::size_t> inverse(rank);
  for (std::size_t i = 0; i < rank; ++i) inverse[perm[i]] = i;
  return work.permuted(inverse);
}

}  // namespace

TreeNetwork::TreeNetwork(TreeTopology topology, std::vector<NodePayload> nodes, std::size_t center)
    : topology_(std::move(topology)), nodes_(std::move(nodes)), center_(center) {
  if (nodes_.size() != topology_.n_nodes()) throw std::invalid_argument("one payload per topology node expected");
  if (center_ >= nodes_.size()) throw std::invalid_argument("center out of range");
  versions_.assign(nodes_.size(), 0);
  for (std::size_t n = 0; n < nodes_.size(); ++n) set_payload(n, std::move(nodes_[n]));
}

TreeNetwork TreeNetwork::binary(std::size_t n_sites, std::size_t chi, Init init, std::uint64_t seed,
                                std::vector<std::size_t> leaf_order) {
  if (n_sites < 4 || (n_sites & (n_sites - 1)) != 0)
    throw std::invalid_argument("binary TTN needs a power-of-two site count >= 4");
  if (chi < 2) throw std::invalid_argument("bond dimension must be at least 2");
  if (leaf_order.empty()) {
    leaf_order.resize(n_sites);
    std::iota(leaf_order.begin(), leaf_order.end(), std::size_t{0});
  }
  return from_topology(TreeTopology::binary(std::move(leaf_order), std::vector<std::size_t>(n_sites, 2), chi), init,
                       seed);
}

TreeNetwork TreeNetwork::from_topology(TreeTopology topology, Init init, std::uint64_t seed) {
  const std::size_t center = topology.root();
  std::vector<NodePayload> payloads;
  std::mt19937_64 rng(seed);
  // parent leg of every node points towards the center
  for (std::size_t n = 0; n < topology.n_nodes(); ++n) {
    const auto dims = topology.leg_dims(n);
    if (init == Init::kRandomIsometric) {
      payloads.emplace_back(DenseTensor::random(dims, rng));
    } else if (n == center) {
      DenseTensor t(dims);
      t.data()[0] = 1.0;
      payloads.emplace_back(std::move(t));
    } else {
      payloads.emplace_back(embedding(dims, topology.leg_toward_any(n, center)));
    }
  }
  TreeNetwork net(std::move(topology), std::move(payloads), center);
  if (init == Init::kRandomIsometric) {
    auto order = net.topology_.preorder(center);
    for (std::size_t i = order.size(); i-- > 1;) {
      const std::size_t n = order[i];
      net.center_ = n;
      net.shift_center(net.topology_.path(n, center)[1]);
    }
    net.center_ = center;
    DenseTensor& c = net.mutable_tensor(center);
    c *= 1.0 / c.norm();
  }
  return net;
}

bool TreeNetwork::is_quantum(std::size_t node) const {
  return std::holds_alternative<QuantumTensor>(nodes_.at(node));
}

const DenseTensor& TreeNetwork::tensor(std::size_t node) const {
  if (is_quantum(node)) throw std::logic_error("node " + std::to_string(node) + " is quantum");
  return std::get<DenseTensor>(nodes_[node]);
}

const QuantumTensor& TreeNetwork::quantum(std::size_t node) const {
  if (!is_quantum(node)) throw std::logic_error("node " + std::to_string(node) + " is classical");
  return std::get<QuantumTensor>(nodes_[node]);
}

DenseTensor& TreeNetwork::mutable_tensor(std::size_t node) {
  if (is_quantum(node)) throw std::logic_error("node " + std::to_string(node) + " is quantum");
  touch(node);
  return std::get<DenseTensor>(nodes_[node]);
}

QuantumTensor& TreeNetwork::mutable_quantum(std::size_t node) {
  if (!is_quantum(node)) throw std::logic_error("node " + std::to_string(node) + " is classical");
  touch(node);
  return std::get<QuantumTensor>(nodes_[node]);
}

void TreeNetwork::set_payload(std::size_t node, NodePayload payload) {
  const auto dims = topology_.leg_dims(node);
  if (auto* t = std::get_if<DenseTensor>(&payload)) {
    if (t->shape() != dims) throw std::invalid_argument("tensor shape does not match node " + std::to_string(node));
  } else {
    const auto& q = std::get<QuantumTensor>(payload);
    if (q.n_legs() != dims.size()) throw std::invalid_argument("quantum tensor leg count does not match the node");
    for (std::size_t l = 0; l < dims.size(); ++l)
      if (q.leg_dim(l) != dims[l]) throw std::invalid_argument("quantum tensor leg dimension does not match the node");
  }
  nodes_.at(node) = std::move(payload);
  touch(node);
}

void TreeNetwork::set_center(std::size_t node) {
  if (node >= nodes_.size()) throw std::out_of_range("center out of range");
  center_ = node;
}

namespace {
std::atomic<std::uint64_t> global_clock{0};
}

std::uint64_t TreeNetwork::clock() { return global_clock.load(); }

void TreeNetwork::touch(std::size_t node) { versions_.at(node) = ++global_clock; }

void TreeNetwork::shift_center(std::size_t target) {
  const std::size_t c = center_;
  if (!topology_.adjacent(c, target))
    throw PathError("shift_center: node " + std::to_string(target) + " is not adjacent to the center " +
                    std::to_string(c));
  const std::size_t leg_c = topology_.leg_toward(c, target);
  const std::size_t leg_t = topology_.leg_toward(target, c);
  Matrix r;
  if (!is_quantum(c)) {
    DenseTensor& a = mutable_tensor(c);
    const auto kept = all_but(a.rank(), leg_c);
    QrResult qr = qr_split(a, kept);
    if (qr.r.dim(0) != a.dim(leg_c)) throw TensorError("QR shrank a link; node has too few degrees of freedom");
    std::vector<std::size_t> perm(a.rank());
    for (std::size_t i = 0, k = 0; i < a.rank(); ++i) perm[i] = (i == leg_c) ? a.rank() - 1 : k++;
    a = qr.q.permuted(perm);
    r = qr.r.to_matrix();
  } else {
    IsometrizationResult iso = implicit_isometrize(mutable_quantum(c), leg_c, tomography_.noise, tomography_.fold);
    tomography_.settings += iso.measured.settings;
    r = std::move(iso.r);
  }
  if (is_quantum(target))
    absorb_r(mutable_quantum(target), leg_t, r);
  else
    absorb_r(mutable_tensor(target), leg_t, r);
  center_ = target;
}

void TreeNetwork::move_center(std::size_t target) {
  const auto p = topology_.path(center_, target);
  for (std::size_t i = 1; i < p.size(); ++i) shift_center(p[i]);
}

DenseTensor TreeNetwork::node_tensor(std::size_t node) const {
  return is_quantum(node) ? quantum(node).network_tensor() : tensor(node);
}

Vector TreeNetwork::dense_state() const {
  std::size_t total = 1;
  for (auto d : topology_.site_dims()) {
    total *= d;
    if (total > (std::size_t{1} << 20)) throw std::length_error("dense_state limited to 2^20 amplitudes");
  }
  // contract(node, parent) -> tensor with legs [sites..., parent link], sites listed in `sites`
  std::function<DenseTensor(std::size_t, std::size_t, std::vector<std::size_t>&)> contract_subtree =
      [&](std::size_t node, std::size_t parent, std::vector<std::size_t>& sites) {
        DenseTensor t = node_tensor(node);
        // descriptor per current leg: site id, or npos for remaining link legs (store neighbor)
        struct Desc {
          bool site;
          std::size_t id;
        };
        std::vector<Desc> desc;
        const auto& legs = topology_.legs(node);
        for (const auto& ref : legs) {
          if (ref.is_site()) {
            desc.push_back({true, ref.id});
          } else {
            const Link& k = topology_.link(ref.id);
            desc.push_back({false, k.node[0] == node ? k.node[1] : k.node[0]});
          }
        }
        for (std::size_t i = 0; i < legs.size(); ++i) {
          if (legs[i].is_site()) continue;
          const Link& k = topology_.link(legs[i].id);
          const std::size_t child = k.node[0] == node ? k.node[1] : k.node[0];
          if (child == parent) continue;
          std::vector<std::size_t> child_sites;
          DenseTensor sub = contract_subtree(child, node, child_sites);
          std::size_t pos = 0;
          while (desc[pos].site || desc[pos].id != child) ++pos;
          t = contract(t, sub, {{pos, sub.rank() - 1}});
          desc.erase(desc.begin() + static_cast<std::ptrdiff_t>(pos));
          for (auto s : child_sites) desc.push_back({true, s});
        }
        // order: sites first (as they appear), parent link last
        std::vector<std::size_t> perm;
        for (std::size_t i = 0; i < desc.size(); ++i)
          if (desc[i].site) perm.push_back(i), sites.push_back(desc[i].id);
        for (std::size_t i = 0; i < desc.size(); ++i)
          if (!desc[i].site) perm.push_back(i);
        return t.permuted(perm);
      };
  std::vector<std::size_t> sites;
  const DenseTensor full = contract_subtree(topology_.root(), std::numeric_limits<std::size_t>::max(), sites);
  std::vector<std::size_t> perm(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) perm[sites[i]] = i;
  return full.permuted(perm).to_vector();
}

double TreeNetwork::max_isometry_violation() const {
  double worst = 0.0;
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    if (n == center_ || is_quantum(n)) continue;
    const std::size_t leg = topology_.leg_toward_any(n, center_);
    const std::vector<std::size_t> row{leg};
    const Matrix a = tensor(n).to_matrix(row);
    const Matrix g = a.conjugate() * a.transpose();
    worst = std::max(worst, (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
  }
  return worst;
}

namespace {

using nlohmann::json;

json complex_array(std::span<const cplx> data) {
  json re = json::array(), im = json::array();
  for (const auto& z : data) re.push_back(z.real()), im.push_back(z.imag());
  return json{{"re", re}, {"im", im}};
}

std::vector<cplx> read_complex(const json& j) {
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (re.size() != im.size()) throw std::invalid_argument("checkpoint: real/imaginary length mismatch");
  std::vector<cplx> out(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) out[i] = {re[i].get<double>(), im[i].get<double>()};
  return out;
}

}  // namespace

std::string TreeNetwork::checkpoint() const {
  json j;
  j["format"] = "httn-network-1";
  j["site_dims"] = topology_.site_dims();
  j["root"] = topology_.root();
  j["center"] = center_;
  json legs = json::array();
  for (std::size_t n = 0; n < topology_.n_nodes(); ++n) {
    json node = json::array();
    for (const auto& r : topology_.legs(n)) node.push_back(json{{r.is_site() ? "site" : "link", r.id}});
    legs.push_back(node);
  }
  j["legs"] = legs;
  json dims = json::array();
  for (std::size_t i = 0; i < topology_.n_links(); ++i) dims.push_back(topology_.link(i).dim);
  j["link_dims"] = dims;
  json nodes = json::array();
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    if (!is_quantum(n)) {
      const auto& t = tensor(n);
      nodes.push_back(json{{"kind", "classical"}, {"shape", t.shape()}, {"data", complex_array(t.data())}});
    } else {
      const auto& q = quantum(n);
      json ps = json::array();
      for (std::size_t l = 0; l < q.n_legs(); ++l) {
        const RowMajorMatrix p = q.p(l);
        ps.push_back(complex_array({p.data(), static_cast<std::size_t>(p.size())}));
      }
      nodes.push_back(json{{"kind", "quantum"},
                           {"circuit", qsim::to_text(q.circuit(), q.params())},
                           {"legs", q.leg_partition()},
                           {"p", ps}});
    }
  }
  j["nodes"] = nodes;
  return j.dump(1);
}

TreeNetwork TreeNetwork::from_checkpoint(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("format") != "httn-network-1") throw std::invalid_argument("unknown checkpoint format");
  std::vector<std::vector<LegRef>> legs;
  for (const auto& node : j.at("legs")) {
    std::vector<LegRef> l;
    for (const auto& r : node) {
      if (r.contains("site"))
        l.push_back(LegRef::site(r.at("site").get<std::size_t>()));
      else
        l.push_back(LegRef::link(r.at("link").get<std::size_t>()));
    }
    legs.push_back(std::move(l));
  }
  TreeTopology topo(j.at("site_dims").get<std::vector<std::size_t>>(), std::move(legs),
                    j.at("link_dims").get<std::vector<std::size_t>>(), j.at("root").get<std::size_t>());
  std::vector<NodePayload> payloads;
  for (const auto& node : j.at("nodes")) {
    if (node.at("kind") == "classical") {
      payloads.emplace_back(DenseTensor(node.at("shape").get<std::vector<std::size_t>>(), read_complex(node.at("data"))));
    } else {
      auto [circ, params] = qsim::circuit_from_text(node.at("circuit").get<std::string>());
      QuantumTensor q(circ, params, node.at("legs").get<std::vector<std::size_t>>());
      std::size_t l = 0;
      for (const auto& p : node.at("p")) {
        const auto values = read_complex(p);
        const auto d = static_cast<Eigen::Index>(q.leg_dim(l));
        if (values.size() != static_cast<std::size_t>(d * d)) throw std::invalid_argument("checkpoint: bad P size");
        q.set_p(l, Eigen::Map<const RowMajorMatrix>(values.data(), d, d));
        ++l;
      }
      payloads.emplace_back(std::move(q));
    }
  }
  return TreeNetwork(std::move(topo), std::move(payloads), j.at("center").get<std::size_t>());
}

}  // namespace httn::ttn
