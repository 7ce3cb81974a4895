#include <algorithm>

#include "httn/ttn.hpp"

namespace httn::ttn {

LocalOperator LocalOperator::from_pauli(const pauli::OperatorSum& op) {
  LocalOperator out;
  out.site_dims.assign(op.n_sites(), 2);
  for (const auto& t : op.terms()) {
    LocalTerm term;
    term.weight = t.coefficient;
    for (const auto& [site, letter] : t.letters) term.factors.emplace(site, pauli::matrix(letter));
    out.terms.push_back(std::move(term));
  }
  return out;
}

void apply_leg(Vector& v, std::span<const std::size_t> dims, std::size_t leg, const Matrix& m) {
  if (leg >= dims.size()) throw std::out_of_range("apply_leg: leg out of range");
  const auto d = static_cast<Eigen::Index>(dims[leg]);
  if (m.rows() != d || m.cols() != d) throw std::invalid_argument("apply_leg: matrix does not match the leg");
  Eigen::Index pre = 1, post = 1;
  for (std::size_t i = 0; i < leg; ++i) pre *= static_cast<Eigen::Index>(dims[i]);
  for (std::size_t i = leg + 1; i < dims.size(); ++i) post *= static_cast<Eigen::Index>(dims[i]);
  if (v.size() != pre * d * post) throw std::invalid_argument("apply_leg: vector does not match dims");
  for (Eigen::Index p = 0; p < pre; ++p) {
    Eigen::Map<RowMajorMatrix> block(v.data() + p * d * post, d, post);
    block = (m * block).eval();
  }
}

std::size_t EffectiveHamiltonian::dim() const {
  std::size_t d = 1;
  for (auto x : dims) d *= x;
  return d;
}

Vector EffectiveHamiltonian::apply(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != dim()) throw std::invalid_argument("vector does not match the node");
  Vector out = Vector::Zero(v.size());
  for (const auto& t : terms) {
    Vector w = v;
    for (std::size_t l = 0; l < t.legs.size(); ++l)
      if (t.legs[l]) apply_leg(w, dims, l, *t.legs[l]);
    out += t.weight * w;
  }
  return out;
}

Matrix EffectiveHamiltonian::assemble() const {
  const auto d = static_cast<Eigen::Index>(dim());
  Matrix h = Matrix::Zero(d, d);
  for (const auto& t : terms) {
    // Kronecker product of the leg factors in row-major leg order
    Matrix k = Matrix::Identity(1, 1);
    for (std::size_t l = 0; l < dims.size(); ++l) {
      const auto dl = static_cast<Eigen::Index>(dims[l]);
      const Matrix f = t.legs[l] ? *t.legs[l] : Matrix::Identity(dl, dl);
      Matrix next(k.rows() * dl, k.cols() * dl);
      for (Eigen::Index i = 0; i < k.rows(); ++i)
        for (Eigen::Index j = 0; j < k.cols(); ++j) next.block(i * dl, j * dl, dl, dl) = k(i, j) * f;
      k = std::move(next);
    }
    h += t.weight * k;
  }
  return h;
}

double EffectiveHamiltonian::expectation(const Vector& v) const { return v.dot(apply(v)).real(); }

EnvironmentCache::EnvironmentCache(LocalOperator op) : op_(std::move(op)) {}

bool EnvironmentCache::fresh(const TreeNetwork& net, const Entry& e, std::size_t from, std::size_t to) const {
  if (!e.valid) return false;
  for (auto n : net.topology().side(from, to))
    if (net.version(n) > e.stamp) return false;
  return true;
}

namespace {

// Per-term operator slots for every leg of `node` except `skip`.
std::vector<std::vector<std::optional<Matrix>>> gather_slots(EnvironmentCache& cache, TreeNetwork& net,
                                                             std::size_t node, std::size_t skip) {
  const auto& topo = net.topology();
  const auto& legs = topo.legs(node);
  const auto& terms = cache.op().terms;
  std::vector<std::vector<std::optional<Matrix>>> slots(terms.size(),
                                                        std::vector<std::optional<Matrix>>(legs.size()));
  for (std::size_t l = 0; l < legs.size(); ++l) {
    if (l == skip) continue;
    if (legs[l].is_site()) {
      for (std::size_t t = 0; t < terms.size(); ++t) {
        auto it = terms[t].factors.find(legs[l].id);
        if (it != terms[t].factors.end()) slots[t][l] = it->second;
      }
    } else {
      const Link& k = topo.link(legs[l].id);
      const std::size_t nbr = k.node[0] == node ? k.node[1] : k.node[0];
      const auto& env = cache.environment(net, nbr, node);
      for (std::size_t t = 0; t < terms.size(); ++t) slots[t][l] = env[t];
    }
  }
  return slots;
}

bool all_empty(const std::vector<std::optional<Matrix>>& s) {
  return std::none_of(s.begin(), s.end(), [](const auto& m) { return m.has_value(); });
}

}  // namespace

const std::vector<std::optional<Matrix>>& EnvironmentCache::environment(TreeNetwork& net, std::size_t from,
                                                                        std::size_t to) {
  if (op_.site_dims != net.topology().site_dims())
    throw std::invalid_argument("operator sites do not match the network leaves");
  Entry& entry = entries_[{from, to}];
  if (fresh(net, entry, from, to)) return entry.per_term;
  const std::size_t open = net.topology().leg_toward(from, to);
  const auto slots = gather_slots(*this, net, from, open);
  std::vector<std::optional<Matrix>> result(op_.terms.size());
  if (!net.is_quantum(from)) {
    const DenseTensor& a = net.tensor(from);
    const std::vector<std::size_t> row{open};
    const Matrix a_mat = a.to_matrix(row);
    const Matrix a_conj = a_mat.conjugate();
    for (std::size_t t = 0; t < slots.size(); ++t) {
      if (all_empty(slots[t])) continue;
      DenseTensor b = a;
      for (std::size_t l = 0; l < slots[t].size(); ++l)
        if (slots[t][l]) b = apply_to_leg(b, l, *slots[t][l]);
      result[t] = a_conj * b.to_matrix(row).transpose();
    }
  } else {
    const QuantumTensor& q = net.quantum(from);
    TomographyContext& ctx = net.tomography();
    for (std::size_t t = 0; t < slots.size(); ++t) {
      if (all_empty(slots[t])) continue;
      MeasurementMatrix m = open_link_contraction(q, slots[t], open, ctx.noise, ctx.fold);
      ctx.settings += m.settings;
      result[t] = std::move(m.m);
    }
  }
  entry.per_term = std::move(result);
  entry.stamp = TreeNetwork::clock();
  entry.valid = true;
  ++computations_;
  return entry.per_term;
}

EffectiveHamiltonian EnvironmentCache::effective_hamiltonian(TreeNetwork& net, std::size_t node) {
  if (op_.site_dims != net.topology().site_dims())
    throw std::invalid_argument("operator sites do not match the network leaves");
  EffectiveHamiltonian h;
  h.dims = net.topology().leg_dims(node);
  const auto slots = gather_slots(*this, net, node, h.dims.size());
  // single-leg terms are summed into one term per leg, identity terms into a constant
  std::vector<std::optional<Matrix>> single(h.dims.size());
  cplx constant{0.0, 0.0};
  for (std::size_t t = 0; t < slots.size(); ++t) {
    const cplx w = op_.terms[t].weight;
    std::size_t used = 0, last = 0;
    for (std::size_t l = 0; l < slots[t].size(); ++l)
      if (slots[t][l]) ++used, last = l;
    if (used == 0) {
      constant += w;
    } else if (used == 1) {
      const Matrix m = w * *slots[t][last];
      single[last] = single[last] ? Matrix(*single[last] + m) : m;
    } else {
      h.terms.push_back({w, slots[t]});
    }
  }
  for (std::size_t l = 0; l < single.size(); ++l) {
    if (!single[l]) continue;
    ProductTerm p;
    p.legs.assign(h.dims.size(), std::nullopt);
    p.legs[l] = std::move(single[l]);
    h.terms.push_back(std::move(p));
  }
  if (constant != cplx{0.0, 0.0}) h.terms.push_back({constant, std::vector<std::optional<Matrix>>(h.dims.size())});
  return h;
}

}  // namespace httn::ttn
