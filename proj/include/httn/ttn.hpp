#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "httn/pauli.hpp"
#include "httn/quantum_tensor.hpp"
#include "httn/tensor.hpp"

namespace httn::ttn {

// ---------------------------------------------------------------------------
// Operators with per-site matrix factors
// ---------------------------------------------------------------------------

struct LocalTerm {
  cplx weight{1.0, 0.0};
  std::map<std::size_t, Matrix> factors;  ///< site -> matrix (identity sites omitted)
};

/// Sum of weighted tensor products of single-site matrices.
struct LocalOperator {
  std::vector<std::size_t> site_dims;
  std::vector<LocalTerm> terms;

  static LocalOperator from_pauli(const pauli::OperatorSum& op);
};

/// Effective operator on the legs of one node: sum of weighted tensor
/// products of per-leg matrices (nullopt = identity on that leg).
struct ProductTerm {
  cplx weight{1.0, 0.0};
  std::vector<std::optional<Matrix>> legs;
};

struct EffectiveHamiltonian {
  std::vector<std::size_t> dims;
  std::vector<ProductTerm> terms;

  std::size_t dim() const;
  /// Dense matrix in row-major leg order.
  Matrix assemble() const;
  Vector apply(const Vector& v) const;
  double expectation(const Vector& v) const;
};

/// Applies m to leg `leg` of a row-major vector with leg dimensions `dims`.
void apply_leg(Vector& v, std::span<const std::size_t> dims, std::size_t leg, const Matrix& m);

// ---------------------------------------------------------------------------
// Tree structure
// ---------------------------------------------------------------------------

struct LegRef {
  enum class Kind { kSite, kLink };
  Kind kind = Kind::kSite;
  std::size_t id = 0;  ///< site index or link index

  static LegRef site(std::size_t s) { return {Kind::kSite, s}; }
  static LegRef link(std::size_t l) { return {Kind::kLink, l}; }
  bool is_site() const { return kind == Kind::kSite; }
};

struct Link {
  std::size_t node[2] = {0, 0};
  std::size_t leg[2] = {0, 0};
  std::size_t dim = 1;
};

class PathError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Loop-free graph of nodes whose legs are physical sites or links.
class TreeTopology {
 public:
  TreeTopology() = default;
  TreeTopology(std::vector<std::size_t> site_dims, std::vector<std::vector<LegRef>> node_legs,
               std::vector<std::size_t> link_dims, std::size_t root);

  /// Binary tree over sites listed in `leaf_order`; nodes numbered bottom
  /// layer first, the last two nodes form the top pair. The link above a
  /// node covering sites S has dimension min(chi, prod of dims over S).
  static TreeTopology binary(std::vector<std::size_t> leaf_order, std::vector<std::size_t> site_dims,
                             std::size_t chi);

  /// Replaces a connected node set by one node whose legs are the set's
  /// external legs ordered by leaf position. Remaining nodes keep their
  /// relative order; the merged node is appended last. `mapping` receives
  /// old -> new node indices (merged nodes all map to the new node).
  TreeTopology merged(const std::vector<std::size_t>& nodes, std::vector<std::size_t>* mapping = nullptr) const;

  std::size_t n_sites() const { return site_dims_.size(); }
  std::size_t n_nodes() const { return legs_.size(); }
  std::size_t n_links() const { return links_.size(); }
  std::size_t root() const { return root_; }
  std::size_t site_dim(std::size_t s) const { return site_dims_.at(s); }
  const std::vector<std::size_t>& site_dims() const { return site_dims_; }
  const std::vector<LegRef>& legs(std::size_t node) const { return legs_.at(node); }
  const Link& link(std::size_t id) const { return links_.at(id); }
  std::size_t leg_dim(std::size_t node, std::size_t leg) const;
  std::vector<std::size_t> leg_dims(std::size_t node) const;

  /// (neighbour, leg of `node` pointing to it) pairs in leg order.
  std::vector<std::pair<std::size_t, std::size_t>> neighbors(std::size_t node) const;
  bool adjacent(std::size_t a, std::size_t b) const;
  /// Leg of `node` that points to adjacent `neighbor`; throws PathError.
  std::size_t leg_toward(std::size_t node, std::size_t neighbor) const;
  /// Leg of `node` on the path towards any other node.
  std::size_t leg_toward_any(std::size_t node, std::size_t target) const;
  /// Node sequence from a to b inclusive.
  std::vector<std::size_t> path(std::size_t a, std::size_t b) const;
  /// Nodes on `from`'s side of the link between adjacent from and to.
  const std::vector<std::size_t>& side(std::size_t from, std::size_t to) const;
  /// Sites on `from`'s side of the link between adjacent from and to.
  const std::vector<std::size_t>& side_sites(std::size_t from, std::size_t to) const;
  /// Depth-first preorder from `start`, children in leg order.
  std::vector<std::size_t> preorder(std::size_t start) const;
  /// Node and leg holding a physical site.
  std::pair<std::size_t, std::size_t> site_location(std::size_t site) const;
  /// Position of every site among the leaves (order of the original build).
  const std::vector<std::size_t>& leaf_position() const { return leaf_position_; }
  /// Lowest common ancestor of the nodes holding `sites`, rooted at root().
  std::size_t covering_node(const std::vector<std::size_t>& sites) const;

 private:
  void build_index();

  std::vector<std::size_t> site_dims_;
  std::vector<std::vector<LegRef>> legs_;
  std::vector<Link> links_;
  std::size_t root_ = 0;
  std::vector<std::size_t> leaf_position_;
  std::vector<std::pair<std::size_t, std::size_t>> site_location_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> side_nodes_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> side_sites_;
};

/// Leaf order for an lx-by-ly lattice with row-major site indices: vertical
/// 2x1 dominoes, then blocks paired alternately horizontally and vertically.
std::vector<std::size_t> domino_quadtree_order(std::size_t lx, std::size_t ly);

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

using NodePayload = std::variant<DenseTensor, QuantumTensor>;

/// Tomography settings shared by every open-link contraction of a network.
struct TomographyContext {
  NoiseSource* noise = nullptr;
  TomographyFold fold = TomographyFold::kResult;
  std::size_t settings = 0;  ///< running count of measured Pauli strings
};

enum class Init { kProductState, kRandomIsometric };

class TreeNetwork {
 public:
  TreeNetwork(TreeTopology topology, std::vector<NodePayload> nodes, std::size_t center);

  /// Binary TTN over n_sites qubits (n a power of two, at least 4),
  /// isometrized towards the first node of the top pair and normalized.
  static TreeNetwork binary(std::size_t n_sites, std::size_t chi, Init init, std::uint64_t seed,
                            std::vector<std::size_t> leaf_order = {});
  /// Same for a prepared topology with arbitrary site dimensions.
  static TreeNetwork from_topology(TreeTopology topology, Init init, std::uint64_t seed);

  const TreeTopology& topology() const { return topology_; }
  std::size_t center() const { return center_; }
  std::size_t n_nodes() const { return nodes_.size(); }

  bool is_quantum(std::size_t node) const;
  const DenseTensor& tensor(std::size_t node) const;
  const QuantumTensor& quantum(std::size_t node) const;
  /// Mutable access marks the node as modified.
  DenseTensor& mutable_tensor(std::size_t node);
  QuantumTensor& mutable_quantum(std::size_t node);
  void set_payload(std::size_t node, NodePayload payload);
  /// Overrides the center pointer without moving anything (for callers that
  /// prepare the gauge themselves).
  void set_center(std::size_t node);

  std::uint64_t version(std::size_t node) const { return versions_.at(node); }
  /// Process-wide modification clock; versions of all networks share it.
  static std::uint64_t clock();

  TomographyContext& tomography() { return tomography_; }

  /// Moves the isometrization center to an adjacent node: QR for classical
  /// centers, implicit isometrization for quantum centers.
  void shift_center(std::size_t target);
  /// Sequence of shifts along the unique path.
  void move_center(std::size_t target);

  /// Dense tensor of a node as it enters the contraction (quantum nodes are
  /// materialized including their P matrices).
  DenseTensor node_tensor(std::size_t node) const;
  /// Full wave function in site order (at most 2^20 amplitudes).
  Vector dense_state() const;
  /// Largest deviation from the isometry condition over non-center classical nodes.
  double max_isometry_violation() const;

  /// Structured text (JSON) dump of topology, tensors and center; round-trip exact.
  std::string checkpoint() const;
  static TreeNetwork from_checkpoint(const std::string& text);

 private:
  void touch(std::size_t node);

  TreeTopology topology_;
  std::vector<NodePayload> nodes_;
  std::size_t center_ = 0;
  std::vector<std::uint64_t> versions_;
  TomographyContext tomography_;
};

/// Per-link environments of an operator, cached per directed link and
/// recomputed only when a node behind the link has changed. A cache serves
/// a single network.
class EnvironmentCache {
 public:
  explicit EnvironmentCache(LocalOperator op);
  explicit EnvironmentCache(const pauli::OperatorSum& op) : EnvironmentCache(LocalOperator::from_pauli(op)) {}

  const LocalOperator& op() const { return op_; }
  /// Environment matrices of every term for the branch on `from`'s side of
  /// the link (from, to); nullopt marks terms acting as identity there.
  const std::vector<std::optional<Matrix>>& environment(TreeNetwork& net, std::size_t from, std::size_t to);
  EffectiveHamiltonian effective_hamiltonian(TreeNetwork& net, std::size_t node);
  EffectiveHamiltonian effective_hamiltonian(TreeNetwork& net) { return effective_hamiltonian(net, net.center()); }
  /// Number of directed-link environments computed so far.
  std::size_t computations() const { return computations_; }

 private:
  struct Entry {
    std::uint64_t stamp = 0;
    bool valid = false;
    std::vector<std::optional<Matrix>> per_term;
  };
  bool fresh(const TreeNetwork& net, const Entry& e, std::size_t from, std::size_t to) const;

  LocalOperator op_;
  std::map<std::pair<std::size_t, std::size_t>, Entry> entries_;
  std::size_t computations_ = 0;
};

/// Ground vector of a Hermitian eigendecomposition. Inside a degenerate
/// lowest eigenspace the choice is basis independent: the normalized
/// projection of the first basis vector with nonzero overlap, which makes
/// the first nonzero amplitude real, positive and maximal in magnitude.
Vector select_ground_vector(const MatrixEigh& eig, double degeneracy_tol = 1e-10);

/// Replaces the (classical) center tensor by the lowest eigenvector of heff
/// and returns the eigenvalue.
double optimize_center(TreeNetwork& net, const EffectiveHamiltonian& heff);

struct SweepOptions {
  std::size_t max_sweeps = 30;
  double tolerance = 1e-10;
};

/// Visiting order for one sweep: preorder from `start`.
std::vector<std::size_t> sweep_schedule(const TreeNetwork& net, std::size_t start);

/// One sweep over classical nodes in `schedule`; returns the last local energy.
double sweep(TreeNetwork& net, EnvironmentCache& cache, const std::vector<std::size_t>& schedule);

/// Sweeps until |dE| < tolerance or max_sweeps; returns per-sweep energies.
std::vector<double> ground_state_search(TreeNetwork& net, EnvironmentCache& cache, const SweepOptions& options = {});

/// <psi|obs|psi> evaluated at the covering node of the observable's support.
double expectation(TreeNetwork& net, const pauli::OperatorSum& obs);

/// <psi|op|psi> / <psi|psi> from the dense wave function (at most 16 sites).
double dense_energy(const TreeNetwork& net, const pauli::OperatorSum& op);

}  // namespace httn::ttn
