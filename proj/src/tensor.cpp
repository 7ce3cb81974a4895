#include "httn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace httn {

namespace {

std::vector<std::size_t> row_major_strides(const std::vector<std::size_t>& shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  return strides;
}

std::vector<std::size_t> complement(std::size_t rank, std::span<const std::size_t> legs) {
  std::vector<bool> used(rank, false);
  for (auto l : legs) {
    if (l >= rank) throw TensorError("leg index out of range");
    if (used[l]) throw TensorError("leg listed twice");
    used[l] = true;
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < rank; ++i)
    if (!used[i]) rest.push_back(i);
  return rest;
}

void check_split(const DenseTensor& t, std::span<const std::size_t> kept) {
  if (kept.empty() || kept.size() >= t.rank())
    throw std::invalid_argument("kept legs must be a nonempty strict subset of the tensor legs");
}

}  // namespace

DenseTensor::DenseTensor() : data_(1, cplx{0.0, 0.0}) {}

DenseTensor::DenseTensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(product(shape_), cplx{0.0, 0.0}) {
  for (auto d : shape_)
    if (d == 0) throw TensorError("tensor legs must have positive dimension");
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<cplx> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto d : shape_)
    if (d == 0) throw TensorError("tensor legs must have positive dimension");
  if (data_.size() != product(shape_))
    throw TensorError("amplitude count does not match the shape");
}

DenseTensor DenseTensor::scalar(cplx value) { return DenseTensor({}, {value}); }

DenseTensor DenseTensor::identity(std::size_t dim) {
  DenseTensor t({dim, dim});
  for (std::size_t i = 0; i < dim; ++i) t.data_[i * dim + i] = 1.0;
  return t;
}

DenseTensor DenseTensor::from_matrix(const Matrix& m) {
  DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  Eigen::Map<RowMajorMatrix>(t.data_.data(), m.rows(), m.cols()) = m;
  return t;
}

DenseTensor DenseTensor::from_vector(const Vector& v, std::vector<std::size_t> shape) {
  if (product(shape) != static_cast<std::size_t>(v.size()))
    throw TensorError("vector length does not match the shape");
  return DenseTensor(std::move(shape), std::vector<cplx>(v.data(), v.data() + v.size()));
}

DenseTensor DenseTensor::random(std::vector<std::size_t> shape, std::mt19937_64& rng) {
  DenseTensor t(std::move(shape));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& x : t.data_) {
    const double re = normal(rng);
    const double im = normal(rng);
    x = {re, im};
  }
  return t;
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) throw TensorError("index rank mismatch");
  std::size_t off = 0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= shape_[i]) throw TensorError("index out of range");
    off = off * shape_[i] + index[i];
  }
  return off;
}

cplx& DenseTensor::at(std::initializer_list<std::size_t> index) {
  return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

cplx DenseTensor::at(std::initializer_list<std::size_t> index) const {
  return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

void DenseTensor::set_labels(std::vector<std::string> labels) {
  if (!labels.empty() && labels.size() != shape_.size())
    throw TensorError("label count must equal the tensor rank");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels)
    if (!seen.insert(l).second) throw TensorError("duplicate leg label '" + l + "'");
  labels_ = std::move(labels);
}

std::size_t DenseTensor::leg(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw TensorError("no leg labelled '" + label + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

DenseTensor DenseTensor::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != rank()) throw TensorError("permutation rank mismatch");
  if (complement(rank(), perm).size() != 0) throw TensorError("not a permutation");
  bool trivial = true;
  for (std::size_t i = 0; i < perm.size(); ++i) trivial = trivial && perm[i] == i;
  if (trivial) return *this;

  std::vector<std::size_t> new_shape(rank());
  for (std::size_t i = 0; i < rank(); ++i) new_shape[i] = shape_[perm[i]];
  const auto old_strides = row_major_strides(shape_);
  std::vector<std::size_t> src_strides(rank());
  for (std::size_t i = 0; i < rank(); ++i) src_strides[i] = old_strides[perm[i]];

  DenseTensor out(new_shape);
  std::vector<std::size_t> idx(rank(), 0);
  std::size_t src = 0;
  const std::size_t n = data_.size();
  for (std::size_t dst = 0; dst < n; ++dst) {
    out.data_[dst] = data_[src];
    for (std::size_t k = rank(); k-- > 0;) {
      if (++idx[k] < new_shape[k]) {
        src += src_strides[k];
        break;
      }
      src -= src_strides[k] * (new_shape[k] - 1);
      idx[k] = 0;
    }
  }
  if (!labels_.empty()) {
    std::vector<std::string> labels(rank());
    for (std::size_t i = 0; i < rank(); ++i) labels[i] = labels_[perm[i]];
    out.labels_ = std::move(labels);
  }
  return out;
}

DenseTensor DenseTensor::reshaped(std::vector<std::size_t> shape) const {
  if (product(shape) != data_.size()) throw TensorError("reshape changes the element count");
  return DenseTensor(std::move(shape), data_);
}

Matrix DenseTensor::to_matrix(std::span<const std::size_t> row_legs) const {
  auto cols = complement(rank(), row_legs);
  std::vector<std::size_t> perm(row_legs.begin(), row_legs.end());
  perm.insert(perm.end(), cols.begin(), cols.end());
  const DenseTensor p = permuted(perm);
  std::size_t rows = 1;
  for (auto l : row_legs) rows *= shape_[l];
  const std::size_t ncols = data_.size() / rows;
  return Eigen::Map<const RowMajorMatrix>(p.data_.data(), rows, ncols);
}

Matrix DenseTensor::to_matrix() const {
  if (rank() != 2) throw TensorError("to_matrix() requires a rank-2 tensor");
  return Eigen::Map<const RowMajorMatrix>(data_.data(), shape_[0], shape_[1]);
}

Vector DenseTensor::to_vector() const {
  return Eigen::Map<const Vector>(data_.data(), data_.size());
}

DenseTensor DenseTensor::conj() const {
  DenseTensor out = *this;
  for (auto& x : out.data_) x = std::conj(x);
  return out;
}

DenseTensor& DenseTensor::operator*=(cplx s) {
  for (auto& x : data_) x *= s;
  return *this;
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
  if (other.shape_ != shape_) throw TensorError("shape mismatch in addition");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
  if (other.shape_ != shape_) throw TensorError("shape mismatch in subtraction");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

double DenseTensor::norm() const {
  double acc = 0.0;
  for (const auto& x : data_) acc += std::norm(x);
  return std::sqrt(acc);
}

DenseTensor operator*(cplx s, DenseTensor t) { return t *= s; }
DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }

std::size_t product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

double relative_distance(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape()) throw TensorError("shape mismatch in relative_distance");
  const double diff = (a - b).norm();
  const double ref = b.norm();
  return ref > 0.0 ? diff / ref : diff;
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b, std::span<const LegPair> pairs) {
  std::vector<std::size_t> a_legs, b_legs;
  for (const auto& [la, lb] : pairs) {
    if (la >= a.rank() || lb >= b.rank()) throw TensorError("contraction leg out of range");
    if (a.dim(la) != b.dim(lb)) {
      std::ostringstream msg;
      msg << "contraction dimension mismatch: leg " << la << " of a (dim " << a.dim(la)
          << ") vs leg " << lb << " of b (dim " << b.dim(lb) << ")";
      throw TensorError(msg.str());
    }
    a_legs.push_back(la);
    b_legs.push_back(lb);
  }
  const auto a_free = complement(a.rank(), a_legs);
  const auto b_free = complement(b.rank(), b_legs);

  std::vector<std::size_t> a_perm = a_free;
  a_perm.insert(a_perm.end(), a_legs.begin(), a_legs.end());
  std::vector<std::size_t> b_perm = b_legs;
  b_perm.insert(b_perm.end(), b_free.begin(), b_free.end());

  std::size_t m = 1, k = 1, n = 1;
  std::vector<std::size_t> out_shape;
  for (auto l : a_free) {
    m *= a.dim(l);
    out_shape.push_back(a.dim(l));
  }
  for (auto l : a_legs) k *= a.dim(l);
  for (auto l : b_free) {
    n *= b.dim(l);
    out_shape.push_back(b.dim(l));
  }

  const DenseTensor ap = a.permuted(a_perm);
  const DenseTensor bp = b.permuted(b_perm);
  DenseTensor out(out_shape);
  Eigen::Map<RowMajorMatrix>(out.data().data(), m, n).noalias() =
      Eigen::Map<const RowMajorMatrix>(ap.data().data(), m, k) *
      Eigen::Map<const RowMajorMatrix>(bp.data().data(), k, n);

  if (!a.labels().empty() && !b.labels().empty()) {
    std::vector<std::string> labels;
    for (auto l : a_free) labels.push_back(a.labels()[l]);
    for (auto l : b_free) labels.push_back(b.labels()[l]);
    try {
      out.set_labels(std::move(labels));
    } catch (const TensorError&) {
      // clashing labels from the two operands are dropped
    }
  }
  return out;
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b, std::initializer_list<LegPair> pairs) {
  return contract(a, b, std::span<const LegPair>(pairs.begin(), pairs.size()));
}

DenseTensor apply_to_leg(const DenseTensor& t, std::size_t leg, const Matrix& m) {
  if (leg >= t.rank()) throw TensorError("leg out of range");
  if (static_cast<std::size_t>(m.cols()) != t.dim(leg))
    throw TensorError("matrix does not match the leg dimension");
  std::size_t left = 1, right = 1;
  for (std::size_t i = 0; i < leg; ++i) left *= t.dim(i);
  for (std::size_t i = leg + 1; i < t.rank(); ++i) right *= t.dim(i);
  auto shape = t.shape();
  shape[leg] = static_cast<std::size_t>(m.rows());
  DenseTensor out(shape);
  const std::size_t din = t.dim(leg), dout = shape[leg];
  for (std::size_t l = 0; l < left; ++l) {
    Eigen::Map<const RowMajorMatrix> src(t.data().data() + l * din * right, din, right);
    Eigen::Map<RowMajorMatrix> dst(out.data().data() + l * dout * right, dout, right);
    dst.noalias() = m * src;
  }
  if (!t.labels().empty()) out.set_labels(t.labels());
  return out;
}

QrResult qr_split(const DenseTensor& t, std::span<const std::size_t> kept_legs) {
  check_split(t, kept_legs);
  const auto rest = complement(t.rank(), kept_legs);
  const Matrix a = t.to_matrix(kept_legs);
  const auto rows = a.rows(), cols = a.cols();
  const auto k = std::min(rows, cols);

  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, k);
  Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < k; ++i) {
    const cplx d = r(i, i);
    const double mag = std::abs(d);
    const cplx phase = mag > 0.0 ? d / mag : cplx{1.0, 0.0};
    r.row(i) *= std::conj(phase);
    q.col(i) *= phase;
  }

  std::vector<std::size_t> q_shape, r_shape{static_cast<std::size_t>(k)};
  for (auto l : kept_legs) q_shape.push_back(t.dim(l));
  q_shape.push_back(static_cast<std::size_t>(k));
  for (auto l : rest) r_shape.push_back(t.dim(l));

  QrResult out{DenseTensor(q_shape), DenseTensor(r_shape)};
  Eigen::Map<RowMajorMatrix>(out.q.data().data(), rows, k) = q;
  Eigen::Map<RowMajorMatrix>(out.r.data().data(), k, cols) = r;
  return out;
}

QrResult qr_split(const DenseTensor& t, std::initializer_list<std::size_t> kept_legs) {
  return qr_split(t, std::span<const std::size_t>(kept_legs.begin(), kept_legs.size()));
}

SvdResult svd_split(const DenseTensor& t, std::span<const std::size_t> kept_legs) {
  check_split(t, kept_legs);
  const auto rest = complement(t.rank(), kept_legs);
  const Matrix a = t.to_matrix(kept_legs);
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto k = svd.singularValues().size();

  std::vector<std::size_t> u_shape, v_shape;
  for (auto l : kept_legs) u_shape.push_back(t.dim(l));
  u_shape.push_back(static_cast<std::size_t>(k));
  for (auto l : rest) v_shape.push_back(t.dim(l));
  v_shape.push_back(static_cast<std::size_t>(k));

  SvdResult out{DenseTensor(u_shape), {}, DenseTensor(v_shape)};
  Eigen::Map<RowMajorMatrix>(out.u.data().data(), a.rows(), k) = svd.matrixU();
  Eigen::Map<RowMajorMatrix>(out.v.data().data(), a.cols(), k) = svd.matrixV();
  out.s.assign(svd.singularValues().data(), svd.singularValues().data() + k);
  return out;
}

SvdResult svd_split(const DenseTensor& t, std::initializer_list<std::size_t> kept_legs) {
  return svd_split(t, std::span<const std::size_t>(kept_legs.begin(), kept_legs.size()));
}

MatrixEigh eigh(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigh requires a square matrix");
  const Matrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw TensorError("Hermitian eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

EighResult eigh(const DenseTensor& m) {
  if (m.rank() != 2 || m.dim(0) != m.dim(1))
    throw std::invalid_argument("eigh requires a square matrix");
  auto res = eigh(m.to_matrix());
  EighResult out;
  out.values.assign(res.values.data(), res.values.data() + res.values.size());
  out.vectors = DenseTensor::from_matrix(res.vectors);
  return out;
}

}  // namespace httn
