#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace httn {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RowMajorMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Numerical thresholds shared by every module.
struct Tolerances {
  static constexpr double kReconstruction = 1e-12;
  static constexpr double kIsometry = 1e-10;
  static constexpr double kPseudoInverse = 1e-12;
  static constexpr double kMergeCutoff = 1e-14;
};

class TensorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense complex tensor, row-major, with optional per-leg labels.
class DenseTensor {
 public:
  /// Rank-0 tensor holding a single zero.
  DenseTensor();
  explicit DenseTensor(std::vector<std::size_t> shape);
  DenseTensor(std::vector<std::size_t> shape, std::vector<cplx> data);

  static DenseTensor scalar(cplx value);
  static DenseTensor identity(std::size_t dim);
  /// Row-major copy of an Eigen matrix as a rank-2 tensor.
  static DenseTensor from_matrix(const Matrix& m);
  static DenseTensor from_vector(const Vector& v, std::vector<std::size_t> shape);
  /// Entries with i.i.d. standard normal real and imaginary parts.
  static DenseTensor random(std::vector<std::size_t> shape, std::mt19937_64& rng);

  std::size_t rank() const { return shape_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t dim(std::size_t leg) const { return shape_.at(leg); }
  std::size_t size() const { return data_.size(); }

  std::span<const cplx> data() const { return data_; }
  std::span<cplx> data() { return data_; }

  cplx& at(std::initializer_list<std::size_t> index);
  cplx at(std::initializer_list<std::size_t> index) const;
  std::size_t offset(std::span<const std::size_t> index) const;

  const std::vector<std::string>& labels() const { return labels_; }
  void set_labels(std::vector<std::string> labels);
  /// Leg position of a label; throws when absent.
  std::size_t leg(const std::string& label) const;

  /// Matricization with `row_legs` (in the given order) as rows and the
  /// remaining legs (in original order) as columns.
  Matrix to_matrix(std::span<const std::size_t> row_legs) const;
  Matrix to_matrix() const;
  Vector to_vector() const;

  DenseTensor permuted(std::span<const std::size_t> perm) const;
  DenseTensor reshaped(std::vector<std::size_t> shape) const;
  DenseTensor conj() const;
  DenseTensor& operator*=(cplx s);
  DenseTensor& operator+=(const DenseTensor& other);
  DenseTensor& operator-=(const DenseTensor& other);

  double norm() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<cplx> data_;
  std::vector<std::string> labels_;
};

DenseTensor operator*(cplx s, DenseTensor t);
DenseTensor operator+(DenseTensor a, const DenseTensor& b);
DenseTensor operator-(DenseTensor a, const DenseTensor& b);

std::size_t product(std::span<const std::size_t> dims);

/// Frobenius norm of a - b relative to the norm of b (absolute if b is zero).
double relative_distance(const DenseTensor& a, const DenseTensor& b);

using LegPair = std::pair<std::size_t, std::size_t>;

/// Sums over each (leg of a, leg of b) pair. Result legs are the free legs of
/// a followed by the free legs of b, each in original order.
DenseTensor contract(const DenseTensor& a, const DenseTensor& b, std::span<const LegPair> pairs);
DenseTensor contract(const DenseTensor& a, const DenseTensor& b, std::initializer_list<LegPair> pairs);

/// Contracts leg `leg` of `t` with the column index of `m`, i.e.
/// t'_{..i..} = sum_j m_{ij} t_{..j..}; the leg keeps its position.
DenseTensor apply_to_leg(const DenseTensor& t, std::size_t leg, const Matrix& m);

struct QrResult {
  DenseTensor q;  ///< kept legs, then the new link
  DenseTensor r;  ///< new link, then the complement legs in original order
};

/// QR decomposition with R's diagonal real and nonnegative.
QrResult qr_split(const DenseTensor& t, std::span<const std::size_t> kept_legs);
QrResult qr_split(const DenseTensor& t, std::initializer_list<std::size_t> kept_legs);

struct SvdResult {
  DenseTensor u;               ///< kept legs, then the new link
  std::vector<double> s;       ///< descending
  DenseTensor v;               ///< complement legs, then the new link
};

/// t = u * diag(s) * v^dagger over the new link.
SvdResult svd_split(const DenseTensor& t, std::span<const std::size_t> kept_legs);
SvdResult svd_split(const DenseTensor& t, std::initializer_list<std::size_t> kept_legs);

struct EighResult {
  std::vector<double> values;  ///< ascending
  DenseTensor vectors;         ///< columns are eigenvectors
};

/// Hermitian eigendecomposition of (m + m^dagger) / 2.
EighResult eigh(const DenseTensor& m);

struct MatrixEigh {
  Eigen::VectorXd values;
  Matrix vectors;
};
MatrixEigh eigh(const Matrix& m);

}  // namespace httn
