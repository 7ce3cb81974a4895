#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "httn/tensor.hpp"

namespace httn::pauli {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char to_char(Pauli p);
Pauli from_char(char c);
/// 2x2 matrix of a single Pauli letter.
Matrix matrix(Pauli p);

/// Weighted Pauli string; identity letters are never stored.
struct PauliTerm {
  cplx coefficient{1.0, 0.0};
  std::map<std::size_t, Pauli> letters;

  PauliTerm() = default;
  PauliTerm(cplx c, std::map<std::size_t, Pauli> l);

  bool commutes_with(const PauliTerm& other) const;
  /// Largest site index plus one (0 for the identity string).
  std::size_t support_end() const;
};

/// Sum of Pauli strings over `n_sites` qubits with canonical merging.
class OperatorSum {
 public:
  explicit OperatorSum(std::size_t n_sites);

  std::size_t n_sites() const { return n_sites_; }
  const std::vector<PauliTerm>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  /// Adds a term, merging it with an existing term of equal letters and
  /// dropping it when the merged coefficient falls below the cutoff.
  void add(const PauliTerm& term);
  void add(cplx coefficient, std::map<std::size_t, Pauli> letters);

  OperatorSum adjoint() const;
  bool is_hermitian(double tol = Tolerances::kMergeCutoff) const;
  /// Term-by-term equality after canonical merging (order-insensitive).
  bool equals(const OperatorSum& other, double tol = Tolerances::kMergeCutoff) const;

 private:
  std::size_t n_sites_;
  std::vector<PauliTerm> terms_;
};

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// -j sum_<ij> X_i X_j + h sum_i Z_i on a chain.
OperatorSum ising_1d(std::size_t n, double j, double h, bool periodic);
/// Same couplings on an lx-by-ly square lattice, site index = row * lx + col.
OperatorSum ising_2d(std::size_t lx, std::size_t ly, double j, double h, bool periodic);
/// Checkerboard plaquette model on a periodic lx-by-ly lattice: even
/// plaquettes carry XXXX, odd plaquettes ZZZZ, both with coefficient +1.
OperatorSum toric_code(std::size_t lx, std::size_t ly);

inline constexpr std::size_t kMaxDenseSites = 16;

/// Dense 2^n x 2^n matrix; site 0 is the most significant bit.
DenseTensor to_dense(const OperatorSum& op);
Vector apply_to_state(const OperatorSum& op, const Vector& psi);

/// Lowest eigenvalue: dense diagonalization up to 10 sites, Lanczos above.
double ground_energy(const OperatorSum& op);
/// Matrix-free Lanczos with full reorthogonalization.
double lanczos_ground_energy(const OperatorSum& op, std::size_t max_iterations = 300,
                             double tol = 1e-12, std::uint64_t seed = 7);

/// Text form: first line "sites N", then one term per line as
/// "coeff site:letter ..." with coeff either "re" or "(re,im)".
std::string to_text(const OperatorSum& op);
OperatorSum from_text(const std::string& text);

}  // namespace httn::pauli
