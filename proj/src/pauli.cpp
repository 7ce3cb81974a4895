#include "httn/pauli.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace httn::pauli {

char to_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

Pauli from_char(char c) {
  switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    default: throw std::invalid_argument(std::string("unknown Pauli letter '") + c + "'");
  }
}

Matrix matrix(Pauli p) {
  Matrix m = Matrix::Zero(2, 2);
  const cplx i{0.0, 1.0};
  switch (p) {
    case Pauli::I: m(0, 0) = 1.0; m(1, 1) = 1.0; break;
    case Pauli::X: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case Pauli::Y: m(0, 1) = -i; m(1, 0) = i; break;
    case Pauli::Z: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
  }
  return m;
}

PauliTerm::PauliTerm(cplx c, std::map<std::size_t, Pauli> l) : coefficient(c) {
  for (const auto& [site, p] : l)
    if (p != Pauli::I) letters.emplace(site, p);
}

bool PauliTerm::commutes_with(const PauliTerm& other) const {
  std::size_t anti = 0;
  for (const auto& [site, p] : letters) {
    auto it = other.letters.find(site);
    if (it != other.letters.end() && it->second != p) ++anti;
  }
  return anti % 2 == 0;
}

std::size_t PauliTerm::support_end() const {
  return letters.empty() ? 0 : letters.rbegin()->first + 1;
}

OperatorSum::OperatorSum(std::size_t n_sites) : n_sites_(n_sites) {
  if (n_sites == 0) throw std::invalid_argument("operator needs at least one site");
}

void OperatorSum::add(const PauliTerm& term) {
  if (term.support_end() > n_sites_)
    throw std::out_of_range("Pauli term acts outside the declared system size");
  auto it = std::find_if(terms_.begin(), terms_.end(),
                         [&](const PauliTerm& t) { return t.letters == term.letters; });
  if (it == terms_.end()) {
    if (std::abs(term.coefficient) > Tolerances::kMergeCutoff) terms_.push_back(term);
    return;
  }
  it->coefficient += term.coefficient;
  if (std::abs(it->coefficient) <= Tolerances::kMergeCutoff) terms_.erase(it);
}

void OperatorSum::add(cplx coefficient, std::map<std::size_t, Pauli> letters) {
  add(PauliTerm(coefficient, std::move(letters)));
}

OperatorSum OperatorSum::adjoint() const {
  OperatorSum out(n_sites_);
  for (const auto& t : terms_) out.add(PauliTerm(std::conj(t.coefficient), t.letters));
  return out;
}

bool OperatorSum::equals(const OperatorSum& other, double tol) const {
  if (n_sites_ != other.n_sites_ || terms_.size() != other.terms_.size()) return false;
  for (const auto& t : terms_) {
    auto it = std::find_if(other.terms_.begin(), other.terms_.end(),
                           [&](const PauliTerm& o) { return o.letters == t.letters; });
    if (it == other.terms_.end() || std::abs(it->coefficient - t.coefficient) > tol) return false;
  }
  return true;
}

bool OperatorSum::is_hermitian(double tol) const { return equals(adjoint(), tol); }

OperatorSum ising_1d(std::size_t n, double j, double h, bool periodic) {
  if (n < 2) throw ModelError("Ising chain needs at least two sites");
  OperatorSum op(n);
  const std::size_t bonds = periodic ? n : n - 1;
  for (std::size_t b = 0; b < bonds; ++b)
    op.add(-j, {{b, Pauli::X}, {(b + 1) % n, Pauli::X}});
  for (std::size_t s = 0; s < n; ++s) op.add(h, {{s, Pauli::Z}});
  return op;
}

OperatorSum ising_2d(std::size_t lx, std::size_t ly, double j, double h, bool periodic) {
  if (lx < 2 || ly < 2) throw ModelError("Ising lattice sides must be at least 2");
  OperatorSum op(lx * ly);
  auto site = [lx](std::size_t r, std::size_t c) { return r * lx + c; };
  for (std::size_t r = 0; r < ly; ++r) {
    for (std::size_t c = 0; c < lx; ++c) {
      if (periodic || c + 1 < lx)
        op.add(-j, {{site(r, c), Pauli::X}, {site(r, (c + 1) % lx), Pauli::X}});
      if (periodic || r + 1 < ly)
        op.add(-j, {{site(r, c), Pauli::X}, {site((r + 1) % ly, c), Pauli::X}});
    }
  }
  for (std::size_t s = 0; s < lx * ly; ++s) op.add(h, {{s, Pauli::Z}});
  return op;
}

OperatorSum toric_code(std::size_t lx, std::size_t ly) {
  if (lx < 2 || ly < 2 || lx % 2 != 0 || ly % 2 != 0)
    throw ModelError("toric code needs even lattice sides of at least 2");
  OperatorSum op(lx * ly);
  auto site = [lx, ly](std::size_t r, std::size_t c) { return (r % ly) * lx + (c % lx); };
  // Even plaquettes first, then odd ones, each in row-major corner order.
  for (int parity = 0; parity < 2; ++parity) {
    const Pauli letter = parity == 0 ? Pauli::X : Pauli::Z;
    for (std::size_t r = 0; r < ly; ++r) {
      for (std::size_t c = 0; c < lx; ++c) {
        if (static_cast<int>((r + c) % 2) != parity) continue;
        op.add(1.0, {{site(r, c), letter},
                     {site(r, c + 1), letter},
                     {site(r + 1, c), letter},
                     {site(r + 1, c + 1), letter}});
      }
    }
  }
  return op;
}

namespace {

struct TermMasks {
  std::uint64_t flip = 0;   // X or Y
  std::uint64_t phase = 0;  // Z or Y
  int y_count = 0;
};

TermMasks masks(const PauliTerm& t, std::size_t n) {
  TermMasks m;
  for (const auto& [site, p] : t.letters) {
    const std::uint64_t bit = std::uint64_t{1} << (n - 1 - site);
    if (p == Pauli::X || p == Pauli::Y) m.flip |= bit;
    if (p == Pauli::Z || p == Pauli::Y) m.phase |= bit;
    if (p == Pauli::Y) ++m.y_count;
  }
  return m;
}

// <x ^ flip| P |x> amplitude factor for basis state x: P|x> = f(x) |x ^ flip>.
inline cplx basis_factor(const TermMasks& m, std::uint64_t x) {
  // Y = i X Z, so Y|b> = i (-1)^b |1-b>.
  static const cplx i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const int sign = std::popcount(x & m.phase) & 1;
  cplx f = i_pow[m.y_count & 3];
  return sign ? -f : f;
}

}  // namespace

Vector apply_to_state(const OperatorSum& op, const Vector& psi) {
  const std::size_t n = op.n_sites();
  if (n > 62 || static_cast<std::size_t>(psi.size()) != (std::size_t{1} << n))
    throw std::invalid_argument("state length does not match 2^n_sites");
  Vector out = Vector::Zero(psi.size());
  const std::uint64_t dim = psi.size();
  for (const auto& t : op.terms()) {
    const TermMasks m = masks(t, n);
    for (std::uint64_t x = 0; x < dim; ++x)
      out[x ^ m.flip] += t.coefficient * basis_factor(m, x) * psi[x];
  }
  return out;
}

DenseTensor to_dense(const OperatorSum& op) {
  const std::size_t n = op.n_sites();
  if (n > kMaxDenseSites) throw std::length_error("to_dense supports at most 16 sites");
  const std::uint64_t dim = std::uint64_t{1} << n;
  DenseTensor out({dim, dim});
  auto data = out.data();
  for (const auto& t : op.terms()) {
    const TermMasks m = masks(t, n);
    for (std::uint64_t x = 0; x < dim; ++x)
      data[(x ^ m.flip) * dim + x] += t.coefficient * basis_factor(m, x);
  }
  return out;
}

double lanczos_ground_energy(const OperatorSum& op, std::size_t max_iterations, double tol,
                             std::uint64_t seed) {
  const std::size_t n = op.n_sites();
  const Eigen::Index dim = Eigen::Index{1} << n;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = cplx(normal(rng), normal(rng));
  v.normalize();

  const std::size_t kmax = std::min<std::size_t>(max_iterations, static_cast<std::size_t>(dim));
  std::vector<Vector> basis;
  std::vector<double> alpha, beta;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < kmax; ++k) {
    basis.push_back(v);
    Vector w = apply_to_state(op, v);
    const double a = v.dot(w).real();
    alpha.push_back(a);
    // full reorthogonalization, applied twice for stability
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) w -= b.dot(w) * b;
    const double bnorm = w.norm();

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(alpha.size(), alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      tri(i, i) = alpha[i];
      if (i + 1 < alpha.size()) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri, Eigen::EigenvaluesOnly);
    const double lowest = es.eigenvalues()[0];
    if (std::abs(lowest - previous) < tol || bnorm < 1e-13) return lowest;
    previous = lowest;
    beta.push_back(bnorm);
    v = w / bnorm;
  }
  return previous;
}

double ground_energy(const OperatorSum& op) {
  if (op.n_sites() <= 10) {
    const DenseTensor h = to_dense(op);
    return eigh(h.to_matrix()).values[0];
  }
  return lanczos_ground_energy(op);
}

std::string to_text(const OperatorSum& op) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "sites " << op.n_sites() << '\n';
  for (const auto& t : op.terms()) {
    if (t.coefficient.imag() == 0.0)
      out << t.coefficient.real();
    else
      out << '(' << t.coefficient.real() << ',' << t.coefficient.imag() << ')';
    for (const auto& [site, p] : t.letters) out << ' ' << site << ':' << to_char(p);
    out << '\n';
  }
  return out.str();
}

OperatorSum from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream hdr(line);
    std::string word;
    hdr >> word >> n;
    if (word != "sites" || n == 0) throw std::invalid_argument("expected header 'sites N'");
    break;
  }
  if (n == 0) throw std::invalid_argument("missing operator header");
  OperatorSum op(n);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string coeff_str;
    ls >> coeff_str;
    cplx coeff;
    if (!coeff_str.empty() && coeff_str.front() == '(') {
      std::istringstream cs(coeff_str);
      if (!(cs >> coeff)) throw std::invalid_argument("bad coefficient '" + coeff_str + "'");
    } else {
      std::size_t used = 0;
      coeff = std::stod(coeff_str, &used);
      if (used != coeff_str.size()) throw std::invalid_argument("bad coefficient '" + coeff_str + "'");
    }
    std::map<std::size_t, Pauli> letters;
    std::string tok;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon + 2 != tok.size())
        throw std::invalid_argument("bad site token '" + tok + "'");
      const std::size_t site = std::stoul(tok.substr(0, colon));
      if (!letters.emplace(site, from_char(tok[colon + 1])).second)
        throw std::invalid_argument("site listed twice in one term");
    }
    op.add(coeff, std::move(letters));
  }
  return op;
}

}  // namespace httn::pauli
