#pragma once

// Truncated seven-mode Fock space and the discretized Kerr Hamiltonian
// (hbar = 1). Ladder operators use the standard truncation: a word of ladder
// operators maps a basis state to zero as soon as any intermediate state
// leaves the basis.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "hexkerr/error.hpp"
#include "hexkerr/model.hpp"

namespace hexkerr {

using Occupation = std::array<int, kModeCount>;
using Cutoffs = std::array<int, kModeCount>;

inline constexpr std::size_t kDefaultBasisCap = 1'000'000;

class FockBasis {
 public:
  explicit FockBasis(const Cutoffs& cutoffs, std::optional<int> total_cutoff = std::nullopt,
                     std::size_t cap = kDefaultBasisCap)
      : cutoffs_(cutoffs), total_(total_cutoff) {
    for (const int c : cutoffs_) {
      if (c < 0) throw Error(ErrorCode::InvalidArgument, "Fock cutoffs must be non-negative");
    }
    if (total_ && *total_ < 0) throw Error(ErrorCode::InvalidArgument, "total photon cutoff must be non-negative");

    // Mixed-radix box, mode 6 fastest.
    std::size_t box = 1;
    for (int m = kModeCount - 1; m >= 0; --m) {
      stride_[static_cast<std::size_t>(m)] = box;
      box *= static_cast<std::size_t>(cutoffs_[static_cast<std::size_t>(m)] + 1);
      if (box > 64 * cap) throw too_large(box, cap);
    }
    lookup_.assign(box, -1);
    Occupation n{};
    for (std::size_t flat = 0; flat < box; ++flat) {
      if (!total_ || sum(n) <= *total_) {
        if (states_.size() >= cap) throw too_large(states_.size() + 1, cap);
        lookup_[flat] = static_cast<std::int64_t>(states_.size());
        states_.push_back(n);
      }
      for (int m = kModeCount - 1; m >= 0; --m) {
        auto& x = n[static_cast<std::size_t>(m)];
        if (++x <= cutoffs_[static_cast<std::size_t>(m)]) break;
        x = 0;
      }
    }
  }

  [[nodiscard]] std::size_t size() const { return states_.size(); }
  [[nodiscard]] const Cutoffs& cutoffs() const { return cutoffs_; }
  [[nodiscard]] std::optional<int> total_cutoff() const { return total_; }
  [[nodiscard]] const Occupation& state(std::size_t k) const { return states_[k]; }
  [[nodiscard]] const std::vector<Occupation>& states() const { return states_; }

  [[nodiscard]] bool contains(const Occupation& n) const {
    for (std::size_t m = 0; m < kModeCount; ++m) {
      if (n[m] < 0 || n[m] > cutoffs_[m]) return false;
    }
    return !total_ || sum(n) <= *total_;
  }

  /// Position of n in the enumeration, or nullopt when outside the basis.
  [[nodiscard]] std::optional<std::size_t> index_of(const Occupation& n) const {
    if (!contains(n)) return std::nullopt;
    std::size_t flat = 0;
    for (std::size_t m = 0; m < kModeCount; ++m) flat += stride_[m] * static_cast<std::size_t>(n[m]);
    const auto k = lookup_[flat];
    if (k < 0) return std::nullopt;
    return static_cast<std::size_t>(k);
  }

  bool operator==(const FockBasis& o) const { return cutoffs_ == o.cutoffs_ && total_ == o.total_; }

  static int sum(const Occupation& n) {
    int s = 0;
    for (const int x : n) s += x;
    return s;
  }

 private:
  static Error too_large(std::size_t n, std::size_t cap) {
    std::ostringstream os;
    os << "Fock basis too large: " << n << " states exceeds cap " << cap;
    return Error(ErrorCode::BasisTooLarge, os.str());
  }

  Cutoffs cutoffs_;
  std::optional<int> total_;
  std::array<std::size_t, kModeCount> stride_{};
  std::vector<std::int64_t> lookup_;
  std::vector<Occupation> states_;
};

using SparseMatrixC = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

class SparseOperator {
 public:
  SparseOperator(std::shared_ptr<const FockBasis> basis, SparseMatrixC mat)
      : basis_(std::move(basis)), mat_(std::move(mat)) {
    if (!basis_) throw Error(ErrorCode::InvalidArgument, "operator needs a basis");
    const auto n = static_cast<Eigen::Index>(basis_->size());
    if (mat_.rows() != n || mat_.cols() != n) throw Error(ErrorCode::BasisMismatch, "matrix size differs from basis size");
  }

  static SparseOperator zero(std::shared_ptr<const FockBasis> basis) {
    const auto n = static_cast<Eigen::Index>(basis->size());
    return {std::move(basis), SparseMatrixC(n, n)};
  }

  [[nodiscard]] const FockBasis& basis() const { return *basis_; }
  [[nodiscard]] const std::shared_ptr<const FockBasis>& basis_ptr() const { return basis_; }
  [[nodiscard]] const SparseMatrixC& matrix() const { return mat_; }

  [[nodiscard]] Complex entry(std::size_t row, std::size_t col) const {
    return mat_.coeff(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }

  [[nodiscard]] SparseOperator adjoint() const { return {basis_, SparseMatrixC(mat_.adjoint())}; }

  /// Largest |A_ij - conj(A_ji)|.
  [[nodiscard]] double hermiticity_error() const { return max_abs(SparseMatrixC(mat_ - SparseMatrixC(mat_.adjoint()))); }

  [[nodiscard]] bool is_diagonal() const {
    for (Eigen::Index r = 0; r < mat_.outerSize(); ++r) {
      for (SparseMatrixC::InnerIterator it(mat_, r); it; ++it) {
        if (it.col() != r && it.value() != Complex{}) return false;
      }
    }
    return true;
  }

  [[nodiscard]] Complex trace() const {
    Complex t{};
    for (Eigen::Index r = 0; r < mat_.outerSize(); ++r) t += mat_.coeff(r, r);
    return t;
  }

  [[nodiscard]] double max_abs_entry() const { return max_abs(mat_); }

  SparseOperator& operator+=(const SparseOperator& o) {
    require_same_basis(o);
    mat_ += o.mat_;
    return *this;
  }
  SparseOperator& operator-=(const SparseOperator& o) {
    require_same_basis(o);
    mat_ -= o.mat_;
    return *this;
  }
  SparseOperator& operator*=(Complex s) {
    mat_ *= s;
    return *this;
  }

  friend SparseOperator operator+(SparseOperator a, const SparseOperator& b) { return a += b; }
  friend SparseOperator operator-(SparseOperator a, const SparseOperator& b) { return a -= b; }
  friend SparseOperator operator*(Complex s, SparseOperator a) { return a *= s; }
  friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
    a.require_same_basis(b);
    return {a.basis_, SparseMatrixC(a.mat_ * b.mat_)};
  }

  void require_same_basis(const SparseOperator& o) const {
    if (basis_ != o.basis_ && !(*basis_ == *o.basis_)) {
      throw Error(ErrorCode::BasisMismatch, "operators live on different Fock bases");
    }
  }

  static double max_abs(const SparseMatrixC& m) {
    double best = 0.0;
    for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
      for (SparseMatrixC::InnerIterator it(m, r); it; ++it) best = std::max(best, std::abs(it.value()));
    }
    return best;
  }

 private:
  std::shared_ptr<const FockBasis> basis_;
  SparseMatrixC mat_;
};

/// Max absolute entry of ab - ba.
inline double commutator_norm(const SparseOperator& a, const SparseOperator& b) {
  a.require_same_basis(b);
  const SparseMatrixC c = a.matrix() * b.matrix() - b.matrix() * a.matrix();
  return SparseOperator::max_abs(c);
}

// Ladder words -----------------------------------------------------------

struct Ladder {
  int mode;
  bool dagger;
};

inline constexpr Ladder ann(int m) { return {m, false}; }
inline constexpr Ladder cre(int m) { return {m, true}; }

/// Product of ladder operators written left to right (the rightmost acts first).
using LadderWord = std::vector<Ladder>;

struct WordTerm {
  Complex coeff;
  LadderWord word;
};

/// Applies a word to basis state k; nullopt when the image vanishes.
inline std::optional<std::pair<std::size_t, double>> apply_word(const FockBasis& basis, std::size_t k,
                                                                 const LadderWord& word) {
  Occupation n = basis.state(k);
  double amp = 1.0;
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    auto& x = n[static_cast<std::size_t>(it->mode)];
    if (it->dagger) {
      ++x;
      amp *= std::sqrt(static_cast<double>(x));
    } else {
      if (x == 0) return std::nullopt;
      amp *= std::sqrt(static_cast<double>(x));
      --x;
    }
    if (!basis.contains(n)) return std::nullopt;
  }
  return std::make_pair(*basis.index_of(n), amp);
}

inline SparseOperator build_from_words(const std::shared_ptr<const FockBasis>& basis, const std::vector<WordTerm>& terms) {
  std::vector<Eigen::Triplet<Complex>> trip;
  for (std::size_t k = 0; k < basis->size(); ++k) {
    for (const auto& t : terms) {
      if (const auto img = apply_word(*basis, k, t.word)) {
        trip.emplace_back(static_cast<Eigen::Index>(img->first), static_cast<Eigen::Index>(k), t.coeff * img->second);
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(basis->size());
  SparseMatrixC m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  m.prune(Complex{});
  return {basis, std::move(m)};
}

/// Each word plus its Hermitian conjugate, with the given prefactor.
inline std::vector<WordTerm> with_hc(Complex coeff, const std::vector<LadderWord>& words) {
  std::vector<WordTerm> out;
  for (const auto& w : words) {
    LadderWord adj;
    for (auto it = w.rbegin(); it != w.rend(); ++it) adj.push_back({it->mode, !it->dagger});
    out.push_back({coeff, w});
    out.push_back({std::conj(coeff), adj});
  }
  return out;
}

inline void check_mode(int j) {
  if (j < 0 || j >= kModeCount) throw Error(ErrorCode::InvalidArgument, "mode index must be in 0..6");
}

inline SparseOperator annihilation(const std::shared_ptr<const FockBasis>& basis, int j) {
  check_mode(j);
  return build_from_words(basis, {{1.0, {ann(j)}}});
}

inline SparseOperator creation(const std::shared_ptr<const FockBasis>& basis, int j) {
  check_mode(j);
  return build_from_words(basis, {{1.0, {cre(j)}}});
}

inline SparseOperator number(const std::shared_ptr<const FockBasis>& basis, int j) {
  check_mode(j);
  std::vector<Eigen::Triplet<Complex>> trip;
  for (std::size_t k = 0; k < basis->size(); ++k) {
    const int n = basis->state(k)[static_cast<std::size_t>(j)];
    if (n != 0) trip.emplace_back(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k), Complex(n));
  }
  const auto dim = static_cast<Eigen::Index>(basis->size());
  SparseMatrixC m(dim, dim);
  m.setFromTriplets(trip.begin(), trip.end());
  return {basis, std::move(m)};
}

inline SparseOperator identity(const std::shared_ptr<const FockBasis>& basis) {
  const auto dim = static_cast<Eigen::Index>(basis->size());
  SparseMatrixC m(dim, dim);
  m.setIdentity();
  return {basis, std::move(m)};
}

/// N_i + N_{i+1} - N_{i+3} - N_{i+4} for hexagonal i.
inline SparseOperator number_combination(const std::shared_ptr<const FockBasis>& basis, int i) {
  if (i < 1 || i > 6) throw Error(ErrorCode::InvalidArgument, "N_- needs a hexagonal mode index 1..6, got " + std::to_string(i));
  return number(basis, i) + number(basis, hx(i, 1)) - number(basis, hx(i, 3)) - number(basis, hx(i, 4));
}

/// Largest deviation of [a_j, a_j^+] from the identity over basis states
/// whose mode-j image under a_j^+ stays in the basis.
inline double ladder_commutator_defect(const std::shared_ptr<const FockBasis>& basis, int j) {
  const SparseOperator a = annihilation(basis, j);
  const SparseOperator ad = creation(basis, j);
  const SparseMatrixC c = a.matrix() * ad.matrix() - ad.matrix() * a.matrix();
  double worst = 0.0;
  for (std::size_t k = 0; k < basis->size(); ++k) {
    Occupation up = basis->state(k);
    ++up[static_cast<std::size_t>(j)];
    if (!basis->contains(up)) continue;
    const auto r = static_cast<Eigen::Index>(k);
    for (SparseMatrixC::InnerIterator it(c, r); it; ++it) {
      const Complex expect = it.col() == r ? Complex{1.0} : Complex{};
      worst = std::max(worst, std::abs(it.value() - expect));
    }
    if (c.coeff(r, r) == Complex{}) worst = std::max(worst, 1.0);
  }
  return worst;
}

// Hamiltonian pieces -----------------------------------------------------

enum class InteractionTerm { SPM, CPM, FWM1, FWM2, FWM3 };

constexpr std::string_view to_string(InteractionTerm t) noexcept {
  switch (t) {
    case InteractionTerm::SPM: return "H_SPM";
    case InteractionTerm::CPM: return "H_CPM";
    case InteractionTerm::FWM1: return "H_FWM1";
    case InteractionTerm::FWM2: return "H_FWM2";
    case InteractionTerm::FWM3: return "H_FWM3";
  }
  return "?";
}

inline constexpr std::array<InteractionTerm, 5> kInteractionTerms{InteractionTerm::SPM, InteractionTerm::CPM,
                                                                  InteractionTerm::FWM1, InteractionTerm::FWM2,
                                                                  InteractionTerm::FWM3};

inline void require_pump_cutoff(const FockBasis& basis) {
  if (basis.cutoffs()[0] < 2) {
    throw Error(ErrorCode::InvalidArgument, "mode-0 cutoff must be at least 2 for the interaction Hamiltonian (got " +
                                                std::to_string(basis.cutoffs()[0]) + ")");
  }
}

inline SparseOperator build_term(InteractionTerm term, double g, double gamma,
                                 const std::shared_ptr<const FockBasis>& basis) {
  const double gg = gamma * g;
  std::vector<WordTerm> words;
  switch (term) {
    case InteractionTerm::SPM:
      for (int j = 0; j < kModeCount; ++j) words.push_back({-0.5 * gg, {cre(j), cre(j), ann(j), ann(j)}});
      break;
    case InteractionTerm::CPM:
      for (int i = 0; i < kModeCount; ++i) {
        for (int j = i + 1; j < kModeCount; ++j) words.push_back({-2.0 * gg, {cre(i), ann(i), cre(j), ann(j)}});
      }
      break;
    case InteractionTerm::FWM1: {
      std::vector<LadderWord> w;
      for (int j = 1; j <= 3; ++j) w.push_back({ann(0), ann(0), cre(j), cre(hx(j, 3))});
      words = with_hc(-gg, w);
      break;
    }
    case InteractionTerm::FWM2: {
      std::vector<LadderWord> w;
      for (int i = 1; i <= 3; ++i) {
        for (int j = i + 1; j <= 3; ++j) w.push_back({ann(i), ann(hx(i, 3)), cre(j), cre(hx(j, 3))});
      }
      words = with_hc(-2.0 * gg, w);
      break;
    }
    case InteractionTerm::FWM3: {
      std::vector<LadderWord> w;
      for (int j = 1; j <= 6; ++j) w.push_back({ann(0), ann(j), cre(hx(j, 1)), cre(hx(j, 5))});
      words = with_hc(-2.0 * gg, w);
      break;
    }
  }
  return build_from_words(basis, words);
}

inline SparseOperator build_interaction(double g, double gamma, const std::shared_ptr<const FockBasis>& basis) {
  require_pump_cutoff(*basis);
  SparseOperator h = SparseOperator::zero(basis);
  for (const auto t : kInteractionTerms) h += build_term(t, g, gamma, basis);
  return h;
}

/// gamma (delta N_0 + (delta + ld2kc2) sum N_j) + i gamma (E_in a_0^+ - E_in^* a_0),
/// with the hexagonal detuning fixed at 2 on the critical circle.
inline SparseOperator build_free_and_drive(double delta, Complex e_in, const std::shared_ptr<const FockBasis>& basis,
                                           double gamma = 1.0, double hex_detuning = 2.0) {
  SparseOperator h = (gamma * delta) * number(basis, 0);
  for (int j = 1; j <= 6; ++j) h += (gamma * hex_detuning) * number(basis, j);
  if (e_in != Complex{}) {
    h += build_from_words(basis, with_hc(kI * gamma * e_in, std::vector<LadderWord>{LadderWord{cre(0)}}));
  }
  return h;
}

}  // namespace hexkerr
