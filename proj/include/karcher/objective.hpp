#pragma once

// The Karcher objective F(X) = Σ ‖log(A_i^{-1/2} X A_i^{-1/2})‖_F², its
// Riemannian gradient, and the majorizing surrogate
//   G(X, X') = ⟨f1(X'), X⟩ + ⟨f2(X'), X⁻¹⟩ + c0(X')
// together with the closed-form minimizer of ⟨C1, X⟩ + ⟨C2, X⁻¹⟩.
//
// Every sum over the ensemble runs in ascending index order.

#include <cmath>
#include <cstddef>
#include <sstream>
#include <utility>
#include <vector>

#include "karcher/error.hpp"
#include "karcher/matrix.hpp"
#include "karcher/spd.hpp"

namespace karcher {

/// The problem instance {A_1, ..., A_n} with A_i^{1/2} and A_i^{-1/2} cached.
template <typename T = double>
class Ensemble {
 public:
  explicit Ensemble(std::vector<SpdMatrix<T>> mats) : mats_(std::move(mats)) {
    if (mats_.empty()) throw InvalidArgument("ensemble must contain at least one matrix");
    const std::size_t p = mats_.front().dim();
    halves_.reserve(mats_.size());
    for (std::size_t i = 0; i < mats_.size(); ++i) {
      if (mats_[i].dim() != p) {
        throw DimensionMismatch("ensemble matrix " + std::to_string(i) + " has dimension " +
                                std::to_string(mats_[i].dim()) + ", expected " +
                                std::to_string(p));
      }
      halves_.push_back(sqrt_pair(mats_[i]));
    }
  }

  std::size_t size() const noexcept { return mats_.size(); }
  std::size_t dim() const noexcept { return mats_.front().dim(); }

  const SpdMatrix<T>& operator[](std::size_t i) const { return mats_[i]; }
  const SpdMatrix<T>& sqrt(std::size_t i) const { return halves_[i].sqrt; }
  const SpdMatrix<T>& inv_sqrt(std::size_t i) const { return halves_[i].inv_sqrt; }
  const std::vector<SpdMatrix<T>>& matrices() const noexcept { return mats_; }

  template <typename U>
  Ensemble<U> cast() const {
    std::vector<SpdMatrix<U>> out;
    out.reserve(mats_.size());
    for (const auto& m : mats_) out.push_back(m.template cast<U>());
    return Ensemble<U>(std::move(out));
  }

 private:
  std::vector<SpdMatrix<T>> mats_;
  std::vector<SqrtPair<T>> halves_;
};

namespace detail {

template <typename T>
void require_dim(const Ensemble<T>& e, const Matrix<T>& x, const char* where) {
  if (x.rows() != e.dim() || x.cols() != e.dim()) {
    throw DimensionMismatch(std::string(where) + ": point is " + x.shape() +
                            ", ensemble dimension is " + std::to_string(e.dim()));
  }
}

template <typename T>
T sum_log_squares(const std::vector<T>& values) {
  using std::log;
  T sum(0);
  for (const T& v : values) {
    const T l = log(v);
    sum += l * l;
  }
  return sum;
}

}  // namespace detail

/// F(X) = Σ_i ‖log(A_i^{-1/2} X A_i^{-1/2})‖_F².
template <typename T>
T objective(const Ensemble<T>& e, const SpdMatrix<T>& x) {
  detail::require_dim(e, x.matrix(), "objective");
  T total(0);
  for (std::size_t i = 0; i < e.size(); ++i)
    total += detail::sum_log_squares(sym_eigvals(congruence(e.inv_sqrt(i).matrix(), x.matrix())));
  return total;
}

/// Σ_i log(X^{-1/2} A_i X^{-1/2}) together with X^{±1/2}, which the
/// exponential-map updates reuse.
template <typename T>
struct RiemannianGradient {
  Matrix<T> sum;
  SqrtPair<T> x_half;

  T norm() const { return frobenius_norm(sum); }
};

template <typename T>
RiemannianGradient<T> riemannian_gradient(const Ensemble<T>& e, const SpdMatrix<T>& x) {
  detail::require_dim(e, x.matrix(), "riemannian_gradient");
  RiemannianGradient<T> g{Matrix<T>(e.dim(), e.dim()), sqrt_pair(x)};
  for (std::size_t i = 0; i < e.size(); ++i)
    g.sum += log_m(congruence(g.x_half.inv_sqrt.matrix(), e[i]));
  return g;
}

/// D = (1/n) Σ_i log(X^{-1/2} A_i X^{-1/2}); zero exactly at the Karcher mean.
template <typename T>
Matrix<T> grad_direction(const Ensemble<T>& e, const SpdMatrix<T>& x) {
  return riemannian_gradient(e, x).sum / T(e.size());
}

/// (√((log x)² + 1) + log x) / x, evaluated without cancellation.
template <typename T>
T g1_scalar(const T& x) {
  using std::hypot;
  using std::log;
  if (!(x > T(0))) throw DomainError("g1 requires a positive argument");
  const T z = log(x);
  const T r = hypot(z, T(1));
  return z >= T(0) ? (r + z) / x : T(1) / ((r - z) * x);
}

/// (√((log x)² + 1) − log x) · x, evaluated without cancellation.
template <typename T>
T g2_scalar(const T& x) {
  using std::hypot;
  using std::log;
  if (!(x > T(0))) throw DomainError("g2 requires a positive argument");
  const T z = log(x);
  const T r = hypot(z, T(1));
  return z <= T(0) ? (r - z) * x : x / (r + z);
}

/// f1, f2 and F evaluated from one eigendecomposition per ensemble member.
template <typename T>
struct MajorizerTerms {
  SpdMatrix<T> f1;
  SpdMatrix<T> f2;
  T objective;
};

template <typename T>
MajorizerTerms<T> majorizer_terms(const Ensemble<T>& e, const SpdMatrix<T>& x) {
  detail::require_dim(e, x.matrix(), "majorizer_terms");
  const std::size_t p = e.dim();
  Matrix<T> f1(p, p);
  Matrix<T> f2(p, p);
  T total(0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const EigenPair<T> eig = sym_eig(congruence(e.inv_sqrt(i).matrix(), x.matrix()));
    total += detail::sum_log_squares(eig.values);
    f1 += congruence(e.inv_sqrt(i).matrix(), matrix_fn(eig, [](const T& v) { return g1_scalar(v); }));
    f2 += congruence(e.sqrt(i).matrix(), matrix_fn(eig, [](const T& v) { return g2_scalar(v); }));
  }
  return {SpdMatrix<T>::trusted(f1), SpdMatrix<T>::trusted(f2), total};
}

/// f1(X) = Σ A_i^{-1/2} g1(A_i^{-1/2} X A_i^{-1/2}) A_i^{-1/2}.
template <typename T>
SpdMatrix<T> f1(const Ensemble<T>& e, const SpdMatrix<T>& x) {
  return majorizer_terms(e, x).f1;
}

/// f2(X) = Σ A_i^{1/2} g2(A_i^{-1/2} X A_i^{-1/2}) A_i^{1/2}.
template <typename T>
SpdMatrix<T> f2(const Ensemble<T>& e, const SpdMatrix<T>& x) {
  return majorizer_terms(e, x).f2;
}

template <typename T = double>
struct SurrogateCoeffs {
  SpdMatrix<T> c1;
  SpdMatrix<T> c2;
  T c0;
};

/// Coefficients of G(·, xp). c0 is fixed by requiring G(xp, xp) = F(xp).
template <typename T>
SurrogateCoeffs<T> surrogate_coeffs(const Ensemble<T>& e, const SpdMatrix<T>& xp) {
  MajorizerTerms<T> terms = majorizer_terms(e, xp);
  const T c0 = terms.objective - frob_inner(terms.f1.matrix(), xp.matrix()) -
               frob_inner(terms.f2.matrix(), inv_m(xp).matrix());
  return {std::move(terms.f1), std::move(terms.f2), c0};
}

/// ⟨c1, X⟩ + ⟨c2, X⁻¹⟩ + c0.
template <typename T>
T surrogate_value(const SurrogateCoeffs<T>& s, const SpdMatrix<T>& x) {
  if (s.c1.dim() != x.dim() || s.c2.dim() != x.dim())
    throw DimensionMismatch("surrogate_value: dimension mismatch");
  return frob_inner(s.c1.matrix(), x.matrix()) + frob_inner(s.c2.matrix(), inv_m(x).matrix()) +
         s.c0;
}

/// argmin_X ⟨c1, X⟩ + ⟨c2, X⁻¹⟩ = c2^{1/2} (c2^{1/2} c1 c2^{1/2})^{-1/2} c2^{1/2}.
template <typename T>
SpdMatrix<T> surrogate_minimizer(const SpdMatrix<T>& c1, const SpdMatrix<T>& c2) {
  if (c1.dim() != c2.dim()) throw DimensionMismatch("surrogate_minimizer: dimension mismatch");
  const SpdMatrix<T> root = sqrt_m(c2);
  const SpdMatrix<T> middle = congruence(root.matrix(), c1);
  return congruence(root.matrix(), inv_sqrt_m(middle));
}

/// Euclidean derivatives of the building blocks of F, in the sense
/// Df(X)(H) = ⟨∇f(X), H⟩ for symmetric H.
namespace derivatives {

/// ∇⟨X⁻¹, A⟩ = −X⁻¹ A X⁻¹.
template <typename T>
Matrix<T> inverse_pairing(const SpdMatrix<T>& x, const Matrix<T>& a) {
  const SpdMatrix<T> xi = inv_m(x);
  return -congruence(xi.matrix(), a);
}

/// ∇‖log X‖_F² = 2 X⁻¹ log X.
template <typename T>
Matrix<T> log_norm_squared(const SpdMatrix<T>& x) {
  using std::log;
  return matrix_fn(sym_eig(x), [](const T& v) { return T(2) * T(log(v)) / v; });
}

/// ∇ tr(X A X A) = 2 A X A (A symmetric).
template <typename T>
Matrix<T> trace_product_squared(const Matrix<T>& x, const Matrix<T>& a) {
  return T(2) * congruence(a, x);
}

/// ∇‖X A‖_F² = X A² + A² X (A symmetric). Differs from 2 A X A unless X and A commute.
template <typename T>
Matrix<T> product_norm_squared(const Matrix<T>& x, const Matrix<T>& a) {
  const Matrix<T> a2 = a * a;
  return symmetrized(Matrix<T>(x * a2 + a2 * x));
}

/// ∇F(X) = Σ_i A_i^{-1/2} [2 M_i⁻¹ log M_i] A_i^{-1/2}, M_i = A_i^{-1/2} X A_i^{-1/2}.
template <typename T>
Matrix<T> objective_gradient(const Ensemble<T>& e, const SpdMatrix<T>& x) {
  detail::require_dim(e, x.matrix(), "objective_gradient");
  Matrix<T> g(e.dim(), e.dim());
  for (std::size_t i = 0; i < e.size(); ++i) {
    const SpdMatrix<T> m = congruence(e.inv_sqrt(i).matrix(), x);
    g += congruence(e.inv_sqrt(i).matrix(), log_norm_squared(m));
  }
  return g;
}

}  // namespace derivatives

}  // namespace karcher
