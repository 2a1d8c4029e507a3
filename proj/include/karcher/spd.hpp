#pragma once

// Symmetric positive definite matrices and the spectral machinery built on
// them: a cyclic Jacobi eigensolver, matrix functions U f(Λ) Uᵀ, and the
// affine-invariant geodesic and distance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>
#include <vector>

#include "karcher/error.hpp"
#include "karcher/matrix.hpp"

namespace karcher {

namespace tolerance {
inline constexpr double symmetry = 1e-12;
inline constexpr double orthogonality = 1e-10;
inline constexpr double reconstruction = 1e-10;
inline constexpr double commutation = 1e-8;
/// Smallest admissible eigenvalue, relative to the largest.
inline constexpr double positivity_floor = 1e-13;
}  // namespace tolerance

inline constexpr int kJacobiMaxSweeps = 100;

/// Orthonormal eigenvectors (columns of `vectors`) and eigenvalues, descending.
template <typename T = double>
struct EigenPair {
  Matrix<T> vectors;
  std::vector<T> values;
};

namespace detail {

template <typename T>
void require_symmetric(const Matrix<T>& m, const char* where) {
  if (!m.square()) throw DimensionMismatch(std::string(where) + ": non-square " + m.shape());
  const T asym = relative_asymmetry(m);
  if (asym > T(tolerance::symmetry)) {
    std::ostringstream os;
    os << where << ": matrix is not symmetric (relative asymmetry " << asym << ")";
    throw NotSymmetric(os.str(), static_cast<double>(asym));
  }
}

// Cyclic-by-row Jacobi. An off-diagonal entry is annihilated unless it is
// negligible relative to the geometric mean of its two diagonal entries, which
// keeps small eigenvalues of ill-conditioned SPD input relatively accurate.
// Returns unsorted eigenvalues; accumulates rotations into `vectors` if given.
template <typename T>
std::vector<T> jacobi(Matrix<T> a, Matrix<T>* vectors) {
  using std::abs;
  using std::sqrt;
  const std::size_t n = a.rows();
  if (vectors) *vectors = Matrix<T>::identity(n);
  const T rel_tol = T(std::max<std::size_t>(n, 1)) * std::numeric_limits<T>::epsilon();
  const T tiny = std::numeric_limits<T>::min();

  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const T apq = a(p, q);
        if (apq == T(0)) continue;
        const T app = a(p, p);
        const T aqq = a(q, q);
        if (abs(apq) <= rel_tol * sqrt(abs(app) * abs(aqq)) || abs(apq) < tiny) {
          a(p, q) = T(0);
          a(q, p) = T(0);
          continue;
        }
        rotated = true;
        const T theta = (aqq - app) / (T(2) * apq);
        T t;
        if (abs(theta) > T(1e150)) {
          t = T(1) / (T(2) * theta);
        } else {
          t = T(1) / (abs(theta) + sqrt(theta * theta + T(1)));
          if (theta < T(0)) t = -t;
        }
        const T c = T(1) / sqrt(t * t + T(1));
        const T s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const T akp = a(k, p);
          const T akq = a(k, q);
          const T new_kp = c * akp - s * akq;
          const T new_kq = s * akp + c * akq;
          a(k, p) = new_kp;
          a(p, k) = new_kp;
          a(k, q) = new_kq;
          a(q, k) = new_kq;
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = T(0);
        a(q, p) = T(0);

        if (vectors) {
          auto& v = *vectors;
          for (std::size_t k = 0; k < n; ++k) {
            const T vkp = v(k, p);
            const T vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
    if (!rotated) {
      std::vector<T> values(n);
      for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
      return values;
    }
  }
  throw NonConvergence("Jacobi eigensolver did not converge within " +
                       std::to_string(kJacobiMaxSweeps) + " sweeps");
}

}  // namespace detail

/// Eigendecomposition of a symmetric matrix. The input is symmetrized first;
/// asymmetry above `tolerance::symmetry` (relative) is rejected.
template <typename T>
EigenPair<T> sym_eig(const Matrix<T>& m) {
  detail::require_symmetric(m, "sym_eig");
  Matrix<T> raw_vectors;
  std::vector<T> raw = detail::jacobi(symmetrized(m), &raw_vectors);

  const std::size_t n = raw.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return raw[i] > raw[j]; });

  EigenPair<T> out{Matrix<T>(n, n), std::vector<T>(n)};
  for (std::size_t col = 0; col < n; ++col) {
    out.values[col] = raw[order[col]];
    for (std::size_t row = 0; row < n; ++row) out.vectors(row, col) = raw_vectors(row, order[col]);
  }
  return out;
}

/// Eigenvalues only, descending. Same rotation sequence as `sym_eig`, so the
/// values agree bitwise.
template <typename T>
std::vector<T> sym_eigvals(const Matrix<T>& m) {
  detail::require_symmetric(m, "sym_eigvals");
  std::vector<T> values = detail::jacobi<T>(symmetrized(m), nullptr);
  std::sort(values.begin(), values.end(), [](const T& a, const T& b) { return a > b; });
  return values;
}

/// U diag(f(λ)) Uᵀ for a precomputed decomposition. Exactly symmetric.
template <typename T, typename F>
Matrix<T> matrix_fn(const EigenPair<T>& eig, F&& f) {
  using std::isfinite;
  const std::size_t n = eig.values.size();
  std::vector<T> fv(n);
  for (std::size_t k = 0; k < n; ++k) {
    fv[k] = f(eig.values[k]);
    if (!isfinite(fv[k])) {
      std::ostringstream os;
      os << "matrix function undefined at eigenvalue " << eig.values[k];
      throw DomainError(os.str());
    }
  }
  const Matrix<T>& u = eig.vectors;
  Matrix<T> r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      T sum(0);
      for (std::size_t k = 0; k < n; ++k) sum += u(i, k) * fv[k] * u(j, k);
      r(i, j) = sum;
      r(j, i) = sum;
    }
  return r;
}

/// f applied to a symmetric matrix through its eigenvalues.
template <typename T, typename F>
Matrix<T> matrix_fn(const Matrix<T>& m, F&& f) {
  return matrix_fn(sym_eig(m), std::forward<F>(f));
}

/// Symmetric positive definite matrix. Construction from a plain `Matrix`
/// validates symmetry and positivity; `trusted` only symmetrizes and is meant
/// for results that are SPD by construction (congruences, matrix functions
/// with positive range).
template <typename T = double>
class SpdMatrix {
 public:
  using value_type = T;

  SpdMatrix() = default;

  explicit SpdMatrix(const Matrix<T>& m) : m_(symmetrized_checked(m)) {
    const std::vector<T> values = sym_eigvals(m_);
    const T lmax = values.front();
    const T lmin = values.back();
    if (!(lmax > T(0)) || !(lmin > T(tolerance::positivity_floor) * lmax)) {
      std::ostringstream os;
      os << "matrix is not positive definite (eigenvalue " << lmin << ")";
      throw NotPositiveDefinite(os.str(), static_cast<double>(lmin));
    }
  }

  SpdMatrix(std::initializer_list<std::initializer_list<T>> rows) : SpdMatrix(Matrix<T>(rows)) {}

  static SpdMatrix trusted(const Matrix<T>& m) {
    SpdMatrix s;
    s.m_ = symmetrized(m);
    return s;
  }

  static SpdMatrix identity(std::size_t n) { return trusted(Matrix<T>::identity(n)); }

  const Matrix<T>& matrix() const noexcept { return m_; }
  operator const Matrix<T>&() const noexcept { return m_; }
  std::size_t dim() const noexcept { return m_.rows(); }
  const T& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  template <typename U>
  SpdMatrix<U> cast() const {
    return SpdMatrix<U>::trusted(m_.template cast<U>());
  }

  friend bool operator==(const SpdMatrix& a, const SpdMatrix& b) { return a.m_ == b.m_; }

 private:
  static Matrix<T> symmetrized_checked(const Matrix<T>& m) {
    detail::require_symmetric(m, "SpdMatrix");
    return symmetrized(m);
  }

  Matrix<T> m_;
};

template <typename T>
EigenPair<T> sym_eig(const SpdMatrix<T>& m) {
  return sym_eig(m.matrix());
}

/// B M Bᵀ, symmetrized.
template <typename T>
Matrix<T> congruence(const Matrix<T>& b, const Matrix<T>& m) {
  return symmetrized(b * m * b.transposed());
}

template <typename T>
SpdMatrix<T> congruence(const Matrix<T>& b, const SpdMatrix<T>& m) {
  return SpdMatrix<T>::trusted(congruence(b, m.matrix()));
}

template <typename T>
SpdMatrix<T> sqrt_m(const SpdMatrix<T>& m) {
  using std::sqrt;
  return SpdMatrix<T>::trusted(matrix_fn(sym_eig(m), [](const T& x) { return sqrt(x); }));
}

template <typename T>
SpdMatrix<T> inv_sqrt_m(const SpdMatrix<T>& m) {
  using std::sqrt;
  return SpdMatrix<T>::trusted(
      matrix_fn(sym_eig(m), [](const T& x) { return T(1) / sqrt(x); }));
}

template <typename T>
SpdMatrix<T> inv_m(const SpdMatrix<T>& m) {
  return SpdMatrix<T>::trusted(matrix_fn(sym_eig(m), [](const T& x) { return T(1) / x; }));
}

template <typename T>
Matrix<T> log_m(const SpdMatrix<T>& m) {
  using std::log;
  return matrix_fn(sym_eig(m), [](const T& x) {
    if (!(x > T(0))) return std::numeric_limits<T>::quiet_NaN();
    return T(log(x));
  });
}

/// Matrix exponential of any symmetric matrix.
template <typename T>
SpdMatrix<T> exp_m(const Matrix<T>& m) {
  using std::exp;
  return SpdMatrix<T>::trusted(matrix_fn(sym_eig(m), [](const T& x) {
    const T e = exp(x);
    return e > T(0) ? e : std::numeric_limits<T>::quiet_NaN();
  }));
}

template <typename T>
SpdMatrix<T> pow_m(const SpdMatrix<T>& m, const T& t) {
  using std::pow;
  return SpdMatrix<T>::trusted(matrix_fn(sym_eig(m), [&t](const T& x) { return T(pow(x, t)); }));
}

/// M^{1/2} and M^{-1/2} from one eigendecomposition.
template <typename T>
struct SqrtPair {
  SpdMatrix<T> sqrt;
  SpdMatrix<T> inv_sqrt;
};

template <typename T>
SqrtPair<T> sqrt_pair(const SpdMatrix<T>& m) {
  using std::sqrt;
  const EigenPair<T> eig = sym_eig(m);
  return {SpdMatrix<T>::trusted(matrix_fn(eig, [](const T& x) { return sqrt(x); })),
          SpdMatrix<T>::trusted(matrix_fn(eig, [](const T& x) { return T(1) / sqrt(x); }))};
}

/// ⟨A, B⟩ = Σ A_ij B_ij.
template <typename T>
T frob_inner(const Matrix<T>& a, const Matrix<T>& b) {
  a.require_same_shape(b, "frob_inner");
  T sum(0);
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t k = 0; k < da.size(); ++k) sum += da[k] * db[k];
  return sum;
}

/// Point at parameter t on the affine-invariant geodesic from x1 (t = 0) to x2 (t = 1).
template <typename T>
SpdMatrix<T> geodesic(const SpdMatrix<T>& x1, const SpdMatrix<T>& x2, const T& t) {
  if (x1.dim() != x2.dim()) throw DimensionMismatch("geodesic: dimension mismatch");
  const SqrtPair<T> half = sqrt_pair(x1);
  const SpdMatrix<T> inner = congruence(half.inv_sqrt.matrix(), x2);
  return congruence(half.sqrt.matrix(), pow_m(inner, t));
}

/// ‖log(x1^{-1/2} x2 x1^{-1/2})‖_F.
template <typename T>
T riem_dist(const SpdMatrix<T>& x1, const SpdMatrix<T>& x2) {
  using std::log;
  using std::sqrt;
  if (x1.dim() != x2.dim()) throw DimensionMismatch("riem_dist: dimension mismatch");
  const SpdMatrix<T> w = inv_sqrt_m(x1);
  T sum(0);
  for (const T& lambda : sym_eigvals(congruence(w.matrix(), x2.matrix()))) {
    const T l = log(lambda);
    sum += l * l;
  }
  return sqrt(sum);
}

}  // namespace karcher
