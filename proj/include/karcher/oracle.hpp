#pragma once

// Closed-form and brute-force references. None of these call the solvers;
// solver tests compare against them.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "karcher/error.hpp"
#include "karcher/matrix.hpp"
#include "karcher/objective.hpp"
#include "karcher/spd.hpp"

namespace karcher::oracle {

/// Karcher mean of positive scalars: exp of the mean log.
inline double scalar_karcher(std::span<const double> values) {
  if (values.empty()) throw DomainError("scalar_karcher: no values");
  double sum = 0.0;
  for (double v : values) {
    if (!(v > 0.0)) throw DomainError("scalar_karcher: values must be positive");
    sum += std::log(v);
  }
  return std::exp(sum / double(values.size()));
}

inline double scalar_karcher(std::initializer_list<double> values) {
  return scalar_karcher(std::span<const double>(values.begin(), values.size()));
}

/// exp((1/n) Σ log A_i), exact when every pair A_i, A_j commutes.
template <typename T>
SpdMatrix<T> commuting(const Ensemble<T>& e) {
  using std::abs;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      const Matrix<T>& a = e[i].matrix();
      const Matrix<T>& b = e[j].matrix();
      const T gap = frobenius_norm(Matrix<T>(a * b - b * a));
      if (gap > T(1e-10) * frobenius_norm(a) * frobenius_norm(b)) {
        throw NotCommuting("matrices " + std::to_string(i) + " and " + std::to_string(j) +
                           " do not commute");
      }
    }
  Matrix<T> sum(e.dim(), e.dim());
  for (std::size_t i = 0; i < e.size(); ++i) sum += log_m(e[i]);
  return exp_m(Matrix<T>(sum / T(e.size())));
}

/// The two-matrix Karcher mean is the geodesic midpoint.
template <typename T>
SpdMatrix<T> two_matrix(const SpdMatrix<T>& a, const SpdMatrix<T>& b) {
  return geodesic(a, b, T(0.5));
}

enum class GridSpacing { linear, logarithmic };

struct GridMinimum {
  double argmin;
  double min;
};

/// Exhaustive minimization of f over `points` grid nodes spanning [lo, hi].
template <typename F>
GridMinimum grid_minimize_1d(F&& f, double lo, double hi, int points,
                             GridSpacing spacing = GridSpacing::linear) {
  if (!(lo < hi)) throw DomainError("grid_minimize_1d: requires lo < hi");
  if (points < 3) throw DomainError("grid_minimize_1d: requires at least 3 points");
  if (spacing == GridSpacing::logarithmic && !(lo > 0.0))
    throw DomainError("grid_minimize_1d: logarithmic grid requires lo > 0");

  const double a = spacing == GridSpacing::linear ? lo : std::log(lo);
  const double b = spacing == GridSpacing::linear ? hi : std::log(hi);
  GridMinimum best{lo, std::numeric_limits<double>::infinity()};
  for (int k = 0; k < points; ++k) {
    const double s = a + (b - a) * double(k) / double(points - 1);
    const double x = spacing == GridSpacing::linear ? s : std::exp(s);
    const double v = f(x);
    if (!std::isfinite(v)) throw DomainError("grid_minimize_1d: f is not finite on the grid");
    if (v < best.min) best = {x, v};
  }
  return best;
}

/// Central difference (f(X + hH) − f(X − hH)) / 2h. Both perturbed points must be SPD.
template <typename F, typename T>
T finite_diff_directional(F&& f, const SpdMatrix<T>& x, const Matrix<T>& h_dir, const T& h) {
  x.matrix().require_same_shape(h_dir, "finite_diff_directional");
  auto perturbed = [&](const T& s) {
    try {
      return SpdMatrix<T>(Matrix<T>(x.matrix() + s * h_dir));
    } catch (const NotPositiveDefinite&) {
      throw DomainError("finite_diff_directional: perturbed point leaves the SPD cone");
    }
  };
  const SpdMatrix<T> plus = perturbed(h);
  const SpdMatrix<T> minus = perturbed(-h);
  return (f(plus) - f(minus)) / (T(2) * h);
}

}  // namespace karcher::oracle
