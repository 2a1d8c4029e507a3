#pragma once

// Karcher-mean solvers: the majorization-minimization fixed-point iteration,
// gradient descent with backtracking line search, and fixed-step gradient
// descent. All three record one TraceRecord per iteration, starting with the
// initial point at iter 0.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "karcher/error.hpp"
#include "karcher/matrix.hpp"
#include "karcher/objective.hpp"
#include "karcher/spd.hpp"

namespace karcher {

enum class SolverKind { mm, gd_linesearch, gd_fixed };

enum class SolverStatus { converged, max_iters_exceeded, line_search_stalled, diverged };

inline std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::mm: return "mm";
    case SolverKind::gd_linesearch: return "gd-ls";
    case SolverKind::gd_fixed: return "gd-fixed";
  }
  return "?";
}

inline std::optional<SolverKind> parse_solver_kind(std::string_view name) {
  if (name == "mm") return SolverKind::mm;
  if (name == "gd-ls") return SolverKind::gd_linesearch;
  if (name == "gd-fixed") return SolverKind::gd_fixed;
  return std::nullopt;
}

inline std::string_view to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::max_iters_exceeded: return "max_iters_exceeded";
    case SolverStatus::line_search_stalled: return "line_search_stalled";
    case SolverStatus::diverged: return "diverged";
  }
  return "?";
}

struct SolverConfig {
  int max_iters = 500;
  /// Stop when ‖Σ log(X^{-1/2} A_i X^{-1/2})‖_F < grad_tol. Unset means 1e-10·n.
  std::optional<double> grad_tol;
  /// Start step size (gradient descent only).
  double nu = 1.0;
  /// Backtracking factor in (0, 1) (line search only).
  double c = 0.5;
  /// Largest backtracking exponent tried per outer iteration.
  int ls_max_j = 60;
  /// Keep every accepted iterate in SolverResult::iterates.
  bool keep_iterates = false;

  double tolerance_for(std::size_t n) const { return grad_tol.value_or(1e-10 * double(n)); }

  void validate() const {
    if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
    if (grad_tol && !(*grad_tol > 0.0)) throw InvalidArgument("grad_tol must be > 0");
    if (!(nu > 0.0) || !std::isfinite(nu)) throw InvalidArgument("nu must be > 0");
    if (!(c > 0.0 && c < 1.0)) throw InvalidArgument("c must be in (0, 1)");
    if (ls_max_j < 1) throw InvalidArgument("ls_max_j must be >= 1");
  }
};

struct TraceRecord {
  int iter = 0;
  double objective = 0.0;
  /// Frobenius norm of the unnormalized gradient sum.
  double grad_norm = 0.0;
  /// Natural log of grad_norm.
  double log_error = 0.0;
  /// Seconds since the solver started.
  double elapsed = 0.0;
};

template <typename T = double>
struct SolverResult {
  SpdMatrix<T> mean;
  std::vector<TraceRecord> trace;
  bool converged = false;
  int iters_used = 0;
  SolverStatus status = SolverStatus::max_iters_exceeded;
  /// Accepted iterates X_0, X_1, ... when SolverConfig::keep_iterates is set.
  std::vector<SpdMatrix<T>> iterates;
};

/// Objective growth factor past which fixed-step descent is declared diverged.
inline constexpr double kDivergenceFactor = 1e6;

/// Backtracking tries c^0·ν = ν first.
inline constexpr int kFirstBacktrackExponent = 0;

/// Scalar type the solvers are meant to run in for double-valued data. The
/// extra 11 bits of mantissa keep the gradient and objective above rounding
/// noise for ensembles with condition numbers up to about 1e10.
using WorkingScalar = long double;

/// Precision used to settle objective comparisons that working precision cannot.
using QuadScalar = boost::multiprecision::cpp_bin_float_quad;

template <typename T>
SpdMatrix<T> arithmetic_mean_init(const Ensemble<T>& e) {
  Matrix<T> sum(e.dim(), e.dim());
  for (std::size_t i = 0; i < e.size(); ++i) sum += e[i].matrix();
  return SpdMatrix<T>::trusted(sum / T(e.size()));
}

/// One MM update X ↦ argmin_X G(X, x).
template <typename T>
SpdMatrix<T> mm_update(const Ensemble<T>& e, const SpdMatrix<T>& x) {
  const MajorizerTerms<T> terms = majorizer_terms(e, x);
  return surrogate_minimizer(terms.f1, terms.f2);
}

namespace detail {

template <typename T>
class TraceWriter {
 public:
  TraceWriter(SolverResult<T>& result, bool keep_iterates)
      : result_(result), keep_(keep_iterates), start_(std::chrono::steady_clock::now()) {}

  void record(int iter, const T& objective, const T& grad_norm) {
    using std::log;
    TraceRecord r;
    r.iter = iter;
    r.objective = static_cast<double>(objective);
    r.grad_norm = static_cast<double>(grad_norm);
    r.log_error = std::log(r.grad_norm);
    r.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    result_.trace.push_back(r);
  }

  void accept(const SpdMatrix<T>& x, const T& objective) {
    if (keep_) result_.iterates.push_back(x);
    if (!best_ || objective < best_objective_) {
      best_ = x;
      best_objective_ = objective;
    }
  }

  void finish(SolverStatus status, const SpdMatrix<T>& last, int iters) {
    result_.status = status;
    result_.converged = status == SolverStatus::converged;
    result_.iters_used = iters;
    result_.mean = result_.converged || !best_ ? last : *best_;
  }

 private:
  SolverResult<T>& result_;
  bool keep_;
  std::chrono::steady_clock::time_point start_;
  std::optional<SpdMatrix<T>> best_;
  T best_objective_{};
};

// Decides F(trial) < F(current) for the line search. Working-precision values
// settle the comparison unless they lie within rounding noise of each other;
// then both sides are re-evaluated in quad precision. The noise band is
// eps·(1+|F|)·min(1e7, 1e3·κ) with κ the largest condition number in the
// ensemble; measured noise is about 20 eps for κ ≤ 500 and 6e5 eps for κ ≈ 1e8.
template <typename T>
class DecreaseTest {
 public:
  static constexpr bool kCanWiden =
      std::numeric_limits<T>::digits < std::numeric_limits<QuadScalar>::digits;

  explicit DecreaseTest(const Ensemble<T>& e) : e_(e) {
    T kappa(1);
    for (std::size_t i = 0; i < e.size(); ++i) {
      const std::vector<T> v = sym_eigvals(e[i].matrix());
      if (v.front() / v.back() > kappa) kappa = v.front() / v.back();
    }
    noise_ = std::numeric_limits<T>::epsilon() * (kappa > T(1e4) ? T(1e7) : T(1e3) * kappa);
  }

  void set_current(const SpdMatrix<T>& x, const T& f) {
    x_ = &x;
    f_ = f;
    f_wide_.reset();
  }

  bool operator()(const SpdMatrix<T>& trial, const T& f_trial) {
    using std::abs;
    const T band = noise_ * (T(1) + abs(f_));
    if constexpr (kCanWiden) {
      if (abs(f_trial - f_) <= band) {
        if (!wide_e_) wide_e_.emplace(e_.template cast<QuadScalar>());
        if (!f_wide_) f_wide_ = objective(*wide_e_, x_->template cast<QuadScalar>());
        return objective(*wide_e_, trial.template cast<QuadScalar>()) < *f_wide_;
      }
    }
    return f_trial < f_;
  }

 private:
  const Ensemble<T>& e_;
  const SpdMatrix<T>* x_ = nullptr;
  T f_{};
  T noise_{};
  std::optional<Ensemble<QuadScalar>> wide_e_;
  std::optional<QuadScalar> f_wide_;
};

template <typename T>
void require_start(const Ensemble<T>& e, const SpdMatrix<T>& x0, const SolverConfig& cfg) {
  cfg.validate();
  require_dim(e, x0.matrix(), "solver start point");
}

}  // namespace detail

/// Majorization-minimization: X_{k+1} = surrogate_minimizer(f1(X_k), f2(X_k)).
template <typename T>
SolverResult<T> mm_solve(const Ensemble<T>& e, const SolverConfig& cfg, const SpdMatrix<T>& x0) {
  detail::require_start(e, x0, cfg);
  const T tol = T(cfg.tolerance_for(e.size()));
  SolverResult<T> result;
  detail::TraceWriter<T> out(result, cfg.keep_iterates);

  SpdMatrix<T> x = x0;
  MajorizerTerms<T> terms = majorizer_terms(e, x);
  T grad = riemannian_gradient(e, x).norm();
  out.record(0, terms.objective, grad);
  out.accept(x, terms.objective);

  for (int k = 0;; ++k) {
    if (grad < tol) {
      out.finish(SolverStatus::converged, x, k);
      break;
    }
    if (k == cfg.max_iters) {
      out.finish(SolverStatus::max_iters_exceeded, x, k);
      break;
    }
    x = surrogate_minimizer(terms.f1, terms.f2);
    terms = majorizer_terms(e, x);
    grad = riemannian_gradient(e, x).norm();
    out.record(k + 1, terms.objective, grad);
    out.accept(x, terms.objective);
  }
  return result;
}

template <typename T>
SolverResult<T> mm_solve(const Ensemble<T>& e, const SolverConfig& cfg = {}) {
  return mm_solve(e, cfg, arithmetic_mean_init(e));
}

/// Gradient descent along X^{1/2} exp(c^j ν D) X^{1/2}, taking the smallest
/// j ≥ 0 that strictly decreases F. Every probe counts as one iteration.
template <typename T>
SolverResult<T> gd_linesearch_solve(const Ensemble<T>& e, const SolverConfig& cfg,
                                    const SpdMatrix<T>& x0) {
  using std::isfinite;
  using std::pow;
  detail::require_start(e, x0, cfg);
  const T tol = T(cfg.tolerance_for(e.size()));
  const T n = T(e.size());
  SolverResult<T> result;
  detail::TraceWriter<T> out(result, cfg.keep_iterates);

  SpdMatrix<T> x = x0;
  T f = objective(e, x);
  RiemannianGradient<T> grad = riemannian_gradient(e, x);
  T grad_norm = grad.norm();
  out.record(0, f, grad_norm);
  out.accept(x, f);

  detail::DecreaseTest<T> decreases(e);
  int iters = 0;
  for (;;) {
    if (grad_norm < tol) {
      out.finish(SolverStatus::converged, x, iters);
      return result;
    }
    decreases.set_current(x, f);
    const Matrix<T> direction = grad.sum / n;
    bool accepted = false;
    for (int j = kFirstBacktrackExponent; j <= cfg.ls_max_j; ++j) {
      if (iters == cfg.max_iters) {
        out.finish(SolverStatus::max_iters_exceeded, x, iters);
        return result;
      }
      const T step = T(cfg.nu) * T(pow(cfg.c, j));
      ++iters;
      // A step that overflows exp or the objective is a rejected probe.
      SpdMatrix<T> trial;
      T f_trial{};
      bool finite = true;
      try {
        trial = congruence(grad.x_half.sqrt.matrix(), exp_m(Matrix<T>(step * direction)));
        f_trial = objective(e, trial);
        finite = isfinite(f_trial);
      } catch (const DomainError&) {
        finite = false;
      }
      if (finite && decreases(trial, f_trial)) {
        x = std::move(trial);
        f = f_trial;
        grad = riemannian_gradient(e, x);
        grad_norm = grad.norm();
        out.record(iters, f, grad_norm);
        out.accept(x, f);
        accepted = true;
        break;
      }
      out.record(iters, f, grad_norm);
    }
    if (!accepted) {
      out.finish(SolverStatus::line_search_stalled, x, iters);
      return result;
    }
  }
}

template <typename T>
SolverResult<T> gd_linesearch_solve(const Ensemble<T>& e, const SolverConfig& cfg = {}) {
  return gd_linesearch_solve(e, cfg, arithmetic_mean_init(e));
}

/// Gradient descent with the constant step X_{k+1} = X_k^{1/2} exp(ν D) X_k^{1/2}.
/// No descent guarantee; stops as diverged once F exceeds 1e6·F(X_0).
template <typename T>
SolverResult<T> gd_fixed_step_solve(const Ensemble<T>& e, const SolverConfig& cfg,
                                    const SpdMatrix<T>& x0) {
  using std::isfinite;
  detail::require_start(e, x0, cfg);
  const T tol = T(cfg.tolerance_for(e.size()));
  const T n = T(e.size());
  SolverResult<T> result;
  detail::TraceWriter<T> out(result, cfg.keep_iterates);

  SpdMatrix<T> x = x0;
  const T f0 = objective(e, x);
  RiemannianGradient<T> grad = riemannian_gradient(e, x);
  T grad_norm = grad.norm();
  out.record(0, f0, grad_norm);
  out.accept(x, f0);

  for (int k = 0;; ++k) {
    if (grad_norm < tol) {
      out.finish(SolverStatus::converged, x, k);
      break;
    }
    if (k == cfg.max_iters) {
      out.finish(SolverStatus::max_iters_exceeded, x, k);
      break;
    }
    SpdMatrix<T> next;
    T f;
    try {
      next = congruence(grad.x_half.sqrt.matrix(), exp_m(Matrix<T>(T(cfg.nu) / n * grad.sum)));
      f = objective(e, next);
    } catch (const DomainError&) {
      out.finish(SolverStatus::diverged, x, k + 1);
      break;
    }
    if (!isfinite(f) || f > T(kDivergenceFactor) * f0) {
      out.finish(SolverStatus::diverged, x, k + 1);
      break;
    }
    x = std::move(next);
    grad = riemannian_gradient(e, x);
    grad_norm = grad.norm();
    out.record(k + 1, f, grad_norm);
    out.accept(x, f);
  }
  return result;
}

template <typename T>
SolverResult<T> gd_fixed_step_solve(const Ensemble<T>& e, const SolverConfig& cfg = {}) {
  return gd_fixed_step_solve(e, cfg, arithmetic_mean_init(e));
}

template <typename T>
SolverResult<T> solve(SolverKind kind, const Ensemble<T>& e, const SolverConfig& cfg,
                      const SpdMatrix<T>& x0) {
  switch (kind) {
    case SolverKind::mm: return mm_solve(e, cfg, x0);
    case SolverKind::gd_linesearch: return gd_linesearch_solve(e, cfg, x0);
    case SolverKind::gd_fixed: return gd_fixed_step_solve(e, cfg, x0);
  }
  throw InvalidArgument("unknown solver kind");
}

template <typename T>
SolverResult<T> solve(SolverKind kind, const Ensemble<T>& e, const SolverConfig& cfg = {}) {
  return solve(kind, e, cfg, arithmetic_mean_init(e));
}

template <typename U, typename T>
SolverResult<U> result_cast(const SolverResult<T>& r) {
  SolverResult<U> out;
  out.mean = r.mean.template cast<U>();
  out.trace = r.trace;
  out.converged = r.converged;
  out.iters_used = r.iters_used;
  out.status = r.status;
  out.iterates.reserve(r.iterates.size());
  for (const auto& x : r.iterates) out.iterates.push_back(x.template cast<U>());
  return out;
}

/// Runs `kind` on double data in WorkingScalar precision; the mean and
/// iterates are rounded back to double.
inline SolverResult<double> solve_working(SolverKind kind, const Ensemble<double>& e,
                                          const SolverConfig& cfg, const SpdMatrix<double>& x0) {
  return result_cast<double>(
      solve(kind, e.cast<WorkingScalar>(), cfg, x0.cast<WorkingScalar>()));
}

inline SolverResult<double> solve_working(SolverKind kind, const Ensemble<double>& e,
                                          const SolverConfig& cfg = {}) {
  return solve_working(kind, e, cfg, arithmetic_mean_init(e));
}

}  // namespace karcher
