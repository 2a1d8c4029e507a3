#pragma once

// Self-check suite behind `karcher check`: oracle agreement and the
// mathematical invariants, each on a handful of seeded random instances.
// The individual checks take an instance count so larger runs can reuse them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "karcher/bench.hpp"
#include "karcher/error.hpp"
#include "karcher/io.hpp"
#include "karcher/matrix.hpp"
#include "karcher/objective.hpp"
#include "karcher/oracle.hpp"
#include "karcher/solvers.hpp"
#include "karcher/spd.hpp"

namespace karcher::check {

struct Row {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Options {
  /// Evaluate g2 as (√((log x)²+1) − log x)·x everywhere, as a negative control.
  bool naive_g2 = false;
  std::uint64_t seed = 20240607;
};

namespace detail {

/// Counts failures and tracks the worst observed error.
class Tally {
 public:
  explicit Tally(double tolerance) : tol_(tolerance) {}

  void add(double error) {
    ++total_;
    if (!(error <= tol_)) ++failed_;
    if (!(error <= worst_)) worst_ = error;
  }

  void fail() {
    ++total_;
    ++failed_;
  }

  Row row(std::string name) const {
    std::ostringstream os;
    os << total_ - failed_ << "/" << total_ << " within " << tol_ << " (worst " << worst_ << ")";
    return {std::move(name), failed_ == 0 && total_ > 0, os.str()};
  }

  double worst() const { return worst_; }

 private:
  double tol_;
  double worst_ = 0.0;
  int total_ = 0;
  int failed_ = 0;
};

inline std::size_t pick(bench::Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + std::size_t(rng.uniform01() * double(hi - lo + 1));
}

inline SpdMatrix<double> mm_mean(const Ensemble<double>& e) {
  SolverResult<double> r = solve_working(SolverKind::mm, e);
  if (!r.converged) throw NonConvergence("MM did not converge");
  return r.mean;
}

inline double naive_g2(double x) {
  const double z = std::log(x);
  return (std::sqrt(z * z + 1.0) - z) * x;
}

template <typename F>
Row guarded(std::string name, F&& body) {
  try {
    return body();
  } catch (const std::exception& err) {
    return {std::move(name), false, std::string("exception: ") + err.what()};
  }
}

}  // namespace detail

/// MM on 1×1 ensembles against exp(mean log).
inline Row scalar_oracle(int count, std::uint64_t seed) {
  return detail::guarded("oracle: scalar", [&] {
    bench::Rng rng = bench::Rng::child(seed, 1);
    detail::Tally t(1e-8);
    for (int k = 0; k < count; ++k) {
      const std::size_t n = detail::pick(rng, 1, 6);
      std::vector<double> values(n);
      std::vector<SpdMatrix<double>> mats;
      for (auto& v : values) {
        v = std::exp(rng.uniform(-3.0, 3.0));
        mats.push_back(SpdMatrix<double>{{v}});
      }
      const SpdMatrix<double> expected{{oracle::scalar_karcher(values)}};
      t.add(riem_dist(detail::mm_mean(Ensemble<double>(std::move(mats))), expected));
    }
    return t.row("oracle: scalar");
  });
}

/// MM on ensembles with a shared eigenbasis against exp(mean log).
inline Row commuting_oracle(int count, std::uint64_t seed) {
  return detail::guarded("oracle: commuting", [&] {
    bench::Rng rng = bench::Rng::child(seed, 2);
    detail::Tally t(1e-8);
    for (int k = 0; k < count; ++k) {
      const Ensemble<double> e =
          bench::random_commuting_ensemble(detail::pick(rng, 1, 6), detail::pick(rng, 1, 6), rng);
      t.add(riem_dist(detail::mm_mean(e), oracle::commuting(e)));
    }
    return t.row("oracle: commuting");
  });
}

/// MM on pairs against the geodesic midpoint.
inline Row two_matrix_oracle(int count, std::uint64_t seed) {
  return detail::guarded("oracle: two-matrix", [&] {
    bench::Rng rng = bench::Rng::child(seed, 3);
    detail::Tally t(1e-8);
    for (int k = 0; k < count; ++k) {
      const Ensemble<double> e = bench::random_ensemble(2, detail::pick(rng, 1, 6), rng);
      t.add(riem_dist(detail::mm_mean(e), oracle::two_matrix(e[0], e[1])));
    }
    return t.row("oracle: two-matrix");
  });
}

/// G(X, X') ≥ F(X) up to 1e-9·(1+|F(X)|), and G(X', X') = F(X') to 1e-10 relative.
inline Row majorization(int count, std::uint64_t seed) {
  return detail::guarded("majorization G >= F", [&] {
    bench::Rng rng = bench::Rng::child(seed, 4);
    int violations = 0;
    double worst_slack = 0.0;
    double worst_touch = 0.0;
    for (int k = 0; k < count; ++k) {
      const std::size_t p = detail::pick(rng, 1, 5);
      const Ensemble<double> e = bench::random_ensemble(detail::pick(rng, 1, 4), p, rng);
      const SpdMatrix<double> x = bench::random_spd(p, rng, 0.5, 20.0);
      const SpdMatrix<double> xp = bench::random_spd(p, rng, 0.5, 20.0);
      const SurrogateCoeffs<double> s = surrogate_coeffs(e, xp);
      const double f = objective(e, x);
      const double slack = (surrogate_value(s, x) - f) / (1.0 + std::abs(f));
      const double fp = objective(e, xp);
      const double touch = std::abs(surrogate_value(s, xp) - fp) / std::max(1.0, std::abs(fp));
      worst_slack = std::min(worst_slack, slack);
      worst_touch = std::max(worst_touch, touch);
      if (!(slack >= -1e-9) || !(touch <= 1e-10)) ++violations;
    }
    std::ostringstream os;
    os << count - violations << "/" << count << " (min slack " << worst_slack
       << ", max |G(X',X')-F(X')| rel " << worst_touch << ")";
    return Row{"majorization G >= F", violations == 0 && count > 0, os.str()};
  });
}

/// C1 = X*⁻¹ C2 X*⁻¹ at the closed-form minimizer of ⟨C1, X⟩ + ⟨C2, X⁻¹⟩.
inline Row surrogate_stationarity(int count, std::uint64_t seed) {
  return detail::guarded("surrogate minimizer stationarity", [&] {
    bench::Rng rng = bench::Rng::child(seed, 5);
    detail::Tally t(1e-9);
    for (int k = 0; k < count; ++k) {
      const std::size_t p = detail::pick(rng, 1, 6);
      const SpdMatrix<double> c1 = bench::random_spd(p, rng, 0.1, 10.0);
      const SpdMatrix<double> c2 = bench::random_spd(p, rng, 0.1, 10.0);
      const SpdMatrix<double> xi = inv_m(surrogate_minimizer(c1, c2));
      const Matrix<double> residual = c1.matrix() - congruence(xi.matrix(), c2.matrix());
      t.add(frobenius_norm(residual) / frobenius_norm(c1.matrix()));
    }
    return t.row("surrogate minimizer stationarity");
  });
}

/// Central differences at h = 1e-6 against an analytic gradient, relative error.
template <typename F, typename G>
Row derivative_check(std::string name, int count, std::uint64_t stream, std::uint64_t seed, F&& f,
                     G&& grad) {
  return detail::guarded(name, [&] {
    bench::Rng rng = bench::Rng::child(seed, stream);
    detail::Tally t(1e-5);
    for (int k = 0; k < count; ++k) {
      const std::size_t p = detail::pick(rng, 1, 4);
      const SpdMatrix<double> x = bench::random_spd(p, rng, 1.0, 10.0);
      const Matrix<double> a = bench::random_symmetric(p, rng);
      const Matrix<double> h = bench::random_symmetric(p, rng);
      const double fd = oracle::finite_diff_directional(
          [&](const SpdMatrix<double>& y) { return f(y, a); }, x, h, 1e-6);
      const double analytic = frob_inner(grad(x, a), h);
      t.add(std::abs(fd - analytic) / std::abs(analytic));
    }
    return t.row(name);
  });
}

inline double inverse_pairing_value(const SpdMatrix<double>& x, const Matrix<double>& a) {
  return frob_inner(inv_m(x).matrix(), a);
}

inline double log_norm_squared_value(const SpdMatrix<double>& x, const Matrix<double>&) {
  const Matrix<double> l = log_m(x);
  return frob_inner(l, l);
}

inline double product_norm_squared_value(const SpdMatrix<double>& x, const Matrix<double>& a) {
  const Matrix<double> xa = x.matrix() * a;
  return frob_inner(xa, xa);
}

inline double trace_product_squared_value(const SpdMatrix<double>& x, const Matrix<double>& a) {
  const Matrix<double> xa = x.matrix() * a;
  return trace(Matrix<double>(xa * xa));
}

inline std::vector<Row> derivative_checks(int count, std::uint64_t seed) {
  return {
      derivative_check("derivative <X^-1,A>", count, 6, seed, inverse_pairing_value,
                       [](const SpdMatrix<double>& x, const Matrix<double>& a) {
                         return derivatives::inverse_pairing(x, a);
                       }),
      derivative_check("derivative ||log X||^2", count, 7, seed, log_norm_squared_value,
                       [](const SpdMatrix<double>& x, const Matrix<double>&) {
                         return derivatives::log_norm_squared(x);
                       }),
      derivative_check("derivative ||XA||^2", count, 8, seed, product_norm_squared_value,
                       [](const SpdMatrix<double>& x, const Matrix<double>& a) {
                         return derivatives::product_norm_squared(x.matrix(), a);
                       }),
      derivative_check("derivative tr(XAXA)", count, 9, seed, trace_product_squared_value,
                       [](const SpdMatrix<double>& x, const Matrix<double>& a) {
                         return derivatives::trace_product_squared(x.matrix(), a);
                       }),
  };
}

/// Permutation invariance (1e-9), congruence equivariance and inversion (1e-7).
inline std::vector<Row> mean_properties(int count, std::uint64_t seed) {
  bench::Rng rng = bench::Rng::child(seed, 10);
  detail::Tally perm(1e-9), cong(1e-7), inv(1e-7);
  std::vector<Row> rows;
  try {
    for (int k = 0; k < count; ++k) {
      const std::size_t n = detail::pick(rng, 2, 5);
      const std::size_t p = detail::pick(rng, 1, 6);
      const Ensemble<double> e = bench::random_ensemble(n, p, rng);
      const SpdMatrix<double> mean = detail::mm_mean(e);

      std::vector<SpdMatrix<double>> shuffled = e.matrices();
      for (std::size_t i = n - 1; i > 0; --i) std::swap(shuffled[i], shuffled[detail::pick(rng, 0, i)]);
      perm.add(riem_dist(detail::mm_mean(Ensemble<double>(shuffled)), mean));

      Matrix<double> m = bench::random_orthogonal(p, rng);
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) m(i, j) *= rng.uniform(0.5, 2.0);
      std::vector<SpdMatrix<double>> moved, inverted;
      for (std::size_t i = 0; i < n; ++i) {
        moved.push_back(SpdMatrix<double>(congruence(m, e[i].matrix())));
        inverted.push_back(inv_m(e[i]));
      }
      cong.add(riem_dist(detail::mm_mean(Ensemble<double>(moved)),
                         SpdMatrix<double>(congruence(m, mean.matrix()))));
      inv.add(riem_dist(detail::mm_mean(Ensemble<double>(inverted)), inv_m(mean)));
    }
  } catch (const std::exception& err) {
    const std::string what = std::string("exception: ") + err.what();
    return {{"mean: permutation invariance", false, what},
            {"mean: congruence equivariance", false, what},
            {"mean: inversion", false, what}};
  }
  rows.push_back(perm.row("mean: permutation invariance"));
  rows.push_back(cong.row("mean: congruence equivariance"));
  rows.push_back(inv.row("mean: inversion"));
  return rows;
}

/// g1(x)·g2(x) = 1 to 1e-14 relative and both positive, for x = 10^s, s ∈ [-12, 12].
inline Row g1_g2_identity(bool naive = false) {
  return detail::guarded("g1*g2 = 1 on [1e-12, 1e12]", [&] {
    detail::Tally t(1e-14);
    for (int k = 0; k <= 2400; ++k) {
      const double x = std::pow(10.0, -12.0 + 0.01 * double(k));
      const double a = g1_scalar(x);
      const double b = naive ? detail::naive_g2(x) : g2_scalar(x);
      if (!(a > 0.0) || !(b > 0.0)) {
        t.fail();
        continue;
      }
      t.add(std::abs(a * b - 1.0));
    }
    return t.row("g1*g2 = 1 on [1e-12, 1e12]");
  });
}

/// x ↦ g1(x')x + g2(x')/x − ln²x has its log-grid minimum at the node nearest x'.
inline Row scalar_surrogate_minimum(std::uint64_t seed) {
  return detail::guarded("scalar surrogate minimized at x'", [&] {
    bench::Rng rng = bench::Rng::child(seed, 11);
    const int points = 100000;
    const double cell = std::log(1e12) / double(points - 1);
    int ok = 0;
    const int count = 10;
    double worst = 0.0;
    for (int k = 0; k < count; ++k) {
      const double xp = std::exp(rng.uniform(-5.0, 5.0));
      const double a = g1_scalar(xp), b = g2_scalar(xp);
      const auto best = oracle::grid_minimize_1d(
          [&](double x) {
            const double l = std::log(x);
            return a * x + b / x - l * l;
          },
          xp * 1e-6, xp * 1e6, points, oracle::GridSpacing::logarithmic);
      const double off = std::abs(std::log(best.argmin / xp)) / cell;
      worst = std::max(worst, off);
      if (off <= 1.0) ++ok;
    }
    std::ostringstream os;
    os << ok << "/" << count << " argmin within one grid cell (worst " << worst << " cells)";
    return Row{"scalar surrogate minimized at x'", ok == count, os.str()};
  });
}

/// Per-run objective traces of MM never increase beyond 1e-12·(1+F).
inline Row mm_descent(int runs, std::uint64_t seed) {
  return detail::guarded("MM descent", [&] {
    bench::ExperimentSpec spec;
    spec.n = spec.p = 10;
    spec.spectrum = bench::SpectrumSpec::uniform(10, 1.0, 10.0);
    spec.runs = runs;
    spec.seed = seed;
    spec.solvers = {bench::make_solver(SolverKind::mm)};
    const bench::ExperimentReport report = bench::run_experiment(spec);
    int bad_runs = 0;
    double worst = -1.0;
    for (const auto& run : report.series.front().runs) {
      bool ok = !run.failed && run.status == SolverStatus::converged;
      for (std::size_t k = 1; k < run.trace.size(); ++k) {
        const double prev = run.trace[k - 1].objective;
        const double rise = (run.trace[k].objective - prev) / (1.0 + prev);
        worst = std::max(worst, rise);
        if (!(rise <= 1e-12)) ok = false;
      }
      if (!ok) ++bad_runs;
    }
    std::ostringstream os;
    os << runs - bad_runs << "/" << runs << " runs monotone and converged (max relative rise "
       << worst << ")";
    return Row{"MM descent", bad_runs == 0, os.str()};
  });
}

/// Write then read of an ensemble file reproduces every entry bitwise.
inline Row ensemble_round_trip(std::uint64_t seed) {
  return detail::guarded("ensemble file round trip", [&] {
    bench::Rng rng = bench::Rng::child(seed, 12);
    const Ensemble<double> e = bench::random_ensemble(4, 5, rng, 1e-3, 1e3);
    std::vector<Matrix<double>> mats;
    for (const auto& m : e.matrices()) mats.push_back(m.matrix());
    const std::vector<Matrix<double>> back = io::parse_matrices_json(io::matrices_to_json(mats));
    bool same = back.size() == mats.size();
    for (std::size_t i = 0; same && i < mats.size(); ++i) same = back[i] == mats[i];
    return Row{"ensemble file round trip", same, same ? "bitwise identical" : "mismatch"};
  });
}

/// The same spec gives identical reports, serially and with two threads.
inline Row determinism(std::uint64_t seed) {
  return detail::guarded("experiment determinism", [&] {
    bench::ExperimentSpec spec;
    spec.n = 4;
    spec.p = 4;
    spec.spectrum = bench::SpectrumSpec::uniform(4, 1.0, 10.0);
    spec.runs = 3;
    spec.seed = seed;
    spec.solvers = {bench::make_solver(SolverKind::mm),
                    bench::make_solver(SolverKind::gd_linesearch, 1.0)};
    const auto a = bench::run_experiment(spec, 1);
    const auto b = bench::run_experiment(spec, 2);
    bool same = a.series.size() == b.series.size();
    for (std::size_t s = 0; same && s < a.series.size(); ++s)
      same = a.series[s].mean_log_error == b.series[s].mean_log_error;
    return Row{"experiment determinism", same, same ? "identical reports" : "reports differ"};
  });
}

inline std::vector<Row> run_all(const Options& opt = {}) {
  std::vector<Row> rows;
  rows.push_back(scalar_oracle(40, opt.seed));
  rows.push_back(commuting_oracle(15, opt.seed));
  rows.push_back(two_matrix_oracle(15, opt.seed));
  rows.push_back(majorization(100, opt.seed));
  rows.push_back(surrogate_stationarity(50, opt.seed));
  for (auto& r : derivative_checks(10, opt.seed)) rows.push_back(std::move(r));
  for (auto& r : mean_properties(5, opt.seed)) rows.push_back(std::move(r));
  rows.push_back(g1_g2_identity(opt.naive_g2));
  rows.push_back(scalar_surrogate_minimum(opt.seed));
  rows.push_back(mm_descent(3, opt.seed));
  rows.push_back(ensemble_round_trip(opt.seed));
  rows.push_back(determinism(opt.seed));
  return rows;
}

inline bool all_passed(const std::vector<Row>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.passed; });
}

inline void print_table(std::ostream& os, const std::vector<Row>& rows) {
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  for (const auto& r : rows)
    os << (r.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(int(width)) << r.name << "  "
       << r.detail << '\n';
}

}  // namespace karcher::check
