#pragma once

// Simulation harness: random SPD ensembles A_i = U_i S_i U_iᵀ and repeated
// solver runs aggregated into per-iteration mean logarithmic errors.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "karcher/error.hpp"
#include "karcher/matrix.hpp"
#include "karcher/objective.hpp"
#include "karcher/solvers.hpp"
#include "karcher/spd.hpp"

namespace karcher::bench {

/// std::mt19937_64 with a fixed seeding rule. Run r of an experiment with seed
/// s draws from the child stream seeded by seed_seq{lo(s), hi(s), lo(r), hi(r)}.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : Rng(seed, 0) {}

  static Rng child(std::uint64_t seed, std::uint64_t stream) { return Rng(seed, stream); }

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) from the top 53 bits of one draw.
  double uniform01() { return double(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(make_seq(seed, stream)) {}

  static std::mt19937_64 make_seq(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                      std::uint32_t(stream >> 32)};
    return std::mt19937_64(seq);
  }

  std::mt19937_64 engine_;
};

/// Orthonormal basis of the range of a p×p matrix with iid uniform(0,1)
/// entries, taken as its left singular vectors (the eigenvectors of R Rᵀ).
inline Matrix<double> random_orthogonal(std::size_t p, Rng& rng) {
  if (p == 0) throw InvalidArgument("random_orthogonal: p must be >= 1");
  Matrix<double> r(p, p);
  for (auto& v : r.data()) v = rng.uniform01();
  return sym_eig(Matrix<double>(r * r.transposed())).vectors;
}

/// U diag(s) Uᵀ with s iid uniform(lo, hi).
inline SpdMatrix<double> random_spd(std::size_t p, Rng& rng, double lo = 1.0, double hi = 10.0) {
  const Matrix<double> u = random_orthogonal(p, rng);
  std::vector<double> s(p);
  for (auto& v : s) v = rng.uniform(lo, hi);
  return SpdMatrix<double>::trusted(congruence(u, Matrix<double>::diagonal(s)));
}

/// Symmetric matrix with iid uniform(-1, 1) entries on and above the diagonal.
inline Matrix<double> random_symmetric(std::size_t p, Rng& rng) {
  Matrix<double> h(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) h(i, j) = h(j, i) = rng.uniform(-1.0, 1.0);
  return h;
}

inline Ensemble<double> random_ensemble(std::size_t n, std::size_t p, Rng& rng, double lo = 1.0,
                                        double hi = 10.0) {
  std::vector<SpdMatrix<double>> mats;
  for (std::size_t i = 0; i < n; ++i) mats.push_back(random_spd(p, rng, lo, hi));
  return Ensemble<double>(std::move(mats));
}

/// n matrices sharing one eigenbasis, so every pair commutes.
inline Ensemble<double> random_commuting_ensemble(std::size_t n, std::size_t p, Rng& rng,
                                                  double lo = 1.0, double hi = 10.0) {
  const Matrix<double> u = random_orthogonal(p, rng);
  std::vector<SpdMatrix<double>> mats;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> s(p);
    for (auto& v : s) v = rng.uniform(lo, hi);
    mats.push_back(SpdMatrix<double>::trusted(congruence(u, Matrix<double>::diagonal(s))));
  }
  return Ensemble<double>(std::move(mats));
}

enum class SpectrumKind { uniform, geometric, explicit_values };

inline std::string_view to_string(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::uniform: return "uniform";
    case SpectrumKind::geometric: return "geometric";
    case SpectrumKind::explicit_values: return "explicit";
  }
  return "?";
}

struct SpectrumSpec {
  SpectrumKind kind = SpectrumKind::uniform;
  std::size_t dim = 1;
  double lo = 1.0;  ///< uniform
  double hi = 10.0;  ///< uniform
  double a = 0.0;  ///< geometric: 10^0, 10^a, ..., 10^{(dim-1)a}
  std::vector<double> values;  ///< explicit

  static SpectrumSpec uniform(std::size_t dim, double lo, double hi) {
    SpectrumSpec s;
    s.kind = SpectrumKind::uniform;
    s.dim = dim;
    s.lo = lo;
    s.hi = hi;
    return s;
  }

  static SpectrumSpec geometric(std::size_t dim, double a) {
    SpectrumSpec s;
    s.kind = SpectrumKind::geometric;
    s.dim = dim;
    s.a = a;
    return s;
  }

  static SpectrumSpec explicit_values(std::vector<double> values) {
    SpectrumSpec s;
    s.kind = SpectrumKind::explicit_values;
    s.dim = values.size();
    s.values = std::move(values);
    return s;
  }

  void validate(const std::string& field = "spectrum") const {
    if (dim < 1) throw InvalidArgument(field + ".dim: must be >= 1");
    switch (kind) {
      case SpectrumKind::uniform:
        if (!(lo > 0.0)) throw InvalidArgument(field + ".lo: must be > 0");
        if (!(hi > lo)) throw InvalidArgument(field + ".hi: must exceed lo");
        break;
      case SpectrumKind::geometric:
        if (!(a > 0.0)) throw InvalidArgument(field + ".a: must be > 0");
        break;
      case SpectrumKind::explicit_values:
        if (values.size() != dim)
          throw InvalidArgument(field + ".values: expected " + std::to_string(dim) + " entries");
        for (double v : values)
          if (!(v > 0.0) || !std::isfinite(v))
            throw InvalidArgument(field + ".values: entries must be positive and finite");
        break;
    }
  }

  std::vector<double> sample(Rng& rng) const {
    std::vector<double> out(dim);
    switch (kind) {
      case SpectrumKind::uniform:
        for (auto& v : out) v = rng.uniform(lo, hi);
        break;
      case SpectrumKind::geometric:
        for (std::size_t k = 0; k < dim; ++k) out[k] = std::pow(10.0, double(k) * a);
        break;
      case SpectrumKind::explicit_values: out = values; break;
    }
    return out;
  }
};

struct SolverSpec {
  std::string id;
  SolverKind kind = SolverKind::mm;
  SolverConfig config;
};

/// Column label used when a solver spec carries no explicit id.
inline std::string default_solver_id(SolverKind kind, const SolverConfig& cfg) {
  if (kind == SolverKind::mm) return "mm";
  std::ostringstream os;
  os << to_string(kind) << "-nu" << cfg.nu;
  return os.str();
}

inline SolverSpec make_solver(SolverKind kind, double nu = 1.0, double c = 0.5) {
  SolverSpec s;
  s.kind = kind;
  s.config.nu = nu;
  s.config.c = c;
  s.id = default_solver_id(kind, s.config);
  return s;
}

/// MM, line-search GD with ν ∈ {1/4, 1/2, 1, 2, 4} and c = 1/2, fixed-step GD with ν = 1.
inline std::vector<SolverSpec> standard_solvers() {
  std::vector<SolverSpec> out{make_solver(SolverKind::mm)};
  for (double nu : {0.25, 0.5, 1.0, 2.0, 4.0}) out.push_back(make_solver(SolverKind::gd_linesearch, nu));
  out.push_back(make_solver(SolverKind::gd_fixed, 1.0));
  return out;
}

struct ExperimentSpec {
  std::size_t n = 1;
  std::size_t p = 1;
  SpectrumSpec spectrum;
  double scale_first_by = 1.0;
  int runs = 1;
  std::uint64_t seed = 0;
  std::vector<SolverSpec> solvers;

  /// Checks the fields that define one random instance.
  void validate_instance() const {
    if (n < 1) throw InvalidArgument("n: must be >= 1");
    if (p < 1) throw InvalidArgument("p: must be >= 1");
    spectrum.validate();
    if (spectrum.dim != p) throw InvalidArgument("spectrum.dim: must equal p");
    if (!(scale_first_by > 0.0) || !std::isfinite(scale_first_by))
      throw InvalidArgument("scale_first_by: must be > 0");
  }

  void validate() const {
    validate_instance();
    if (runs < 1) throw InvalidArgument("runs: must be >= 1");
    if (solvers.empty()) throw InvalidArgument("solvers: at least one solver is required");
    for (std::size_t k = 0; k < solvers.size(); ++k) {
      const std::string field = "solvers[" + std::to_string(k) + "]";
      if (solvers[k].id.empty()) throw InvalidArgument(field + ".id: must not be empty");
      if (solvers[k].id.find_first_of(",\"\n") != std::string::npos)
        throw InvalidArgument(field + ".id: must not contain commas, quotes or newlines");
      for (std::size_t j = 0; j < k; ++j)
        if (solvers[j].id == solvers[k].id)
          throw InvalidArgument(field + ".id: duplicate id '" + solvers[k].id + "'");
      try {
        solvers[k].config.validate();
      } catch (const InvalidArgument& err) {
        throw InvalidArgument(field + ".config: " + err.what());
      }
    }
  }
};

/// A_i = U_i S_i U_iᵀ for i = 1..n, with A_1 multiplied by scale_first_by.
inline Ensemble<double> generate_ensemble(const ExperimentSpec& spec, Rng& rng) {
  spec.validate_instance();
  std::vector<SpdMatrix<double>> mats;
  mats.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const Matrix<double> u = random_orthogonal(spec.p, rng);
    std::vector<double> s = spec.spectrum.sample(rng);
    if (i == 0)
      for (auto& v : s) v *= spec.scale_first_by;
    mats.push_back(SpdMatrix<double>::trusted(congruence(u, Matrix<double>::diagonal(s))));
  }
  return Ensemble<double>(std::move(mats));
}

struct RunOutcome {
  bool failed = false;
  std::string error;
  SolverStatus status = SolverStatus::max_iters_exceeded;
  int iters_used = 0;
  std::vector<TraceRecord> trace;
};

struct SolverSeries {
  std::string id;
  /// Mean over runs of log_error at each iteration; short runs are padded
  /// with their final value.
  std::vector<double> mean_log_error;
  std::vector<RunOutcome> runs;
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<SolverSeries> series;

  /// Number of iteration rows needed to hold the longest series.
  std::size_t rows() const {
    std::size_t r = 0;
    for (const auto& s : series) r = std::max(r, s.mean_log_error.size());
    return r;
  }
};

namespace detail {

inline std::vector<double> padded_mean(const std::vector<RunOutcome>& runs) {
  std::size_t length = 0;
  std::size_t used = 0;
  for (const auto& r : runs) {
    if (r.trace.empty()) continue;
    length = std::max(length, r.trace.size());
    ++used;
  }
  std::vector<double> mean(length, 0.0);
  if (used == 0) return mean;
  for (const auto& r : runs) {
    if (r.trace.empty()) continue;
    for (std::size_t k = 0; k < length; ++k)
      mean[k] += r.trace[std::min(k, r.trace.size() - 1)].log_error;
  }
  for (auto& v : mean) v /= double(used);
  return mean;
}

}  // namespace detail

/// Runs every solver on `spec.runs` independent ensembles. Each run owns the
/// child RNG stream of its index, so the report does not depend on `threads`.
/// Per-run failures are recorded in the report rather than propagated.
inline ExperimentReport run_experiment(const ExperimentSpec& spec, unsigned threads = 1) {
  spec.validate();
  const std::size_t runs = std::size_t(spec.runs);
  std::vector<std::vector<RunOutcome>> by_run(runs);

  auto do_run = [&](std::size_t r) {
    std::vector<RunOutcome> outcomes(spec.solvers.size());
    try {
      Rng rng = Rng::child(spec.seed, r);
      const Ensemble<double> ensemble = generate_ensemble(spec, rng);
      const SpdMatrix<double> x0 = arithmetic_mean_init(ensemble);
      for (std::size_t s = 0; s < spec.solvers.size(); ++s) {
        try {
          SolverResult<double> res =
              solve_working(spec.solvers[s].kind, ensemble, spec.solvers[s].config, x0);
          outcomes[s].status = res.status;
          outcomes[s].iters_used = res.iters_used;
          outcomes[s].trace = std::move(res.trace);
        } catch (const std::exception& err) {
          outcomes[s].failed = true;
          outcomes[s].error = err.what();
        }
      }
    } catch (const std::exception& err) {
      for (auto& o : outcomes) {
        o.failed = true;
        o.error = std::string("ensemble generation: ") + err.what();
      }
    }
    by_run[r] = std::move(outcomes);
  };

  threads = std::max(1u, std::min<unsigned>(threads, unsigned(runs)));
  if (threads == 1) {
    for (std::size_t r = 0; r < runs; ++r) do_run(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < runs; r = next++) do_run(r);
      });
    for (auto& th : pool) th.join();
  }

  ExperimentReport report{spec, {}};
  for (std::size_t s = 0; s < spec.solvers.size(); ++s) {
    SolverSeries series;
    series.id = spec.solvers[s].id;
    for (std::size_t r = 0; r < runs; ++r) series.runs.push_back(std::move(by_run[r][s]));
    series.mean_log_error = detail::padded_mean(series.runs);
    report.series.push_back(std::move(series));
  }
  return report;
}

}  // namespace karcher::bench
