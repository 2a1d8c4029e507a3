#include "test_util.hpp"

namespace karcher {
namespace {

using bench::ExperimentSpec;
using bench::Rng;
using bench::SpectrumSpec;

double condition(const Matrix<double>& m) {
  const std::vector<double> v = sym_eigvals(m);
  return v.front() / v.back();
}

TEST(Rng, DeterministicAndStreamsDiffer) {
  Rng a = Rng::child(5, 0), b = Rng::child(5, 0), c = Rng::child(5, 1);
  for (int k = 0; k < 10; ++k) {
    const std::uint64_t x = a.next();
    EXPECT_EQ(x, b.next());
    EXPECT_NE(x, c.next());
  }
  Rng u(9);
  for (int k = 0; k < 1000; ++k) {
    const double v = u.uniform01();
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(RandomOrthogonal, Examples) {
  Rng rng(61);
  const Matrix<double> one = bench::random_orthogonal(1, rng);
  EXPECT_EQ(std::abs(one(0, 0)), 1.0);
  for (std::size_t p = 1; p <= 12; ++p) {
    const Matrix<double> u = bench::random_orthogonal(p, rng);
    EXPECT_LT(frobenius_norm(Matrix<>(u.transposed() * u - Matrix<>::identity(p))), 1e-12) << p;
  }
  Rng r1(62), r2(62);
  EXPECT_EQ(bench::random_orthogonal(6, r1), bench::random_orthogonal(6, r2));
  EXPECT_THROW(bench::random_orthogonal(0, r1), InvalidArgument);
}

TEST(SpectrumSpec, Validation) {
  EXPECT_THROW(SpectrumSpec::uniform(3, 0.0, 1.0).validate(), InvalidArgument);
  EXPECT_THROW(SpectrumSpec::uniform(3, 2.0, 1.0).validate(), InvalidArgument);
  EXPECT_THROW(SpectrumSpec::geometric(3, 0.0).validate(), InvalidArgument);
  EXPECT_THROW(SpectrumSpec::explicit_values({1.0, -1.0}).validate(), InvalidArgument);
  EXPECT_NO_THROW(SpectrumSpec::explicit_values({2.0}).validate());
}

TEST(SpectrumSpec, GeometricSeries) {
  Rng rng(63);
  const std::vector<double> s = SpectrumSpec::geometric(4, 0.5).sample(rng);
  ASSERT_EQ(s.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(s[k], std::pow(10.0, 0.5 * double(k)));
}

TEST(GenerateEnsemble, UniformConditionBoundedByTen) {
  ExperimentSpec spec;
  spec.n = spec.p = 10;
  spec.spectrum = SpectrumSpec::uniform(10, 1, 10);
  Rng rng(64);
  const Ensemble<double> e = bench::generate_ensemble(spec, rng);
  ASSERT_EQ(e.size(), 10u);
  for (const auto& a : e.matrices()) EXPECT_LE(condition(a.matrix()), 10.0 * (1 + 1e-9));
}

TEST(GenerateEnsemble, GeometricCondition) {
  ExperimentSpec spec;
  spec.n = 3;
  spec.p = 10;
  spec.spectrum = SpectrumSpec::geometric(10, 0.3);
  Rng rng(65);
  const Ensemble<double> e = bench::generate_ensemble(spec, rng);
  for (const auto& a : e.matrices())
    EXPECT_NEAR(condition(a.matrix()) / std::pow(10.0, 2.7), 1.0, 1e-6);
}

TEST(GenerateEnsemble, ExplicitScalar) {
  ExperimentSpec spec;
  spec.spectrum = SpectrumSpec::explicit_values({2.0});
  Rng rng(66);
  const Ensemble<double> e = bench::generate_ensemble(spec, rng);
  EXPECT_EQ(e[0].matrix(), (Matrix<>{{2.0}}));
}

TEST(GenerateEnsemble, SpectrumIsReproducedAndFirstMatrixScaled) {
  ExperimentSpec spec;
  spec.n = 3;
  spec.p = 4;
  spec.spectrum = SpectrumSpec::explicit_values({1, 2, 3, 5});
  spec.scale_first_by = 1e4;
  Rng rng(67);
  const Ensemble<double> e = bench::generate_ensemble(spec, rng);
  const std::vector<double> first = sym_eigvals(e[0].matrix());
  const std::vector<double> second = sym_eigvals(e[1].matrix());
  const std::vector<double> want{5, 3, 2, 1};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(first[k], 1e4 * want[k], 1e-9 * 1e4 * want[k]);
    EXPECT_NEAR(second[k], want[k], 1e-12 * want[k]);
  }
}

TEST(GenerateEnsemble, RejectsInvalidSpec) {
  ExperimentSpec spec;
  spec.p = 3;
  spec.spectrum = SpectrumSpec::uniform(2, 1, 10);
  Rng rng(68);
  EXPECT_THROW(bench::generate_ensemble(spec, rng), InvalidArgument);
  spec.spectrum.dim = 3;
  spec.scale_first_by = 0;
  EXPECT_THROW(bench::generate_ensemble(spec, rng), InvalidArgument);
}

TEST(ExperimentSpec, ValidationNamesTheField) {
  ExperimentSpec spec;
  spec.solvers = bench::standard_solvers();
  spec.runs = 0;
  try {
    spec.validate();
    FAIL();
  } catch (const InvalidArgument& err) {
    EXPECT_NE(std::string(err.what()).find("runs"), std::string::npos);
  }
  spec.runs = 1;
  spec.solvers[2].config.c = 2;
  try {
    spec.validate();
    FAIL();
  } catch (const InvalidArgument& err) {
    EXPECT_NE(std::string(err.what()).find("solvers[2].config"), std::string::npos);
  }
  spec.solvers = {bench::make_solver(SolverKind::mm), bench::make_solver(SolverKind::mm)};
  EXPECT_THROW(spec.validate(), InvalidArgument);
}

TEST(StandardSolvers, Ids) {
  std::vector<std::string> ids;
  for (const auto& s : bench::standard_solvers()) ids.push_back(s.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"mm", "gd-ls-nu0.25", "gd-ls-nu0.5", "gd-ls-nu1",
                                           "gd-ls-nu2", "gd-ls-nu4", "gd-fixed-nu1"}));
}

TEST(RunExperiment, SingleScalarRunConvergesWithinTwoIterations) {
  ExperimentSpec spec;
  spec.spectrum = SpectrumSpec::uniform(1, 1, 10);
  spec.solvers = bench::standard_solvers();
  const bench::ExperimentReport r = bench::run_experiment(spec);
  ASSERT_EQ(r.series.size(), spec.solvers.size());
  for (const auto& s : r.series) {
    ASSERT_EQ(s.runs.size(), 1u);
    EXPECT_EQ(s.runs[0].status, SolverStatus::converged) << s.id;
    EXPECT_LE(s.runs[0].iters_used, 2) << s.id;
  }
}

TEST(RunExperiment, PaperRegimeReportShape) {
  ExperimentSpec spec;
  spec.n = spec.p = 10;
  spec.spectrum = SpectrumSpec::uniform(10, 1, 10);
  spec.runs = 2;
  spec.seed = 3;
  spec.solvers = {bench::make_solver(SolverKind::mm), bench::make_solver(SolverKind::gd_linesearch, 1),
                  bench::make_solver(SolverKind::gd_fixed, 1)};
  const bench::ExperimentReport r = bench::run_experiment(spec);
  ASSERT_EQ(r.series.size(), 3u);
  std::size_t longest = 0;
  for (const auto& s : r.series) {
    EXPECT_EQ(s.runs.size(), 2u);
    for (const auto& run : s.runs) {
      EXPECT_FALSE(run.failed) << run.error;
      longest = std::max(longest, run.trace.size());
    }
  }
  EXPECT_EQ(r.rows(), longest);
}

TEST(RunExperiment, PaddingRepeatsFinalValue) {
  bench::RunOutcome a, b;
  a.trace = {{0, 0, 0, -1.0, 0}, {1, 0, 0, -3.0, 0}};
  b.trace = {{0, 0, 0, -2.0, 0}, {1, 0, 0, -4.0, 0}, {2, 0, 0, -6.0, 0}};
  EXPECT_EQ(bench::detail::padded_mean({a, b}), (std::vector<double>{-1.5, -3.5, -4.5}));
}

TEST(RunExperiment, FailuresAreRecordedNotThrown) {
  ExperimentSpec spec;
  spec.n = 3;
  spec.p = 3;
  spec.spectrum = SpectrumSpec::uniform(3, 1, 10);
  spec.runs = 2;
  bench::SolverSpec bad = bench::make_solver(SolverKind::gd_linesearch, 1e6);
  bad.config.ls_max_j = 1;
  spec.solvers = {bad, bench::make_solver(SolverKind::mm)};
  const bench::ExperimentReport r = bench::run_experiment(spec);
  EXPECT_EQ(r.series[0].runs[0].status, SolverStatus::line_search_stalled);
  EXPECT_EQ(r.series[1].runs[1].status, SolverStatus::converged);
}

TEST(RunExperiment, DeterministicAcrossThreadCounts) {
  ExperimentSpec spec;
  spec.n = 4;
  spec.p = 5;
  spec.spectrum = SpectrumSpec::geometric(5, 0.3);
  spec.runs = 4;
  spec.seed = 17;
  spec.solvers = {bench::make_solver(SolverKind::mm), bench::make_solver(SolverKind::gd_fixed, 1)};
  const auto a = bench::run_experiment(spec, 1);
  const auto b = bench::run_experiment(spec, 3);
  const auto c = bench::run_experiment(spec, 1);
  for (std::size_t s = 0; s < a.series.size(); ++s) {
    EXPECT_EQ(a.series[s].mean_log_error, b.series[s].mean_log_error);
    EXPECT_EQ(a.series[s].mean_log_error, c.series[s].mean_log_error);
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t k = 0; k < a.series[s].runs[r].trace.size(); ++k)
        EXPECT_EQ(a.series[s].runs[r].trace[k].objective, b.series[s].runs[r].trace[k].objective);
  }
}

TEST(RunExperiment, MmObjectiveMonotonePerRun) {
  ExperimentSpec spec;
  spec.n = 6;
  spec.p = 6;
  spec.spectrum = SpectrumSpec::geometric(6, 0.5);
  spec.runs = 3;
  spec.solvers = {bench::make_solver(SolverKind::mm)};
  const bench::ExperimentReport report = bench::run_experiment(spec);
  for (const auto& run : report.series[0].runs)
    for (std::size_t k = 1; k < run.trace.size(); ++k)
      EXPECT_LE(run.trace[k].objective,
                run.trace[k - 1].objective + 1e-12 * (1 + run.trace[k - 1].objective));
}

}  // namespace
}  // namespace karcher
