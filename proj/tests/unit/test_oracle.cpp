#include "test_util.hpp"

namespace karcher {
namespace {

using test::diag;
using test::ensemble;
using test::matrix_near;
using test::spd_diag;

TEST(ScalarOracle, Examples) {
  EXPECT_DOUBLE_EQ(oracle::scalar_karcher({1.0, 4.0}), 2.0);
  EXPECT_DOUBLE_EQ(oracle::scalar_karcher({3.7}), 3.7);
  EXPECT_NEAR(oracle::scalar_karcher({1.0, 10.0, 100.0}), 10.0, 1e-14);
  EXPECT_THROW(oracle::scalar_karcher({1.0, 0.0}), DomainError);
  EXPECT_THROW(oracle::scalar_karcher({}), DomainError);
}

TEST(CommutingOracle, Examples) {
  EXPECT_TRUE(matrix_near(oracle::commuting(ensemble({spd_diag({1, 4}), spd_diag({4, 1})})),
                          diag({2, 2}), 1e-15));
  const SpdMatrix<double> a{{2, 1}, {1, 2}};
  EXPECT_TRUE(matrix_near(oracle::commuting(ensemble({a})), a, 1e-14));
  EXPECT_TRUE(matrix_near(
      oracle::commuting(ensemble({spd_diag({1, 8}), spd_diag({2, 1}), spd_diag({4, 1})})),
      diag({2, 2}), 1e-14));
}

TEST(CommutingOracle, RejectsNonCommuting) {
  EXPECT_THROW(oracle::commuting(ensemble({spd_diag({1, 2}), SpdMatrix<double>{{2, 1}, {1, 2}}})),
               NotCommuting);
}

TEST(CommutingOracle, OutputIsStationary) {
  bench::Rng rng(51);
  const Ensemble<double> e = bench::random_commuting_ensemble(4, 5, rng);
  EXPECT_LE(frobenius_norm(grad_direction(e, oracle::commuting(e))), 1e-9);
}

TEST(TwoMatrixOracle, Examples) {
  const SpdMatrix<double> a{{2, 1}, {1, 2}};
  EXPECT_TRUE(matrix_near(oracle::two_matrix(a, a), a, 1e-14));
  EXPECT_TRUE(matrix_near(oracle::two_matrix(SpdMatrix<double>::identity(2), a), pow_m(a, 0.5), 1e-14));
  EXPECT_TRUE(matrix_near(oracle::two_matrix(spd_diag({1, 4}), spd_diag({9, 1})), diag({3, 2}), 1e-14));
}

TEST(TwoMatrixOracle, OutputIsStationary) {
  bench::Rng rng(52);
  for (int k = 0; k < 10; ++k) {
    const SpdMatrix<double> a = bench::random_spd(4, rng), b = bench::random_spd(4, rng);
    EXPECT_LE(frobenius_norm(grad_direction(ensemble({a, b}), oracle::two_matrix(a, b))), 1e-9);
  }
}

TEST(GridMinimize, Examples) {
  const auto quad = oracle::grid_minimize_1d([](double x) { return (x - 2) * (x - 2); }, 0, 4, 4001);
  EXPECT_NEAR(quad.argmin, 2.0, 1e-3);
  const auto rational = oracle::grid_minimize_1d([](double x) { return x + 4 / x; }, 0.1, 10, 100001,
                                                 oracle::GridSpacing::logarithmic);
  EXPECT_NEAR(rational.argmin, 2.0, 2.0 * std::log(100.0) / 100000);
  EXPECT_NEAR(rational.min, 4.0, 1e-8);
}

TEST(GridMinimize, ScalarSurrogateMinimizedAtExpansionPoint) {
  const double xp = 3.0;
  const double a = g1_scalar(xp), b = g2_scalar(xp);
  const int points = 100000;
  const auto best = oracle::grid_minimize_1d(
      [&](double x) { return a * x + b / x - std::log(x) * std::log(x); }, xp * 1e-6, xp * 1e6,
      points, oracle::GridSpacing::logarithmic);
  const double cell = std::log(1e12) / (points - 1);
  EXPECT_LE(std::abs(std::log(best.argmin / xp)), cell);
}

TEST(GridMinimize, InvalidInput) {
  const auto f = [](double x) { return x; };
  EXPECT_THROW(oracle::grid_minimize_1d(f, 1, 1, 10), DomainError);
  EXPECT_THROW(oracle::grid_minimize_1d(f, 0, 1, 2), DomainError);
  EXPECT_THROW(oracle::grid_minimize_1d(f, 0, 1, 10, oracle::GridSpacing::logarithmic), DomainError);
  EXPECT_THROW(oracle::grid_minimize_1d([](double) { return NAN; }, 0, 1, 10), DomainError);
}

TEST(FiniteDiff, LinearFunctionIsExact) {
  bench::Rng rng(53);
  const Matrix<double> a = bench::random_symmetric(3, rng);
  const Matrix<double> h = bench::random_symmetric(3, rng);
  const SpdMatrix<double> x = bench::random_spd(3, rng);
  const double fd = oracle::finite_diff_directional(
      [&](const SpdMatrix<double>& y) { return trace(Matrix<>(a * y.matrix())); }, x, h, 1e-6);
  EXPECT_NEAR(fd, frob_inner(a, h), 1e-8);
}

TEST(FiniteDiff, HandExamples) {
  const double inv = oracle::finite_diff_directional(
      [](const SpdMatrix<double>& y) { return frob_inner(inv_m(y).matrix(), Matrix<>::identity(2)); },
      SpdMatrix<double>::identity(2), Matrix<>::identity(2), 1e-6);
  EXPECT_NEAR(inv, -2.0, 1e-8);
  const double lg = oracle::finite_diff_directional(
      [](const SpdMatrix<double>& y) {
        const Matrix<double> l = log_m(y);
        return frob_inner(l, l);
      },
      spd_diag({std::exp(1.0), 1}), diag({1, 0}), 1e-6);
  EXPECT_NEAR(lg, 2 / std::exp(1.0), 1e-8);
}

TEST(FiniteDiff, LeavingTheConeThrows) {
  EXPECT_THROW(oracle::finite_diff_directional([](const SpdMatrix<double>&) { return 0.0; },
                                               spd_diag({1e-7, 1}), diag({1, 0}), 1e-6),
               DomainError);
}

TEST(DerivativeChecks, AllAnalyticFormsOfTheLibraryPass) {
  for (const auto& row : check::derivative_checks(50, 7)) EXPECT_TRUE(row.passed) << row.name << ": " << row.detail;
}

}  // namespace
}  // namespace karcher
