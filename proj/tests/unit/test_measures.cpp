#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bcm/measures.hpp"
#include "oracles.hpp"

using namespace bcm;

namespace {

PiecewiseConstantDensity random_density(Rng& rng, std::size_t cells) {
  std::vector<double> levels(cells);
  for (auto& v : levels) v = rng.uniform01() < 0.25 ? 0.0 : rng.uniform01();
  levels[rng.below(cells)] += 0.5;
  return PiecewiseConstantDensity::normalized(levels);
}

}  // namespace

TEST(Density, RejectsInvalidLevels) {
  EXPECT_THROW(PiecewiseConstantDensity({}), std::invalid_argument);
  EXPECT_THROW(PiecewiseConstantDensity({2.0, -0.1}), std::invalid_argument);
  EXPECT_THROW(PiecewiseConstantDensity({1.0, 1.5}), std::invalid_argument);
  EXPECT_THROW(PiecewiseConstantDensity::normalized({0.0, 0.0}), std::invalid_argument);
  EXPECT_NO_THROW(PiecewiseConstantDensity({0.5, 1.5}));
}

TEST(Density, UniformMoments) {
  const auto m = moments(PiecewiseConstantDensity::uniform(50), 4);
  EXPECT_NEAR(m.mean, 0.5, 1e-15);
  EXPECT_NEAR(m.raw_moment(2), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.raw_moment(4), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(m.ess_inf, 0.0);
  EXPECT_DOUBLE_EQ(m.ess_sup, 1.0);
}

TEST(Density, EssentialSupportFromPositiveCells) {
  const auto m = moments(PiecewiseConstantDensity({0.0, 0.0, 2.5, 2.5, 0.0}), 2);
  EXPECT_DOUBLE_EQ(m.ess_inf, 0.4);
  EXPECT_DOUBLE_EQ(m.ess_sup, 0.8);
  EXPECT_NEAR(m.mean, 0.6, 1e-15);
}

TEST(Density, MeanMatchesFineQuadrature) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto f = random_density(rng, 1 + rng.below(40));
    // Aligned with the cells, so the midpoint rule is exact up to rounding.
    const std::size_t points = 5000 * f.cell_count();
    double acc = 0.0;
    for (std::size_t k = 0; k < points; ++k) {
      const double x = (static_cast<double>(k) + 0.5) / points;
      acc += x * f.level(std::min(f.cell_count() - 1, static_cast<std::size_t>(x * f.cell_count())));
    }
    EXPECT_NEAR(moments(f, 2).mean, acc / points, 1e-10);
  }
}

TEST(Density, VarianceIdentity) {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto m = moments(random_density(rng, 17), 3);
    EXPECT_NEAR(m.variance(), m.raw_moment(2) - m.mean * m.mean, 1e-12);
    EXPECT_LE(m.ess_inf, m.mean);
    EXPECT_LE(m.mean, m.ess_sup);
  }
}

TEST(Empirical, Moments) {
  const auto two = moments(EmpiricalMeasure({0.0, 1.0}), 2);
  EXPECT_DOUBLE_EQ(two.mean, 0.5);
  EXPECT_DOUBLE_EQ(two.std_dev, 0.5);
  EXPECT_DOUBLE_EQ(two.ess_inf, 0.0);
  EXPECT_DOUBLE_EQ(two.ess_sup, 1.0);

  const auto three = moments(EmpiricalMeasure({0.2, 0.4, 0.9}), 2);
  EXPECT_NEAR(three.mean, 0.5, 1e-15);
  EXPECT_NEAR(three.raw_moment(2), (0.04 + 0.16 + 0.81) / 3.0, 1e-15);
}

TEST(Empirical, RejectsOutOfRangeAtoms) {
  EXPECT_THROW(EmpiricalMeasure({}), std::invalid_argument);
  EXPECT_THROW(EmpiricalMeasure({0.5, 1.2}), std::invalid_argument);
  EXPECT_THROW(EmpiricalMeasure({-0.01}), std::invalid_argument);
}

TEST(Empirical, PermutationInvariance) {
  std::vector<double> atoms{0.9, 0.1, 0.35, 0.35, 0.7};
  const EmpiricalMeasure a(atoms);
  std::reverse(atoms.begin(), atoms.end());
  const EmpiricalMeasure b(atoms);
  EXPECT_EQ(a, b);
  EXPECT_EQ(moments(a, 4).raw, moments(b, 4).raw);
  const Cdf u(PiecewiseConstantDensity::uniform(7));
  EXPECT_EQ(kolmogorov_distance(a, u), kolmogorov_distance(b, u));
  EXPECT_EQ(wasserstein1_distance(a, u), wasserstein1_distance(b, u));
}

TEST(Distances, PointMasses) {
  const Cdf zero(EmpiricalMeasure({0.0}));
  const Cdf one(EmpiricalMeasure({1.0}));
  EXPECT_DOUBLE_EQ(kolmogorov_distance(zero, one), 1.0);
  EXPECT_DOUBLE_EQ(wasserstein1_distance(zero, one), 1.0);
  EXPECT_DOUBLE_EQ(kolmogorov_distance(zero, zero), 0.0);
  EXPECT_DOUBLE_EQ(wasserstein1_distance(one, one), 0.0);
}

TEST(Distances, UniformVersusHalf) {
  const Cdf u(PiecewiseConstantDensity::uniform(10));
  const Cdf half(EmpiricalMeasure({0.5}));
  // Fine-grid oracle for |x - 1{x >= 1/2}|.
  double sup = 0.0;
  double integral = 0.0;
  const std::size_t points = 1000000;
  for (std::size_t k = 0; k <= points; ++k) {
    const double x = static_cast<double>(k) / points;
    const double d = std::abs(x - (x >= 0.5 ? 1.0 : 0.0));
    sup = std::max(sup, d);
    if (k < points) integral += std::abs((x + 0.5 / points) - (x + 0.5 / points >= 0.5 ? 1.0 : 0.0)) / points;
  }
  EXPECT_NEAR(kolmogorov_distance(u, half), sup, 1e-6);
  EXPECT_NEAR(wasserstein1_distance(u, half), integral, 1e-9);
  EXPECT_DOUBLE_EQ(kolmogorov_distance(u, half), 0.5);
  EXPECT_NEAR(wasserstein1_distance(u, half), 0.25, 1e-15);
}

TEST(Distances, MetricAxioms) {
  Rng rng(11);
  const auto draw = [&]() -> Cdf {
    if (rng.uniform01() < 0.5) return random_density(rng, 1 + rng.below(12));
    std::vector<double> atoms(1 + rng.below(9));
    for (auto& x : atoms) x = rng.uniform01();
    return EmpiricalMeasure(atoms);
  };
  for (int t = 0; t < 200; ++t) {
    const auto a = draw();
    const auto b = draw();
    const auto c = draw();
    for (auto dist : {&kolmogorov_distance, &wasserstein1_distance}) {
      const double ab = dist(a, b);
      EXPECT_GE(ab, 0.0);
      EXPECT_NEAR(ab, dist(b, a), 1e-12);
      EXPECT_LE(ab, dist(a, c) + dist(c, b) + 1e-12);
      EXPECT_NEAR(dist(a, a), 0.0, 1e-12);
    }
  }
}

TEST(Distances, AgreeWithGridEvaluation) {
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    const auto f = random_density(rng, 1 + rng.below(10));
    std::vector<double> levels(f.levels().begin(), f.levels().end());
    std::vector<double> atoms(1 + rng.below(6));
    for (auto& x : atoms) x = rng.uniform01();
    const EmpiricalMeasure e(atoms);
    double sup = 0.0;
    double integral = 0.0;
    const std::size_t points = 200000;
    for (std::size_t k = 0; k < points; ++k) {
      const double x = (static_cast<double>(k) + 0.5) / points;
      const double fe = static_cast<double>(std::upper_bound(e.atoms().begin(), e.atoms().end(), x) - e.atoms().begin()) /
                        static_cast<double>(e.size());
      const double d = std::abs(oracle::density_cdf(levels, x) - fe);
      sup = std::max(sup, d);
      integral += d / points;
    }
    EXPECT_GE(kolmogorov_distance(f, e) + 1e-12, sup);
    EXPECT_NEAR(kolmogorov_distance(f, e), sup, 1e-4);
    EXPECT_NEAR(wasserstein1_distance(f, e), integral, 1e-5);
  }
}

TEST(PiecewiseLinear, EvaluationAndIntegrals) {
  const PiecewiseLinearFunction g({0.0, 0.5, 1.0}, {{4.0, -2.0}, {-1.0, 0.0}});
  EXPECT_DOUBLE_EQ(g(0.25), 3.5);
  EXPECT_DOUBLE_EQ(g(0.5), -1.0);
  EXPECT_DOUBLE_EQ(g.left_limit(0.5), 3.0);
  EXPECT_DOUBLE_EQ(g(1.0), -1.0);
  EXPECT_NEAR(g.integral(), 1.75 - 0.5, 1e-15);
  EXPECT_NEAR(g.moment_integral(1), (2.0 * 0.25 - 2.0 / 3.0 * 0.125) - 0.5 * 0.75, 1e-14);
  EXPECT_DOUBLE_EQ(g.sup_norm(), 4.0);
}

TEST(PiecewiseLinear, RejectsBadBreakpoints) {
  EXPECT_THROW(PiecewiseLinearFunction({0.0, 0.5, 0.5, 1.0}, {{0, 0}, {0, 0}, {0, 0}}), std::invalid_argument);
  EXPECT_THROW(PiecewiseLinearFunction({0.1, 1.0}, {{0, 0}}), std::invalid_argument);
  EXPECT_THROW(PiecewiseLinearFunction({0.0, 1.0}, {{NAN, 0}}), std::invalid_argument);
}

TEST(PiecewiseLinear, RampCellAverages) {
  const PiecewiseLinearFunction ramp({0.0, 0.5, 1.0}, {{0.0, 4.0}, {0.0, 0.0}});
  const auto avg = ramp.cell_averages(2);
  ASSERT_EQ(avg.size(), 2u);
  EXPECT_NEAR(avg[0], 1.0, 1e-15);
  EXPECT_NEAR(avg[1], 0.0, 1e-15);
}

TEST(Sampling, InverseCdfMatchesDensity) {
  Rng rng(5);
  const PiecewiseConstantDensity f({0.0, 3.0, 1.0, 0.0});
  const auto xs = sample(f, 40000, rng);
  for (double x : xs) ASSERT_TRUE(x >= 0.25 && x < 0.75);
  const double k = kolmogorov_distance(f, EmpiricalMeasure(xs));
  EXPECT_LT(k, 1.63 / std::sqrt(40000.0));
}

TEST(Csv, DensityRoundTrip) {
  Rng rng(6);
  const auto f = random_density(rng, 9);
  std::stringstream ss;
  write_density_csv(ss, f);
  EXPECT_EQ(ss.str().substr(0, 21), "x_left,x_right,level\n");
  EXPECT_EQ(read_density_csv(ss), f);
}

TEST(Csv, AtomsRoundTrip) {
  const std::vector<double> atoms{0.1, 0.7, 1.0 / 3.0};
  std::stringstream ss;
  write_atoms_csv(ss, atoms);
  EXPECT_EQ(read_atoms_csv(ss), atoms);
}

TEST(Csv, RejectsNonUniformGrid) {
  std::stringstream ss("x_left,x_right,level\n0,0.3,1\n0.3,1,1\n");
  EXPECT_THROW(read_density_csv(ss), std::runtime_error);
}
