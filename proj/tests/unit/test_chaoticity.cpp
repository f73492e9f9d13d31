#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bcm/chaoticity.hpp"

using namespace bcm;

namespace {

ChaosSettings small_settings() {
  ChaosSettings s;
  s.n_list = {50, 5000};
  s.t_check = 1.0;
  s.seeds = 7;
  s.cell_count = 40;
  s.dt = 0.05;
  s.clocks = {Clock::auxiliary, Clock::discrete};
  s.threads = 2;
  return s;
}

}  // namespace

TEST(Chaoticity, ErrorShrinksWithN) {
  const auto r = chaoticity_check(PiecewiseConstantDensity::uniform(40), ModelParams(0.3, 0.5), small_settings());
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_EQ(r.rows[0].n, 50u);
  EXPECT_EQ(r.rows[0].clock, Clock::auxiliary);
  EXPECT_EQ(r.rows[1].clock, Clock::discrete);
  for (int c = 0; c < 2; ++c) {
    EXPECT_LT(r.rows[2 + c].median_kolmogorov, r.rows[c].median_kolmogorov);
    EXPECT_LT(r.rows[2 + c].median_wasserstein, r.rows[c].median_wasserstein);
    EXPECT_LT(r.rows[2 + c].median_kolmogorov, 0.05);
    EXPECT_EQ(r.rows[c].kolmogorov.size(), 7u);
  }
}

TEST(Chaoticity, TimeZeroIsSamplingError) {
  auto s = small_settings();
  s.t_check = 0.0;
  s.n_list = {2000};
  s.seeds = 11;
  s.clocks = {Clock::auxiliary};
  const auto m0 = PiecewiseConstantDensity::uniform(40);
  const auto r = chaoticity_check(m0, ModelParams(0.3, 0.5), s);
  EXPECT_EQ(r.reference, m0);
  // Median of the Kolmogorov statistic is about 0.83 / sqrt(N).
  EXPECT_LT(r.rows[0].median_kolmogorov, 1.63 / std::sqrt(2000.0));
  EXPECT_GT(r.rows[0].median_kolmogorov, 0.3 / std::sqrt(2000.0));
}

TEST(Chaoticity, Reproducible) {
  auto s = small_settings();
  s.n_list = {100};
  const auto a = chaoticity_check(PiecewiseConstantDensity::uniform(40), ModelParams(0.3, 0.5), s);
  s.threads = 1;
  const auto b = chaoticity_check(PiecewiseConstantDensity::uniform(40), ModelParams(0.3, 0.5), s);
  EXPECT_EQ(a.rows[0].kolmogorov, b.rows[0].kolmogorov);
  EXPECT_EQ(a.rows[1].wasserstein, b.rows[1].wasserstein);
}

TEST(Chaoticity, CsvAndValidation) {
  auto s = small_settings();
  s.n_list = {20};
  s.seeds = 2;
  const auto r = chaoticity_check(PiecewiseConstantDensity::uniform(40), ModelParams(0.3, 0.5), s);
  std::stringstream ss;
  r.write_csv(ss);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "n,simulator,median_kolmogorov,median_wasserstein,seeds");
  std::getline(ss, line);
  EXPECT_EQ(line.rfind("20,auxiliary,", 0), 0u);
  EXPECT_EQ(line.substr(line.size() - 2), ",2");

  s.n_list = {100, 50};
  EXPECT_THROW(chaoticity_check(PiecewiseConstantDensity::uniform(40), ModelParams(0.3, 0.5), s), std::invalid_argument);
  s.n_list = {100};
  EXPECT_THROW(chaoticity_check(PiecewiseConstantDensity::uniform(20), ModelParams(0.3, 0.5), s), std::invalid_argument);
  s.seeds = 0;
  EXPECT_THROW(chaoticity_check(PiecewiseConstantDensity::uniform(40), ModelParams(0.3, 0.5), s), std::invalid_argument);
}
