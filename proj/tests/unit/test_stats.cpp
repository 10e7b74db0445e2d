#include <gtest/gtest.h>

#include <cmath>

#include "ssorl/stats/score_matrix.hpp"
#include "ssorl/stats/stats.hpp"

using namespace ssorl;
using namespace ssorl::stats;

TEST(Stats, MeanStdSe) {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(mean(v), 5.0);
  EXPECT_NEAR(stddev(v), std::sqrt(32.0 / 7.0), 1e-15);
  EXPECT_NEAR(std_error(v), std::sqrt(32.0 / 7.0) / std::sqrt(8.0), 1e-15);
  EXPECT_DOUBLE_EQ(stddev(std::vector<double>{3.0}), 0.0);
}

TEST(Stats, IqmMultipleOfFour) {
  // Middle half of 1..8 is 3..6.
  const std::vector<double> v{8, 1, 7, 2, 6, 3, 5, 4};
  EXPECT_DOUBLE_EQ(iqm(v), 4.5);
  EXPECT_DOUBLE_EQ(iqm(std::vector<double>{1, 1, 1, 100}), 1.0);
}

TEST(Stats, IqmFractionalBoundaries) {
  // n = 5: window [1.25, 3.75) of the order statistics.
  EXPECT_NEAR(iqm(std::vector<double>{1, 2, 3, 4, 100}), (0.75 * 2 + 3 + 0.75 * 4) / 2.5, 1e-15);
  // n = 6: window [1.5, 4.5).
  EXPECT_NEAR(iqm(std::vector<double>{0, 1, 4, 9, 16, 25}), (0.5 * 1 + 4 + 9 + 0.5 * 16) / 3.0, 1e-14);
  EXPECT_DOUBLE_EQ(iqm(std::vector<double>{7.0}), 7.0);
}

TEST(Stats, QuantileAndNamedStatistics) {
  const std::vector<double> s{0, 10, 20, 30};
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.5), 15.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 1.0), 30.0);
  EXPECT_DOUBLE_EQ(Statistic::named("median").fn(std::vector<double>{3, 1, 2}), 2.0);
  EXPECT_THROW(Statistic::named("mode"), std::invalid_argument);
}

TEST(Stats, GapAndReturnToGo) {
  EXPECT_NEAR(relative_performance_gap(1.0, 0.8), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(relative_performance_gap(2.0, 3.0), -0.5);
  EXPECT_THROW(relative_performance_gap(0.0, 1.0), std::domain_error);
  EXPECT_EQ(return_to_go(std::vector<double>{1, 2, 3}), (std::vector<double>{6, 5, 3}));
}

TEST(Bootstrap, ConstantScoresGiveDegenerateInterval) {
  const ScoreMatrix m({"a", "b"}, {"0", "1", "2"}, {{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}});
  const auto ci = stratified_bootstrap_ci(m, Statistic::named("iqm"), 0.95, 1000, 3);
  EXPECT_DOUBLE_EQ(ci.lower, 0.5);
  EXPECT_DOUBLE_EQ(ci.upper, 0.5);
  EXPECT_DOUBLE_EQ(ci.point, 0.5);
}

TEST(Bootstrap, DeterministicPerSeedAndOrdered) {
  const ScoreMatrix m({"a", "b"}, {"0", "1", "2", "3"}, {{0.1, 0.4, 0.2, 0.9}, {0.3, 0.8, 0.5, 0.6}});
  const auto s = Statistic::named("mean");
  const auto a = stratified_bootstrap_ci(m, s, 0.95, 2000, 1);
  const auto b = stratified_bootstrap_ci(m, s, 0.95, 2000, 1);
  EXPECT_EQ(a.lower, b.lower);
  EXPECT_EQ(a.upper, b.upper);
  EXPECT_LE(a.lower, a.point);
  EXPECT_GE(a.upper, a.point);
  const auto narrow = stratified_bootstrap_ci(m, s, 0.5, 2000, 1);
  EXPECT_GE(narrow.lower, a.lower);
  EXPECT_LE(narrow.upper, a.upper);
  EXPECT_NE(stratified_bootstrap_ci(m, s, 0.95, 2000, 2).lower, a.lower);
  EXPECT_THROW(stratified_bootstrap_ci(m, s, 0.95, 10, 1), std::invalid_argument);
  EXPECT_THROW(stratified_bootstrap_ci(ScoreMatrix::single({1.0}), s, 0.95, 1000, 1), std::invalid_argument);
}

// Resampling stays inside each stratum: with strata {0,0} and {1,1} every
// pooled replicate has mean exactly 0.5.
TEST(Bootstrap, StratificationKeepsRowComposition) {
  const ScoreMatrix m({"lo", "hi"}, {"0", "1"}, {{0.0, 0.0}, {1.0, 1.0}});
  const auto ci = stratified_bootstrap_ci(m, Statistic::named("mean"), 0.95, 500, 0);
  EXPECT_DOUBLE_EQ(ci.lower, 0.5);
  EXPECT_DOUBLE_EQ(ci.upper, 0.5);
}

TEST(CiReport, JsonRoundTripAndSummary) {
  CiReport r{"iqm", 0.812, 0.771, 0.846, 0.95, 50000, 0};
  EXPECT_EQ(CiReport::from_json(r.to_json()).to_json(), r.to_json());
  EXPECT_EQ(r.summary(), "iqm 0.8120 [0.7710, 0.8460] (95%, 50000 reps, seed 0)");
}

TEST(ScoreMatrix, CsvAndJsonRoundTrip) {
  const ScoreMatrix m({"task-a", "task-b"}, {"s0", "s1", "s2"}, {{0.1, 1.0 / 3.0, -2.5e-7}, {1e10, 0.0, 0.7}});
  const auto back = ScoreMatrix::from_csv(m.to_csv());
  EXPECT_EQ(back.strata(), m.strata());
  EXPECT_EQ(back.instances(), m.instances());
  EXPECT_EQ(back.flat(), m.flat());
  EXPECT_EQ(ScoreMatrix::from_json(m.to_json()).flat(), m.flat());
  EXPECT_EQ(m.to_csv().substr(0, 18), "stratum,s0,s1,s2\nt");
}

TEST(ScoreMatrix, Validation) {
  EXPECT_THROW(ScoreMatrix({"a"}, {"0", "1"}, {{1.0}}), std::invalid_argument);
  EXPECT_THROW(ScoreMatrix({"a"}, {"0"}, {{std::nan("")}}), std::invalid_argument);
  EXPECT_THROW(ScoreMatrix::from_csv("stratum,0\na,notanumber\n"), std::invalid_argument);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}
