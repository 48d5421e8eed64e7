#include <gtest/gtest.h>

#include <random>

#include "agemon/analytics.hpp"
#include "oracles.hpp"

using namespace agemon;

namespace {

MefSeries series(std::vector<double> mhz, std::string id = "dut") {
  MefSeries s;
  s.device_id = std::move(id);
  for (std::size_t i = 0; i < mhz.size(); ++i) s.points.push_back({20.0 + 10.0 * i, mhz[i] * 1e6});
  return s;
}

MefSeries random_series(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> start(50e6, 200e6), drop(-0.01, 0.05);
  std::uniform_int_distribution<int> length(2, 12);
  MefSeries s;
  double mef = start(gen);
  const int n = length(gen);
  for (int i = 0; i < n; ++i) {
    s.points.push_back({20.0 + 10.0 * i, mef});
    mef *= 1.0 - drop(gen);
  }
  return s;
}

PayloadFeatures features(double mef_b, double mef_u, double t_b, double t_u, bool tr_b,
                         bool tr_u) {
  PayloadFeatures f;
  f.mef_hz = {{FlashBuffering::Buffered, mef_b}, {FlashBuffering::Unbuffered, mef_u}};
  f.exec_time_s = {{FlashBuffering::Buffered, t_b}, {FlashBuffering::Unbuffered, t_u}};
  f.has_transition = {{FlashBuffering::Buffered, tr_b}, {FlashBuffering::Unbuffered, tr_u}};
  return f;
}

// Features shaped like the default calibration at 20 C.
std::map<PayloadName, PayloadFeatures> calibrated_features() {
  return {
      {PayloadName::Matrix, features(145e6, 125e6, 182e-6, 140e-6, true, true)},
      {PayloadName::FlashRead, features(180e6, 125e6, 260e-6, 200e-6, false, true)},
      {PayloadName::RamRw, features(165e6, 125e6, 585e-6, 450e-6, false, true)},
      {PayloadName::RamMarchC, features(165e6, 165e6, 52e-6, 40e-6, false, false)},
      {PayloadName::CpuTest, features(180e6, 180e6, 7.8e-6, 6e-6, false, false)},
  };
}

}  // namespace

TEST(Degradation, StepArithmetic) {
  EXPECT_NEAR(degradation_step(series({100, 98}), 1), 2.0, 1e-12);
  const auto s = series({100, 98, 95});
  EXPECT_NEAR(degradation_step(s, 2), 3.0, 1e-12);
}

TEST(Degradation, ConstantSeriesIsZero) {
  const auto s = series({120, 120, 120, 120});
  for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(degradation_step(s, i), 0.0);
  EXPECT_EQ(total_degradation(s), 0.0);
}

TEST(Degradation, StepIndexErrors) {
  const auto s = series({100, 98});
  EXPECT_THROW(degradation_step(s, 0), DomainError);
  EXPECT_THROW(degradation_step(s, 2), DomainError);
  EXPECT_THROW(total_degradation(series({100})), DomainError);
}

TEST(Degradation, TotalExamples) {
  EXPECT_NEAR(total_degradation(series({100, 86.21})), 13.79, 1e-9);
  EXPECT_NEAR(total_degradation(series({100, 88.2})), 11.8, 1e-9);
  const auto one = series({150, 147});
  EXPECT_EQ(total_degradation(one), degradation_step(one, 1));
}

TEST(Degradation, TelescopingAndScaleInvariance) {
  std::mt19937_64 gen(61);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int t = 0; t < 1000; ++t) {
    const auto s = random_series(gen);
    double sum = 0;
    for (std::size_t i = 1; i < s.points.size(); ++i) sum += degradation_step(s, i);
    const double total = total_degradation(s);
    EXPECT_LE(std::abs(sum - total), 1e-12 * std::max(1.0, std::abs(total)));
    auto scaled = s;
    const double c = scale(gen);
    for (auto& p : scaled.points) p.mef_hz *= c;
    for (std::size_t i = 1; i < s.points.size(); ++i) {
      const double a = degradation_step(s, i), b = degradation_step(scaled, i);
      EXPECT_LE(std::abs(a - b), 1e-12 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST(Stats, Examples) {
  const auto s = cross_device_stats({5, 1, 4, 2, 3});
  EXPECT_EQ(s.median, 3);
  EXPECT_EQ(s.q1, 2);
  EXPECT_EQ(s.q3, 4);
  const auto one = cross_device_stats({7.5});
  EXPECT_EQ(one, (OrderStats{7.5, 7.5, 7.5}));
  EXPECT_THROW(cross_device_stats({}), DomainError);
  const auto even = cross_device_stats({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(even.median, 2.5);
  EXPECT_DOUBLE_EQ(even.q1, 1.75);
  EXPECT_DOUBLE_EQ(even.q3, 3.25);
}

TEST(Stats, MatchesNaiveOracle) {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> size(1, 40);
  std::normal_distribution<double> value(2.0, 1.5);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> v(size(gen));
    for (auto& x : v) x = value(gen);
    const auto s = cross_device_stats(v);
    EXPECT_NEAR(s.median, oracle::naive_quantile(v, 0.5), 1e-12);
    EXPECT_NEAR(s.q1, oracle::naive_quantile(v, 0.25), 1e-12);
    EXPECT_NEAR(s.q3, oracle::naive_quantile(v, 0.75), 1e-12);
  }
}

TEST(Summary, MediansTotalsAndAnomalies) {
  std::vector<MefSeries> all = {series({100, 98, 96}, "a"), series({100, 97, 95}, "b"),
                                series({100, 101, 94}, "c")};
  const auto r = summarize_degradation(all);
  ASSERT_EQ(r.steps.size(), 3u);
  EXPECT_NEAR(r.median_steps[0], 2.0, 1e-12);
  EXPECT_NEAR(r.median_steps[1], 2.0, 1e-12);
  EXPECT_NEAR(r.total_stats.median, 5.0, 1e-12);
  ASSERT_EQ(r.anomalies.size(), 1u);
  EXPECT_NE(r.anomalies[0].find("c step 1"), std::string::npos);
  EXPECT_NEAR(r.steps[2][0], -1.0, 1e-12);  // kept, not clamped
  for (std::size_t d = 0; d < 3; ++d) {
    EXPECT_NEAR(r.steps[d][0] + r.steps[d][1], r.totals[d], 1e-12);
  }
}

TEST(Summary, RejectsBadSeries) {
  std::vector<MefSeries> ragged = {series({100, 98, 96}), series({100, 97})};
  EXPECT_THROW(summarize_degradation(ragged), DomainError);
  EXPECT_THROW(summarize_degradation(std::vector<MefSeries>{}), DomainError);
  auto unordered = series({100, 98});
  unordered.points[1].temperature_c = 10;
  EXPECT_THROW(unordered.validate(), DomainError);
  auto zero = series({100, 0});
  EXPECT_THROW(zero.validate(), DomainError);
}

TEST(Scores, CalibratedFeaturesScoreTable) {
  const auto t = score_payloads(calibrated_features());
  // expected execution time and error transition columns
  EXPECT_EQ(t.at(PayloadName::Matrix).execution_time_score, 2.0);
  EXPECT_EQ(t.at(PayloadName::FlashRead).execution_time_score, 1.5);
  EXPECT_EQ(t.at(PayloadName::RamRw).execution_time_score, 1.0);
  EXPECT_EQ(t.at(PayloadName::RamMarchC).execution_time_score, 2.5);
  EXPECT_EQ(t.at(PayloadName::CpuTest).execution_time_score, 3.0);
  EXPECT_EQ(t.at(PayloadName::Matrix).error_transition_score, 3.0);
  EXPECT_EQ(t.at(PayloadName::FlashRead).error_transition_score, 1.5);
  EXPECT_EQ(t.at(PayloadName::RamRw).error_transition_score, 1.5);
  EXPECT_EQ(t.at(PayloadName::RamMarchC).error_transition_score, 0.0);
  EXPECT_EQ(t.at(PayloadName::CpuTest).error_transition_score, 0.0);
  // MEF column: matrix on top, CPU at the bottom
  EXPECT_EQ(t.at(PayloadName::Matrix).mef_score, 3.0);
  for (auto name : kAllPayloads) {
    EXPECT_LE(t.at(name).mef_score, t.at(PayloadName::Matrix).mef_score);
    EXPECT_GE(t.at(name).mef_score, t.at(PayloadName::CpuTest).mef_score);
    EXPECT_GE(t.at(PayloadName::Matrix).error_transition_score, t.at(name).error_transition_score);
  }
}

TEST(Scores, StarScaleAndDeterminism) {
  const auto f = calibrated_features();
  const auto a = score_payloads(f), b = score_payloads(f);
  EXPECT_EQ(a, b);
  for (const auto& [name, s] : a) {
    for (double v : {s.mef_score, s.execution_time_score, s.error_transition_score}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 3.0);
      EXPECT_EQ(v * 2, std::floor(v * 2));
    }
  }
}

TEST(Scores, IdenticalFeaturesIdenticalScores) {
  auto f = calibrated_features();
  f[PayloadName::RamRw] = f[PayloadName::FlashRead];
  const auto t = score_payloads(f);
  EXPECT_EQ(t.at(PayloadName::RamRw), t.at(PayloadName::FlashRead));
}

TEST(Scores, NearTiesShareRank) {
  auto f = calibrated_features();
  f[PayloadName::FlashRead].mef_hz[FlashBuffering::Unbuffered] = 125.5e6;  // within 1%
  f[PayloadName::RamRw].mef_hz[FlashBuffering::Unbuffered] = 124.6e6;
  EXPECT_EQ(score_payloads(f), score_payloads(calibrated_features()));
}

TEST(Scores, MissingFeaturesAreReportErrors) {
  EXPECT_THROW(score_payloads({}), ReportError);
  auto f = calibrated_features();
  f[PayloadName::CpuTest].exec_time_s.erase(FlashBuffering::Buffered);
  EXPECT_THROW(score_payloads(f), ReportError);
}

TEST(Scores, RankStarsCompetitionRanking) {
  const auto s = detail::rank_stars({{PayloadName::Matrix, 1.0},
                                     {PayloadName::FlashRead, 1.0},
                                     {PayloadName::RamRw, 2.0},
                                     {PayloadName::RamMarchC, 3.0},
                                     {PayloadName::CpuTest, 3.0}});
  EXPECT_EQ(s.at(PayloadName::Matrix), 3.0);
  EXPECT_EQ(s.at(PayloadName::FlashRead), 3.0);
  EXPECT_EQ(s.at(PayloadName::RamRw), 2.0);
  EXPECT_EQ(s.at(PayloadName::RamMarchC), 1.5);
  EXPECT_EQ(detail::floor_half(2.75), 2.5);
  EXPECT_EQ(detail::floor_half(2.5), 2.5);
}
