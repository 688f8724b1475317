#include "aidx/experiments.hpp"

#include <gtest/gtest.h>

using namespace aidx;

TEST(DriftDemo, AidxHoldsConductanceInBandWhileBaselineDiverges)
{
    // Band frozen from the first implementation run: 12 % of g0 after 1e4 pulses.
    const auto r = run_drift_demo({});
    ASSERT_EQ(r.groups.size(), 2u);
    const double g0 = 0.0052;
    for (const auto& g : r.groups) {
        EXPECT_NEAR(g.mean_g_baseline.front(), g0, 1e-12 * g0);
        double worst = 0.0;
        for (double v : g.mean_g_aidx) worst = std::max(worst, std::abs(v - g0) / g0);
        EXPECT_LE(worst, 0.12) << "p_positive " << g.p_positive;
        const double base_end = std::abs(g.mean_g_baseline.back() - g0) / g0;
        EXPECT_GE(base_end, 0.10) << "p_positive " << g.p_positive;
        EXPECT_GT(base_end, std::abs(g.mean_g_aidx.back() - g0) / g0);
    }
}

TEST(DriftDemo, BalancedRatiosZeroTheNominalRate)
{
    const std::vector<DeviceParams> one{DeviceParams::tiox()};
    const auto [a, d] = balance_ratios(one, 0.2, 0.25, {0.25, 4.0}, 0.5);
    const InputDistribution dist{{-1.0, 1.0}, {0.8, 0.2}};
    PulseConfig c = PulseConfig::identity(1, 0.25, 1.0);
    c.A[0] = a;
    c.D[0] = d;
    c.bounds = {0.25, 4.0};
    const double r = expected_drift_rate(dist, one[0], c, 0.5);
    const double r0 = expected_drift_rate(dist, one[0], PulseConfig::identity(1, 0.25, 1.0), 0.5);
    EXPECT_LT(std::abs(r), 1e-6 * std::abs(r0));
    EXPECT_LE(a * 0.25, 0.6);
}

TEST(BenchmarkSummary, RecoveryAndReductionArithmetic)
{
    BenchmarkResult r;
    r.baseline_mean.op_counts = {0, 10};
    r.baseline_mean.metric = {1.0, 0.6};
    r.aidx_mean.op_counts = {0, 10};
    r.aidx_mean.metric = {1.0, 0.9};
    r.baseline.resize(3);
    auto j = benchmark_summary(r, TaskKind::classification);
    EXPECT_NEAR(j["recovery"].get<double>(), 0.75, 1e-12);
    EXPECT_EQ(j["seeds"], 3);

    r.baseline_mean.metric = {0.1, 0.5};
    r.aidx_mean.metric = {0.1, 0.2};
    j = benchmark_summary(r, TaskKind::reconstruction);
    EXPECT_NEAR(j["reduction"].get<double>(), 0.75, 1e-12);
}
