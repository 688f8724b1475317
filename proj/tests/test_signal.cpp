#include "aidx/error.hpp"
#include "aidx/signal.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace aidx;

TEST(Encode, IdentityConfigIsSymmetric)
{
    const auto cfg = PulseConfig::identity(3, 0.25, 1e-7);
    const std::vector<double> x{0.5, -0.5, 0.0};
    const auto p = encode_input(x, cfg, 0.6);
    EXPECT_DOUBLE_EQ(p[0].voltage, 0.125);
    EXPECT_DOUBLE_EQ(p[1].voltage, -0.125);
    EXPECT_EQ(p[2].voltage, 0.0);
    EXPECT_EQ(p[0].width, p[1].width);
}

TEST(Encode, RatiosApplyToPositiveInputsOnly)
{
    auto cfg = PulseConfig::identity(1, 0.2, 200e-9);
    cfg.A[0] = 1.5;
    cfg.D[0] = 0.75;
    const std::vector<double> pos{1.0}, neg{-1.0};
    const auto p = encode_input(pos, cfg, 0.6)[0];
    const auto n = encode_input(neg, cfg, 0.6)[0];
    EXPECT_NEAR(p.voltage, 0.3, 1e-15);
    EXPECT_NEAR(p.width, 150e-9, 1e-21);
    EXPECT_NEAR(n.voltage, -0.2, 1e-15);
    EXPECT_NEAR(n.width, 200e-9, 1e-21);
    // Readout stays at the nominal voltage; A only shapes the stress.
    EXPECT_NEAR(p.readout, 0.2, 1e-15);
}

TEST(Encode, InversionFlipsBeforeSignDecision)
{
    auto cfg = PulseConfig::identity(1, 0.2, 1e-7);
    cfg.A[0] = 2.0;
    const std::vector<double> x{-0.5};
    const auto p = encode_input(x, cfg, 0.6, true)[0];
    EXPECT_NEAR(p.voltage, 0.2, 1e-15);
    EXPECT_NEAR(p.readout, 0.1, 1e-15);
}

TEST(Encode, RejectsUnnormalizedOrOverThreshold)
{
    auto cfg = PulseConfig::identity(1, 0.3, 1e-7);
    const std::vector<double> big{1.5};
    EXPECT_THROW(encode_input(big, cfg, 0.6), ValidationError);
    cfg.A[0] = 2.0;
    const std::vector<double> one{1.0};
    EXPECT_THROW(encode_input(one, cfg, 0.6), ValidationError);
    const std::vector<double> two{0.1, 0.2};
    EXPECT_THROW(encode_input(two, cfg, 0.6), ValidationError);
}

TEST(Encode, EveryPulseIsSubthreshold)
{
    auto cfg = PulseConfig::identity(8, 0.25, 1e-7);
    for (std::size_t i = 0; i < 8; ++i) cfg.A[i] = 0.25 + 0.27 * i;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> x(8);
        for (auto& e : x) e = u(rng);
        for (const auto& p : encode_input(x, cfg, 0.6)) ASSERT_LT(std::abs(p.voltage), 0.6);
    }
}

TEST(PulseConfigTest, ValidateChecksBoundsAndThreshold)
{
    auto cfg = PulseConfig::identity(2, 0.25, 1e-7);
    EXPECT_NO_THROW(cfg.validate(0.6));
    cfg.D[1] = 5.0;
    EXPECT_THROW(cfg.validate(0.6), ValidationError);
    cfg.D[1] = 1.0;
    cfg.A[0] = 3.0;
    EXPECT_THROW(cfg.validate(0.6), ValidationError);
    cfg.A[0] = 1.0;
    cfg.inversion_fraction = 1.0;
    EXPECT_THROW(cfg.validate(0.6), ValidationError);
}

TEST(Inversion, ZeroFractionIsIdentity)
{
    Eigen::MatrixXd s = Eigen::MatrixXd::Random(10, 3);
    const auto r = invert_fraction(s, 0.0, 4);
    EXPECT_TRUE(r.mask.empty());
    EXPECT_EQ(r.samples, s);
}

TEST(Inversion, FlipsExactlyTheMaskedRows)
{
    Eigen::MatrixXd s = Eigen::MatrixXd::Random(40, 2);
    const auto r = invert_fraction(s, 0.25, 4);
    ASSERT_EQ(r.mask.size(), 40u);
    EXPECT_EQ(std::accumulate(r.mask.begin(), r.mask.end(), 0), 10);
    for (Eigen::Index i = 0; i < 40; ++i)
        EXPECT_EQ(r.samples.row(i), (r.mask[static_cast<std::size_t>(i)] ? -1.0 : 1.0) * s.row(i));
    EXPECT_EQ(inversion_mask(40, 0.25, 4), r.mask);
    EXPECT_THROW(invert_fraction(s, 1.0, 4), ValidationError);
}

TEST(Distribution, MixtureMassesForSkewedInput)
{
    const InputDistribution d{{-1.0, 1.0}, {0.2, 0.8}};
    const auto m = d.inverted(0.375);
    ASSERT_EQ(m.support.size(), 2u);
    EXPECT_NEAR(m.pmf[1], 0.8 * 0.625 + 0.2 * 0.375, 1e-15);
    EXPECT_NEAR(m.pmf[1], 0.575, 1e-15);
    EXPECT_NEAR(inverted_signed_mean(d, 0.375), 0.25 * 0.6, 1e-15);
    EXPECT_NEAR(m.mean(), inverted_signed_mean(d, 0.375), 1e-15);
}

TEST(Distribution, FromSamplesMergesDuplicates)
{
    const std::vector<double> v{1, 1, 0, -1};
    const auto d = InputDistribution::from_samples(v);
    EXPECT_EQ(d.support, (std::vector<double>{-1, 0, 1}));
    EXPECT_EQ(d.pmf, (std::vector<double>{0.25, 0.25, 0.5}));
    EXPECT_THROW((InputDistribution{{1.0}, {0.5}}).validate(), ValidationError);
}

TEST(ExpectedDrift, PointMassAtZeroIsZero)
{
    const InputDistribution d{{0.0}, {1.0}};
    EXPECT_EQ(expected_drift_rate(d, DeviceParams::tiox(), PulseConfig::identity(1, 0.3, 1e-7), 0.5), 0.0);
}

TEST(ExpectedDrift, SymmetricDeviceCancelsOnSymmetricInput)
{
    auto dev = DeviceParams::tiox();
    dev.k_s_off = -dev.k_s_on;
    dev.alpha_s_off = dev.alpha_s_on;
    const InputDistribution d{{-1.0, -0.5, 0.5, 1.0}, {0.25, 0.25, 0.25, 0.25}};
    EXPECT_NEAR(expected_drift_rate(d, dev, PulseConfig::identity(1, 0.3, 1e-7), 0.5), 0.0, 1e-22);
}

TEST(ExpectedDrift, EnumeratesTwoPointSupport)
{
    const InputDistribution d{{-1.0, 1.0}, {0.5, 0.5}};
    const double up = 1.126e-7 * std::pow(0.3 / 0.6, 5);
    const double down = -8.445e-6 * std::pow(-0.3 / -0.6, 6);
    EXPECT_NEAR(expected_drift_rate(d, DeviceParams::tiox(), PulseConfig::identity(1, 0.3, 1e-7), 0.5),
                0.5 * up + 0.5 * down, 1e-22);
}

TEST(ExpectedDrift, HalfInversionCancelsOddRate)
{
    auto dev = DeviceParams::tiox();
    dev.k_s_off = -dev.k_s_on;
    dev.alpha_s_off = dev.alpha_s_on;
    auto cfg = PulseConfig::identity(1, 0.3, 1e-7);
    cfg.inversion_fraction = 0.5;
    const InputDistribution d{{0.25, 1.0}, {0.5, 0.5}};
    EXPECT_NEAR(expected_drift_rate(d, dev, cfg, 0.5), 0.0, 1e-22);
}

TEST(ExpectedDrift, MonotoneInInversionForOneSignedInput)
{
    const InputDistribution d{{0.5, 1.0}, {0.3, 0.7}};
    auto cfg = PulseConfig::identity(1, 0.3, 1e-7);
    double prev = std::numeric_limits<double>::infinity();
    bool crossed = false;
    for (int k = 0; k <= 50; ++k) {
        cfg.inversion_fraction = 0.01 * k;
        const double r = expected_drift_rate(d, DeviceParams::tiox(), cfg, 0.5);
        ASSERT_LT(r, prev);
        crossed |= r < 0.0;
        prev = r;
    }
    EXPECT_TRUE(crossed);
}
