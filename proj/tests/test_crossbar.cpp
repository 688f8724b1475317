#include "aidx/crossbar.hpp"
#include "aidx/error.hpp"
#include "aidx/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace aidx;

namespace {

CrossbarConfig ideal()
{
    CrossbarConfig c;
    c.policy = ExecPolicy::serial;
    return c;
}

Eigen::MatrixXd random_weights(Eigen::Index r, Eigen::Index c, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd w(r, c);
    for (auto& x : w.reshaped()) x = u(rng);
    return w;
}

} // namespace

TEST(Crossbar, OhmsLawSingleCell)
{
    CrossbarArray x(1, 1, ideal());
    x.set_conductance(0, 0, 0.0052);
    const double v = 0.2;
    const auto i = x.column_currents(std::span<const double>(&v, 1));
    EXPECT_NEAR(i[0], 1.04e-3, 1e-15);
}

TEST(Crossbar, CurrentsMatchDenseProduct)
{
    CrossbarArray x(4, 4, ideal());
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> g(2e-4, 5e-3), vv(-0.3, 0.3);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) x.set_conductance(i, j, g(rng));
    std::vector<double> v(4);
    for (auto& e : v) e = vv(rng);
    const auto i = x.column_currents(v);
    const Eigen::VectorXd ref = x.conductance_matrix().transpose() * Eigen::Map<Eigen::VectorXd>(v.data(), 4);
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(i[static_cast<std::size_t>(j)], ref(j), 1e-12 * std::abs(ref(j)) + 1e-18);
}

TEST(Crossbar, CurrentsAreLinearInVoltage)
{
    CrossbarArray x(3, 2, ideal());
    const std::vector<double> a{0.1, -0.2, 0.05}, b{-0.05, 0.02, 0.3};
    std::vector<double> s(3);
    for (int i = 0; i < 3; ++i) s[i] = 2.0 * a[i] + b[i];
    const auto ia = x.column_currents(a), ib = x.column_currents(b), is = x.column_currents(s);
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(is[j], 2.0 * ia[j] + ib[j], 1e-15);
}

TEST(Crossbar, SetConductanceRejectsOutOfRange)
{
    CrossbarArray x(1, 1, ideal());
    EXPECT_THROW(x.set_conductance(0, 0, 1.0), ValidationError);
    EXPECT_THROW(x.set_conductance(0, 0, 1e-9), ValidationError);
}

TEST(Crossbar, LineResistanceReducesDistantCells)
{
    auto cfg = ideal();
    cfg.line_resistance = 2.0;
    CrossbarArray x(3, 3, cfg);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) x.set_conductance(i, j, 0.004);
    EXPECT_NEAR(x.effective_conductance(0, 0), 0.004 / (1 + 0.004 * 2.0 * 2), 1e-15);
    EXPECT_LT(x.effective_conductance(2, 2), x.effective_conductance(0, 0));
}

TEST(Mapping, ZeroWeightLeavesBothDevicesAtGmin)
{
    Eigen::MatrixXd w(2, 1);
    w << 0.0, 1.0;
    const auto m = program_weights(DifferentialWeightMap::interleaved(w, false), DeviceParams::tiox(), ideal());
    EXPECT_NEAR(m.array.conductance(0, 0), 2e-4, 1e-15);
    EXPECT_NEAR(m.array.conductance(0, 1), 2e-4, 1e-15);
    EXPECT_NEAR(m.array.conductance(1, 0), 5.2e-3, 1e-15);
    EXPECT_NEAR(m.array.conductance(1, 1), 2e-4, 1e-15);
    EXPECT_NEAR(m.decoded_weights()(0, 0), 0.0, 1e-15);
}

TEST(Mapping, NegativeWeightUsesNegativeColumn)
{
    Eigen::MatrixXd w(1, 1);
    w << -2.0;
    const auto m = program_weights(DifferentialWeightMap::interleaved(w, false), DeviceParams::tiox(), ideal());
    EXPECT_NEAR(m.array.conductance(0, 0), 2e-4, 1e-15);
    EXPECT_NEAR(m.array.conductance(0, 1), 5.2e-3, 1e-15);
}

TEST(Mapping, BiasRowSitsAtHighConductance)
{
    Eigen::MatrixXd w(2, 2);
    w << 1.0, -1.0, 0.5, -0.25;
    const auto m = program_weights(DifferentialWeightMap::interleaved(w, true), DeviceParams::tiox(), ideal());
    EXPECT_NEAR(m.array.conductance(1, 0), 5.2e-3, 1e-15);
    EXPECT_NEAR(m.array.conductance(1, 3), 5.2e-3, 1e-15);
    EXPECT_GT(m.array.conductance(1, 1), 2e-3);
    EXPECT_NEAR((m.decoded_weights() - w).cwiseAbs().maxCoeff(), 0.0, 1e-9);
}

TEST(Mapping, RoundTripRandomWeights)
{
    const auto w = random_weights(4, 4, 5);
    const auto m = program_weights(DifferentialWeightMap::interleaved(w, false), DeviceParams::tiox(), ideal());
    EXPECT_LE((m.decoded_weights() - w).cwiseAbs().maxCoeff(), 1e-6 * w.cwiseAbs().maxCoeff());
}

TEST(Mapping, DecodeComputesWeightedSum)
{
    const auto w = random_weights(5, 3, 6);
    const auto m = program_weights(DifferentialWeightMap::interleaved(w, true), DeviceParams::tiox(), ideal());
    const std::vector<double> x{0.3, -0.7, 0.1, 0.9, 1.0};
    std::vector<double> v(5);
    for (int i = 0; i < 5; ++i) v[i] = 0.2 * x[i];
    const auto y = m.decode(v, 0.2);
    const Eigen::VectorXd ref = w.transpose() * Eigen::Map<const Eigen::VectorXd>(x.data(), 5);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(y[j], ref(j), 1e-9);
}

TEST(Mapping, VariationIsSeededPerCell)
{
    const auto w = random_weights(3, 2, 7);
    ProgramOptions po;
    po.seed = 4;
    const auto a = program_weights(DifferentialWeightMap::interleaved(w, false), DeviceParams::tiox(), ideal(), po);
    const auto b = program_weights(DifferentialWeightMap::interleaved(w, false), DeviceParams::tiox(), ideal(), po);
    EXPECT_EQ(a.array.cell(1, 1).params, b.array.cell(1, 1).params);
    EXPECT_NE(a.array.cell(1, 1).params, a.array.cell(0, 1).params);
}

TEST(Vmm, ZeroInputGivesNoCurrentAndNoDrift)
{
    const auto w = random_weights(3, 2, 8);
    auto m = program_weights(DifferentialWeightMap::interleaved(w, false), DeviceParams::tiox(), ideal());
    const auto ref = m.array;
    const std::vector<RowPulse> p(3, RowPulse{0.0, 1.0, 0.0});
    const auto r = vmm_read(m, p, 0.2);
    for (double i : r.currents) EXPECT_EQ(i, 0.0);
    EXPECT_EQ(accumulated_drift(m.array, ref).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Vmm, SamplesCurrentBeforeDrifting)
{
    CrossbarArray arr(1, 1, ideal());
    arr.set_conductance(0, 0, 0.0052);
    MappedCrossbar m{arr, DifferentialWeightMap{}, 1.0};
    m.map.weights = Eigen::MatrixXd::Zero(1, 0);
    const RowPulse p{0.2, 1e4, 0.2};
    const auto r = vmm_read(m, std::span<const RowPulse>(&p, 1), 0.2);
    EXPECT_NEAR(r.currents[0], 1.04e-3, 1e-15);
    EXPECT_GT(m.array.conductance(0, 0), 0.0);
    EXPECT_NE(m.array.conductance(0, 0), 0.0052);
}

TEST(Vmm, RejectsOverThresholdPulses)
{
    auto m = program_weights(DifferentialWeightMap::interleaved(random_weights(2, 1, 9), false), DeviceParams::tiox(),
                             ideal());
    const std::vector<RowPulse> p{{0.6, 1e-6, 0.6}, {0.0, 1e-6, 0.0}};
    EXPECT_THROW(vmm_read(m, p, 0.2), ValidationError);
    const std::vector<RowPulse> short_p{{0.1, 1e-6, 0.1}};
    EXPECT_THROW(vmm_read(m, short_p, 0.2), ValidationError);
}

TEST(Drift, IdenticalReadsAccumulateLinearly)
{
    const auto w = random_weights(3, 2, 10);
    auto once = program_weights(DifferentialWeightMap::interleaved(w, false), DeviceParams::tiox(), ideal());
    auto many = once;
    const auto ref = once.array;
    const std::vector<RowPulse> p{{0.3, 10.0, 0.3}, {-0.2, 10.0, -0.2}, {0.1, 10.0, 0.1}};
    vmm_read(once, p, 0.3);
    const int k = 50;
    for (int r = 0; r < k; ++r) vmm_read(many, p, 0.3);
    // Rectangular window: state moves linearly, so dw after k reads is k dw_1.
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            const double dw1 = once.array.cell(i, j).w - ref.cell(i, j).w;
            const double dwk = many.array.cell(i, j).w - ref.cell(i, j).w;
            EXPECT_NEAR(dwk, k * dw1, 1e-12 * std::abs(k * dw1) + 1e-18);
        }
}

TEST(Drift, MixedHistoryTelescopes)
{
    const auto w = random_weights(2, 2, 11);
    auto m = program_weights(DifferentialWeightMap::interleaved(w, false), DeviceParams::tiox(), ideal());
    const auto ref = m.array;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2, 4);
    for (int r = 0; r < 100; ++r) {
        const auto before = m.array;
        const std::vector<RowPulse> p{{u(rng), 5.0, 0.0}, {u(rng), 5.0, 0.0}};
        vmm_read(m, p, 0.3);
        sum += accumulated_drift(m.array, before);
    }
    EXPECT_LE((accumulated_drift(m.array, ref) - sum).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Drift, PositiveInputsGiveMonotoneColumnError)
{
    Eigen::MatrixXd w(4, 1);
    w << 0.3, 0.8, 0.1, 0.5;
    auto m = program_weights(DifferentialWeightMap::interleaved(w, false), DeviceParams::tiox(), ideal());
    const std::vector<double> v(4, 0.25);
    const auto i0 = m.array.column_currents(v)[0];
    const std::vector<RowPulse> p(4, RowPulse{0.25, 100.0, 0.25});
    double last = 0.0;
    for (int r = 0; r < 200; ++r) {
        vmm_read(m, p, 0.25);
        const double err = std::abs(m.array.column_currents(v)[0] - i0);
        ASSERT_GE(err, last);
        last = err;
    }
    EXPECT_GT(last, 0.0);
}

TEST(Drift, ShapeMismatchIsRejected)
{
    CrossbarArray a(2, 2, ideal()), b(2, 3, ideal());
    EXPECT_THROW(accumulated_drift(a, b), ValidationError);
}

TEST(Kernels, OpenMpMatchesSerialBitForBit)
{
    const std::size_t n = 96;
    std::vector<MemristorState> a(n * n);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0), v(-0.5, 0.5);
    for (auto& c : a) {
        c.w = u(rng);
        c.params = sample_variation(DeviceParams::tiox(), rng(), {});
    }
    auto b = a;
    std::vector<RowPulse> p(n);
    std::vector<double> volts(n);
    for (std::size_t i = 0; i < n; ++i) {
        volts[i] = v(rng);
        p[i] = {volts[i], 1e3, volts[i]};
    }
    kernels::drift_serial(a, n, n, p, 1e-3);
    kernels::drift_omp(b, n, n, p, 1e-3);
    for (std::size_t k = 0; k < a.size(); ++k) ASSERT_EQ(a[k].w, b[k].w);
    std::vector<double> ia(n), ib(n);
    kernels::currents_serial(a, n, n, 0.7, volts, ia);
    kernels::currents_omp(a, n, n, 0.7, volts, ib);
    for (std::size_t j = 0; j < n; ++j) ASSERT_EQ(ia[j], ib[j]);
}
