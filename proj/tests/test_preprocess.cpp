#include "aidx/error.hpp"
#include "aidx/preprocess.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace aidx;

namespace {

LayerWorkload workload(bool positive_only, unsigned seed = 8)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd w(4, 2);
    for (auto& e : w.reshaped()) e = u(rng);
    LayerWorkload lw{DifferentialWeightMap::interleaved(w, false), Eigen::MatrixXd(24, 4), {}};
    for (auto& e : lw.inputs.reshaped()) e = positive_only ? 0.2 + 0.8 * std::abs(u(rng)) : u(rng);
    return lw;
}

DriftObjectiveOptions options()
{
    DriftObjectiveOptions o;
    o.horizon_k = 30;
    o.trial_seeds = {1, 2};
    o.eval_samples = 12;
    o.crossbar.g_min = 8e-5;
    o.crossbar.g_max = 3e-4;
    return o;
}

PulseConfig base(std::size_t rows, double width)
{
    PulseConfig c = PulseConfig::identity(rows, 0.25, width);
    c.bounds = {0.5, 2.0};
    return c;
}

PreprocessOptions fast()
{
    PreprocessOptions p;
    p.bfgs.max_iter = 15;
    p.inversion.variation_samples = 4;
    return p;
}

} // namespace

TEST(Preprocess, DriftFreeDeviceKeepsIdentity)
{
    DriftObjective obj(workload(false), DeviceParams::drift_free(), options());
    LayerReport rep;
    const auto cfg = optimize_layer(obj, base(4, 1e3), fast(), rep);
    EXPECT_TRUE(cfg.is_identity());
    EXPECT_EQ(rep.selected, "identity");
    EXPECT_EQ(rep.identity_e_drift, 0.0);
}

TEST(Preprocess, SelectionNeverWorseThanIdentityAndInBounds)
{
    for (auto mode : {RatioMode::per_row, RatioMode::scalar}) {
        DriftObjective obj(workload(false), DeviceParams::tiox(), options());
        auto p = fast();
        p.ratio_mode = mode;
        LayerReport rep;
        const auto cfg = optimize_layer(obj, base(4, 300.0), p, rep);
        EXPECT_TRUE(cfg.within_bounds());
        EXPECT_NEAR(rep.normalization * std::abs(rep.identity_e_drift), 1.0, 1e-12);
        EXPECT_LE(rep.selected_objective, obj.evaluate(base(4, 300.0)) + 1e-15) << to_string(mode);
        EXPECT_NEAR(obj.evaluate(cfg), rep.selected_objective, 1e-12);
    }
}

TEST(Preprocess, OneSidedInputsTriggerInversion)
{
    // Positive-only inputs drive every device one way; the unconstrained
    // optimum shrinks the pulse width below the hardware floor.
    DriftObjective obj(workload(true), DeviceParams::tiox(), options());
    LayerReport rep;
    const auto cfg = optimize_layer(obj, base(4, 3e3), fast(), rep);
    ASSERT_FALSE(rep.scenarios.empty());
    EXPECT_TRUE(rep.inversion_triggered);
    EXPECT_GT(rep.inversion.a, 0.0);
    EXPECT_LT(rep.inversion.objective, rep.inversion.objective_at_zero);
    EXPECT_FALSE(rep.scenarios_after_inversion.empty());
    EXPECT_TRUE(cfg.within_bounds());
}

TEST(Preprocess, InversionBalancesOpposingRates)
{
    // With only positive inputs of one value, the balancing fraction a*
    // solves (1 - a) r_off = a |r_on| for the per-direction rates.
    const DeviceParams d = DeviceParams::tiox();
    InputDistribution dist{{0.8}, {1.0}};
    PulseConfig cfg = PulseConfig::identity(1, 0.25, 1.0);
    const double up = state_rate(d, 0.5, 0.2);
    const double down = -state_rate(d, 0.5, -0.2);
    const double expect = up / (up + down);
    InversionOptions o;
    o.variation_samples = 0;
    o.tol = 1e-9;
    const auto r = optimize_inversion(std::span(&dist, 1), d, cfg, o);
    EXPECT_NEAR(r.a, expect, 1e-6);
    EXPECT_NEAR(r.objective, 0.0, 1e-6 * up);
}

TEST(Preprocess, SymmetricInputsNeedNoInversion)
{
    InputDistribution dist{{-0.5, 0.5}, {0.5, 0.5}};
    DeviceParams d = DeviceParams::tiox();
    d.k_s_on = -d.k_s_off;
    d.alpha_s_on = d.alpha_s_off;
    InversionOptions o;
    o.variation_samples = 0;
    const auto r = optimize_inversion(std::span(&dist, 1), d, PulseConfig::identity(1, 0.25, 1.0), o);
    EXPECT_EQ(r.a, 0.0);
}

TEST(Preprocess, StrongerRegularizationShrinksRatios)
{
    double last = std::numeric_limits<double>::infinity();
    for (double lambda : {0.0, 1e-3, 1e-1, 1.0}) {
        auto o = options();
        o.lambda1 = o.lambda2 = lambda;
        DriftObjective obj(workload(false), DeviceParams::tiox(), o);
        auto p = fast();
        p.optimize_amplitude = false;
        LayerReport rep;
        const auto cfg = optimize_layer(obj, base(4, 300.0), p, rep);
        const double energy = ratio_energy(cfg);
        EXPECT_LE(energy, last + 1e-6) << "lambda " << lambda;
        last = energy;
    }
}

TEST(Preprocess, DeterministicForFixedSeeds)
{
    auto run = [] {
        std::vector<LayerWorkload> layers{workload(false), workload(true, 9)};
        return aidx_preprocess(layers, DeviceParams::tiox(), base(4, 300.0), options(), fast());
    };
    const auto a = run(), b = run();
    ASSERT_EQ(a.configs.size(), 2u);
    for (std::size_t l = 0; l < 2; ++l) {
        EXPECT_EQ(a.configs[l].A, b.configs[l].A);
        EXPECT_EQ(a.configs[l].D, b.configs[l].D);
        EXPECT_EQ(a.configs[l].inversion_mask, b.configs[l].inversion_mask);
        EXPECT_EQ(a.reports[l].selected, b.reports[l].selected);
    }
}

TEST(Preprocess, RatioModeNamesRoundTrip)
{
    for (auto m : {RatioMode::per_row, RatioMode::scalar}) EXPECT_EQ(parse_ratio_mode(to_string(m)), m);
    EXPECT_THROW(parse_ratio_mode("rows"), ValidationError);
}
