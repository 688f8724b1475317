#pragma once

#include "aidx/io.hpp"
#include "aidx/network.hpp"
#include "aidx/preprocess.hpp"
#include "aidx/workload.hpp"

#include <iosfwd>
#include <string>
#include <span>
#include <vector>

namespace aidx {

/// Base pulse config shared by every layer of a run.
PulseConfig base_pulse(const RunConfig& cfg, std::size_t rows);
std::vector<PulseConfig> identity_configs(const Network& net, const RunConfig& cfg);

/// aidx_preprocess over the workload's layers. `samples` caps the number of
/// stream rows used to build each layer's crossbar workload.
PreprocessResult optimize_workload(const Workload& w, const RunConfig& cfg, std::size_t samples = 256);

struct BenchmarkResult {
    std::vector<TrajectoryMetrics> baseline;
    std::vector<TrajectoryMetrics> aidx;
    TrajectoryMetrics baseline_mean;
    TrajectoryMetrics aidx_mean;
    /// aidx lifetime / baseline lifetime on the seed-averaged series; a lower
    /// bound when the aidx series never crosses the threshold.
    double lifetime_ratio = 1.0;
    /// First layer of the first seed, conductance change after the last op.
    Eigen::MatrixXd dg_baseline, dg_aidx, g_programmed;
};

/// Paired trajectories: identity pulses vs `aidx_cfgs`, one mapping seed per
/// entry of `seeds`, run in parallel.
BenchmarkResult run_benchmark(const Workload& w, const RunConfig& cfg, const std::vector<PulseConfig>& aidx_cfgs,
                              const std::vector<std::uint64_t>& seeds);

/// op_count,metric,seed,variant
void write_benchmark_csv(std::ostream& os, const BenchmarkResult& r, std::uint64_t seed);
Json benchmark_summary(const BenchmarkResult& r, TaskKind kind);

/// Two groups of devices programmed to the same conductance, driven by
/// pre-generated random pulse sequences skewed towards positive or negative
/// inputs, with and without per-group balancing ratios.
struct DriftDemoOptions {
    DeviceParams device = DeviceParams::tiox();
    VariationModel variation{};
    std::size_t devices_per_group = 32;
    long pulses = 10000;
    long record_every = 100;
    double g0 = 0.0052;
    double p_positive = 0.8;   ///< the other group uses 1 - p_positive
    double base_amplitude_v = 0.25;
    double base_width_s = 10.0;
    RatioBounds bounds{};
    std::uint64_t seed = 1;
};

struct DriftDemoGroup {
    double p_positive = 0.0;
    double A = 1.0, D = 1.0;
    std::vector<double> mean_g_baseline;
    std::vector<double> mean_g_aidx;
};

struct DriftDemoResult {
    std::vector<long> ops;
    std::vector<DriftDemoGroup> groups;
};

/// Amplitude then width ratio that zero the population-mean expected state
/// rate of `devices` for a two-point {+1, -1} input, within bounds.
std::pair<double, double> balance_ratios(std::span<const DeviceParams> devices, double p_positive,
                                         double base_amplitude_v, const RatioBounds& bounds, double w = 0.5);

DriftDemoResult run_drift_demo(const DriftDemoOptions& opt);
/// op_count,group,variant,mean_g_s
void write_drift_demo_csv(std::ostream& os, const DriftDemoResult& r, std::uint64_t seed);

} // namespace aidx
