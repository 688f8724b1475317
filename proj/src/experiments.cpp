#include "aidx/experiments.hpp"

#include "aidx/error.hpp"
#include "aidx/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace aidx {

PulseConfig base_pulse(const RunConfig& cfg, std::size_t rows)
{
    PulseConfig p = PulseConfig::identity(rows, cfg.base_amplitude_v, cfg.base_width_s);
    p.bounds = cfg.bounds;
    p.scalar = cfg.preprocess.ratio_mode == RatioMode::scalar;
    return p;
}

std::vector<PulseConfig> identity_configs(const Network& net, const RunConfig& cfg)
{
    std::vector<PulseConfig> out;
    for (const auto& l : net.layers) out.push_back(base_pulse(cfg, l.inputs() + 1));
    return out;
}

PreprocessResult optimize_workload(const Workload& w, const RunConfig& cfg, std::size_t samples)
{
    RunConfig c = cfg;
    c.sync();
    const auto layers = layer_workloads(w.net, w.task.stream, samples);
    auto obj = c.objective;
    obj.stream_seed = c.seed;
    auto pre = c.preprocess;
    pre.seed = mix_seed(c.seed, 0xa1d);
    return aidx_preprocess(layers, c.device, base_pulse(c, 1), obj, pre);
}

BenchmarkResult run_benchmark(const Workload& w, const RunConfig& cfg, const std::vector<PulseConfig>& aidx_cfgs,
                              const std::vector<std::uint64_t>& seeds)
{
    require(!seeds.empty(), "benchmark needs at least one seed");
    RunConfig c = cfg;
    c.sync();
    const auto base = identity_configs(w.net, c);
    require(aidx_cfgs.size() == base.size(), "benchmark: one pulse config per layer required");

    const auto n = seeds.size();
    BenchmarkResult r;
    r.baseline.resize(n);
    r.aidx.resize(n);
    MappedNetwork first_base, first_aidx;
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < static_cast<long>(2 * n); ++k) {
        const auto s = static_cast<std::size_t>(k / 2);
        const bool is_aidx = k % 2 == 1;
        MappedNetwork final_state;
        auto m = run_trajectory(w.net, c.device, w.task, is_aidx ? aidx_cfgs : base, c.trajectory,
                                mix_seed(seeds[s], 0xbe7c), s == 0 ? &final_state : nullptr);
        m.seed = seeds[s];
        (is_aidx ? r.aidx : r.baseline)[s] = std::move(m);
        if (s == 0) (is_aidx ? first_aidx : first_base) = std::move(final_state);
    }
    r.baseline_mean = average(r.baseline, c.trajectory, w.task.kind);
    r.aidx_mean = average(r.aidx, c.trajectory, w.task.kind);
    if (w.task.kind == TaskKind::classification && r.baseline_mean.lifetime_ops > 0)
        r.lifetime_ratio = static_cast<double>(r.aidx_mean.lifetime_ops) / static_cast<double>(r.baseline_mean.lifetime_ops);

    ProgramOptions po;
    po.variation = c.variation;
    po.seed = mix_seed(seeds.front(), 0xbe7c);
    const auto programmed = map_network(w.net, c.device, c.crossbar, po);
    r.g_programmed = programmed.front().crossbar.array.conductance_matrix();
    r.dg_baseline = accumulated_drift(first_base.front().crossbar.array, programmed.front().crossbar.array);
    r.dg_aidx = accumulated_drift(first_aidx.front().crossbar.array, programmed.front().crossbar.array);
    return r;
}

void write_benchmark_csv(std::ostream& os, const BenchmarkResult& r, std::uint64_t seed)
{
    write_csv_preamble(os, seed, "benchmark");
    os << "op_count,metric,seed,variant\n";
    os.precision(12);
    auto dump = [&](const std::vector<TrajectoryMetrics>& runs, const char* variant) {
        for (const auto& m : runs)
            for (std::size_t c = 0; c < m.op_counts.size(); ++c)
                os << m.op_counts[c] << ',' << m.metric[c] << ',' << m.seed << ',' << variant << '\n';
    };
    dump(r.baseline, "baseline");
    dump(r.aidx, "aidx");
}

Json benchmark_summary(const BenchmarkResult& r, TaskKind kind)
{
    Json j{{"task", to_string(kind)},
           {"op_counts", r.baseline_mean.op_counts},
           {"baseline_mean", r.baseline_mean.metric},
           {"aidx_mean", r.aidx_mean.metric},
           {"seeds", r.baseline.size()}};
    const double b0 = r.baseline_mean.metric.front(), bk = r.baseline_mean.metric.back();
    const double ak = r.aidx_mean.metric.back();
    if (kind == TaskKind::classification) {
        j["baseline_loss"] = b0 - bk;
        j["aidx_loss"] = r.aidx_mean.metric.front() - ak;
        j["recovery"] = b0 - bk > 0.0 ? (ak - bk) / (b0 - bk) : 0.0;
        j["baseline_lifetime_ops"] = r.baseline_mean.lifetime_ops;
        j["baseline_lifetime_censored"] = r.baseline_mean.lifetime_censored;
        j["aidx_lifetime_ops"] = r.aidx_mean.lifetime_ops;
        j["aidx_lifetime_censored"] = r.aidx_mean.lifetime_censored;
        j["lifetime_ratio"] = r.lifetime_ratio;
    } else {
        const double binc = bk - b0, ainc = ak - r.aidx_mean.metric.front();
        j["baseline_mse_increase"] = binc;
        j["aidx_mse_increase"] = ainc;
        j["reduction"] = binc > 0.0 ? 1.0 - ainc / binc : 0.0;
    }
    return j;
}

std::pair<double, double> balance_ratios(std::span<const DeviceParams> devices, double p_positive,
                                         double base_amplitude_v, const RatioBounds& bounds, double w)
{
    require(!devices.empty(), "balance_ratios: no devices");
    require(p_positive >= 0.0 && p_positive <= 1.0, "p_positive must be in [0, 1]");
    const InputDistribution dist{{-1.0, 1.0}, {1.0 - p_positive, p_positive}};
    PulseConfig cfg = PulseConfig::identity(1, base_amplitude_v, 1.0);
    cfg.bounds = bounds;
    auto rate = [&](double a, double d) {
        cfg.A[0] = a;
        cfg.D[0] = d;
        double s = 0.0;
        for (const auto& dev : devices) s += expected_drift_rate(dist, dev, cfg, w);
        return std::abs(s / static_cast<double>(devices.size()));
    };
    const double r0 = rate(1.0, 1.0);
    if (r0 == 0.0) return {1.0, 1.0};
    double limit = std::numeric_limits<double>::infinity();
    for (const auto& dev : devices) limit = std::min({limit, -dev.v_on, dev.v_off});
    const double a_hi = std::min(bounds.max, 0.999 * limit / base_amplitude_v);
    const auto a = opt::golden_section([&](double x) { return rate(x, 1.0); }, bounds.min, a_hi, 1e-10);
    if (a.f <= 1e-9 * r0) return {a.x, 1.0};
    const auto d = opt::golden_section([&](double x) { return rate(a.x, x); }, bounds.min, bounds.max, 1e-10);
    return {a.x, d.x};
}

DriftDemoResult run_drift_demo(const DriftDemoOptions& opt)
{
    opt.device.validate();
    require(opt.devices_per_group >= 1 && opt.pulses >= 1 && opt.record_every >= 1, "drift demo: sizes must be >= 1");
    require(opt.g0 >= 1.0 / opt.device.r_off && opt.g0 <= 1.0 / opt.device.r_on, "drift demo: g0 outside device range");
    const double limit = std::min(-opt.device.v_on, opt.device.v_off);
    require(opt.base_amplitude_v > 0.0 && opt.base_amplitude_v < limit, "drift demo: base amplitude must be sub-threshold");

    DriftDemoResult r;
    for (long k = 0; k <= opt.pulses; k += opt.record_every) r.ops.push_back(k);
    if (r.ops.back() != opt.pulses) r.ops.push_back(opt.pulses);

    const double w0 = state_for_conductance(opt.device, opt.g0);
    for (int g = 0; g < 2; ++g) {
        DriftDemoGroup grp;
        grp.p_positive = g == 0 ? opt.p_positive : 1.0 - opt.p_positive;
        std::mt19937_64 rng(mix_seed(opt.seed, static_cast<std::uint64_t>(g), 0xde40));
        std::bernoulli_distribution pos(grp.p_positive);
        std::vector<std::uint8_t> seq(static_cast<std::size_t>(opt.pulses));
        for (auto& s : seq) s = pos(rng) ? 1 : 0;

        std::vector<DeviceParams> devs;
        for (std::size_t d = 0; d < opt.devices_per_group; ++d)
            devs.push_back(opt.variation.scale > 0.0
                               ? sample_variation(opt.device, mix_seed(opt.seed, static_cast<std::uint64_t>(g), d),
                                                  opt.variation)
                               : opt.device);
        std::tie(grp.A, grp.D) = balance_ratios(devs, grp.p_positive, opt.base_amplitude_v, opt.bounds, w0);

        for (int variant = 0; variant < 2; ++variant) {
            const double A = variant ? grp.A : 1.0, D = variant ? grp.D : 1.0;
            std::vector<double> w(devs.size(), w0);
            auto& series = variant ? grp.mean_g_aidx : grp.mean_g_baseline;
            auto record = [&] {
                double s = 0.0;
                for (std::size_t d = 0; d < devs.size(); ++d) s += conductance_at(devs[d], w[d]);
                series.push_back(s / static_cast<double>(devs.size()));
            };
            record();
            std::size_t next = 1;
            for (long k = 1; k <= opt.pulses; ++k) {
                const bool p = seq[static_cast<std::size_t>(k - 1)] != 0;
                const double v = p ? opt.base_amplitude_v * A : -opt.base_amplitude_v;
                const double dt = p ? opt.base_width_s * D : opt.base_width_s;
                for (std::size_t d = 0; d < devs.size(); ++d) advance_state(w[d], devs[d], v, dt, 1e-3);
                if (next < r.ops.size() && k == r.ops[next]) {
                    record();
                    ++next;
                }
            }
        }
        r.groups.push_back(std::move(grp));
    }
    return r;
}

void write_drift_demo_csv(std::ostream& os, const DriftDemoResult& r, std::uint64_t seed)
{
    write_csv_preamble(os, seed, "drift_demo");
    os << "op_count,group,variant,mean_g_s\n";
    os.precision(12);
    for (std::size_t g = 0; g < r.groups.size(); ++g) {
        const auto& grp = r.groups[g];
        const char* name = g == 0 ? "positive_skew" : "negative_skew";
        for (std::size_t k = 0; k < r.ops.size(); ++k)
            os << r.ops[k] << ',' << name << ",baseline," << grp.mean_g_baseline[k] << '\n';
        for (std::size_t k = 0; k < r.ops.size(); ++k)
            os << r.ops[k] << ',' << name << ",aidx," << grp.mean_g_aidx[k] << '\n';
    }
}

} // namespace aidx
