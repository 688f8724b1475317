#pragma once

#include "aidx/device.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace aidx {

struct IvSample {
    double voltage = 0.0;   ///< V
    double current = 0.0;   ///< A, read at the start of the dwell
    double dwell = 0.0;     ///< s the bias is held after the read
};

/// Triangular sweep 0 -> +v_max -> 0 -> -v_max -> 0, skipping 0 V. Dwell
/// times are long so that the slow sub-threshold branches move the state
/// measurably within one sweep. The hold at |v| is the branch dwell times
/// (v_max / |v|)^dwell_power, capped at dwell_cap times the branch dwell,
/// so low-bias points still move the state and the exponents are identifiable.
struct SweepOptions {
    double v_max = 0.55;
    std::size_t points_per_leg = 40;   ///< per half branch; each branch has 2*points-1
    double dwell_reset_s = 1.4e5;
    double dwell_set_s = 3.5e3;
    double dwell_power = 5.0;
    double dwell_cap = 1.0e4;
    double w0 = 0.15;   ///< low start leaves room for the RESET leg
    double noise = 0.0;                ///< relative Gaussian current noise
    std::uint64_t seed = 1;
};

std::vector<IvSample> generate_sweep(const DeviceParams& device, const SweepOptions& opt);

/// Replays a sweep through the device model from state w0.
std::vector<double> simulate_sweep(const DeviceParams& device, double w0, const std::vector<IvSample>& protocol);

struct FitOptions {
    double temperature_decay = 0.95;
    int temperatures = 200;
    int proposals = 20;
    int chains = 4;
    double log10_k_min = -14.0;
    double log10_k_max = -2.0;
    int alpha_min = 1;
    int alpha_max = 10;
    std::uint64_t seed = 1;
};

struct FitReport {
    DeviceParams params;
    double w0 = 0.0;
    double anneal_objective = 0.0;
    double final_objective = 0.0;
    bool set_branch_zeroed = false;
    bool reset_branch_zeroed = false;
    long evaluations = 0;
};

/// Mean squared log-current error of a candidate over the sweep.
double sweep_objective(const DeviceParams& device, double w0, const std::vector<IvSample>& data);

/// Fits k_s_on, alpha_s_on, k_s_off, alpha_s_off (and the unknown start
/// state) to sweep data; thresholds and resistances come from `base`.
FitReport fit_subthreshold(const std::vector<IvSample>& data, const DeviceParams& base, const FitOptions& opt = {});

/// voltage_v,current_a,dwell_s with '#' comment lines allowed.
std::vector<IvSample> read_iv_csv(const std::filesystem::path& path);
void write_iv_csv(std::ostream& os, const std::vector<IvSample>& data);

} // namespace aidx
