#pragma once

#include "aidx/objective.hpp"
#include "aidx/optimizer.hpp"
#include "aidx/signal.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace aidx {

struct InversionOptions {
    std::size_t variation_samples = 16;   ///< sampled devices per row; 0 = nominal only
    VariationModel variation{};
    std::uint64_t seed = 11;
    double tol = 1e-3;
    double w = 0.5;                        ///< state at which windows are evaluated
};

struct InversionSearch {
    double a = 0.0;
    double objective = 0.0;        ///< aggregate |E[dw/dt]| at a
    double objective_at_zero = 0.0;
    int evals = 0;
};

/// Mean over rows and sampled devices of |E[dw/dt]| with a proportion a of
/// inputs inverted.
double inversion_objective(std::span<const InputDistribution> rows, std::span<const DeviceParams> devices,
                           const PulseConfig& cfg, double a, double w = 0.5);

/// Golden-section search of inversion_objective over a in [0, 0.5]. Returns
/// a = 0 when inverting does not help.
InversionSearch optimize_inversion(std::span<const InputDistribution> rows, const DeviceParams& device,
                                   const PulseConfig& cfg, const InversionOptions& opt = {});

enum class RatioMode { per_row, scalar };

std::string to_string(RatioMode m);
RatioMode parse_ratio_mode(const std::string& text);

struct PreprocessOptions {
    RatioMode ratio_mode = RatioMode::per_row;
    bool optimize_amplitude = true;
    bool optimize_width = true;
    opt::BfgsOptions bfgs{1e-6, 60};
    double tie_eps = 1e-12;
    InversionOptions inversion{};
    std::uint64_t seed = 3;
};

struct ScenarioReport {
    std::string name;
    double objective = 0.0;
    bool in_bounds = true;
    std::vector<double> A, D;
    std::string status;
    int iterations = 0;
    long evals = 0;
};

struct LayerReport {
    std::size_t layer = 0;
    double identity_e_drift = 0.0;      ///< raw E_k - E_0 with A = D = 1
    double normalization = 1.0;
    std::vector<ScenarioReport> scenarios;
    bool inversion_triggered = false;
    InversionSearch inversion{};
    std::vector<ScenarioReport> scenarios_after_inversion;
    std::string selected = "identity";
    double selected_objective = 0.0;
    bool projected = false;              ///< selected config was clamped into bounds
};

struct PreprocessResult {
    std::vector<PulseConfig> configs;
    std::vector<LayerReport> reports;
};

/// Optimizes one crossbar's pulse mapping: A-only, D-only and joint BFGS
/// scenarios, inversion when an optimum leaves the hardware bounds, then the
/// best in-bounds candidate (identity wins ties).
PulseConfig optimize_layer(DriftObjective& objective, const PulseConfig& base, const PreprocessOptions& opt,
                           LayerReport& report);

/// Runs optimize_layer on every layer in input-to-output order.
PreprocessResult aidx_preprocess(const std::vector<LayerWorkload>& layers, const DeviceParams& device,
                                 const PulseConfig& base, const DriftObjectiveOptions& objective,
                                 const PreprocessOptions& opt = {});

} // namespace aidx
