#pragma once

#include "aidx/crossbar.hpp"
#include "aidx/device.hpp"
#include "aidx/fitting.hpp"
#include "aidx/network.hpp"
#include "aidx/objective.hpp"
#include "aidx/preprocess.hpp"
#include "aidx/signal.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace aidx {

using Json = nlohmann::ordered_json;

const char* version();

Json load_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

Json device_to_json(const DeviceParams& p);
/// Missing fields keep the values of `defaults`; unknown fields are rejected.
DeviceParams device_from_json(const Json& j, const DeviceParams& defaults = DeviceParams::tiox());

Json pulse_config_to_json(const PulseConfig& c);
PulseConfig pulse_config_from_json(const Json& j);

/// {"version", "mode", "layers": [PulseConfig...], "report": [...]}
Json manifest_to_json(const PreprocessResult& r, const std::string& mode);
std::vector<PulseConfig> manifest_configs(const Json& manifest);

Json crossbar_snapshot(const CrossbarArray& xbar, long reads);

/// Every CSV starts with "# aidx <version> seed=<seed> <what>".
void write_csv_preamble(std::ostream& os, std::uint64_t seed, const std::string& what);

/// Row-major dG, with "rows,cols,reads" stated in the preamble. With
/// `reference` the values are percent changes relative to it.
void write_delta_g_csv(std::ostream& os, const Eigen::MatrixXd& dg, long reads, std::uint64_t seed,
                       const Eigen::MatrixXd* reference = nullptr);

/// All tunables of one run. Sections in the JSON document mirror the
/// modules: device, variation, integrator, crossbar, signal, optimizer,
/// aidx, network, fitting.
struct RunConfig {
    DeviceParams device = DeviceParams::tiox();
    VariationModel variation{};
    CrossbarConfig crossbar{};
    double base_amplitude_v = 0.25;
    double base_width_s = 1e-7;
    RatioBounds bounds{};
    DriftObjectiveOptions objective{};
    PreprocessOptions preprocess{};
    TrajectoryOptions trajectory{};
    std::size_t eval_seeds = 20;
    SweepOptions sweep{};
    FitOptions fit{};
    std::uint64_t seed = 1;

    /// Copies the shared settings (variation, crossbar) into the module options.
    void sync();
};

void apply_overrides(RunConfig& cfg, const Json& j);
Json run_config_to_json(const RunConfig& cfg);

} // namespace aidx
