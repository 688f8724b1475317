#pragma once

#include "aidx/device.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace aidx {

enum class ExecPolicy { serial, parallel };

struct CrossbarConfig {
    double g_min = 2.0e-4;          ///< S, programming floor
    double g_max = 5.2e-3;          ///< S, programming ceiling
    double line_resistance = 0.0;   ///< ohm per wire segment, 0 = ideal wires
    double max_dw = 1e-3;           ///< integrator sub-step cap
    ExecPolicy policy = ExecPolicy::parallel;
};

/// One read pulse on a row. `voltage` is the signed physical amplitude that
/// stresses the devices for `width` seconds; `readout` is the nominal input
/// voltage the column readout is calibrated against.
struct RowPulse {
    double voltage = 0.0;
    double width = 0.0;
    double readout = 0.0;
};

/// 1T1R crossbar: row-major grid of device states.
class CrossbarArray {
public:
    CrossbarArray() = default;
    CrossbarArray(std::size_t rows, std::size_t cols, const CrossbarConfig& cfg,
                  const DeviceParams& params = DeviceParams::tiox());

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const CrossbarConfig& config() const { return cfg_; }
    void set_policy(ExecPolicy p) { cfg_.policy = p; }

    MemristorState& cell(std::size_t i, std::size_t j) { return cells_[i * cols_ + j]; }
    const MemristorState& cell(std::size_t i, std::size_t j) const { return cells_[i * cols_ + j]; }
    std::span<MemristorState> cells() { return cells_; }
    std::span<const MemristorState> cells() const { return cells_; }

    double conductance(std::size_t i, std::size_t j) const { return cell(i, j).conductance(); }
    /// Conductance seen through the first-order wire-resistance correction.
    double effective_conductance(std::size_t i, std::size_t j) const;
    void set_conductance(std::size_t i, std::size_t j, double g);
    Eigen::MatrixXd conductance_matrix() const;

    /// I_j = sum_i G_ij V_i at the present state. Does not disturb the devices.
    std::vector<double> column_currents(std::span<const double> voltages) const;

    /// Advances every device by its row's pulse.
    void apply_drift(std::span<const RowPulse> pulses);

    /// Largest read amplitude that stays below both switching thresholds,
    /// across all cells.
    double subthreshold_limit() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    CrossbarConfig cfg_{};
    std::vector<MemristorState> cells_;
};

/// Signed weights on differential column pairs. Logical column j uses
/// physical columns pos_columns[j] and neg_columns[j]. When `has_bias` is set
/// the last weight row is the bias, driven by a constant +1 input.
struct DifferentialWeightMap {
    Eigen::MatrixXd weights;     // rows = inputs (+ bias), cols = logical outputs
    bool has_bias = false;
    std::vector<std::size_t> pos_columns;
    std::vector<std::size_t> neg_columns;

    static DifferentialWeightMap interleaved(Eigen::MatrixXd weights, bool has_bias);
    std::optional<std::size_t> bias_row_index() const;
};

struct VmmResult {
    std::vector<double> currents;   ///< per physical column, A
    std::vector<double> decoded;    ///< per logical column
};

/// Crossbar plus the mapping needed to decode logical outputs.
struct MappedCrossbar {
    CrossbarArray array;
    DifferentialWeightMap map;
    double weight_scale = 1.0;   ///< weight units per siemens

    std::size_t logical_rows() const { return map.weights.rows(); }
    std::size_t logical_cols() const { return map.weights.cols(); }

    /// Weights read back from conductances, (G+ - G-) * scale.
    Eigen::MatrixXd decoded_weights() const;
    /// Logical output for readout voltages, without disturbing the devices.
    std::vector<double> decode(std::span<const double> readout_voltages, double base_amplitude) const;
};

struct ProgramOptions {
    VariationModel variation{};
    std::uint64_t seed = 0;
    /// When set, every cell uses exactly `params` (no sampling).
    bool identical_cells = false;
};

/// Programs signed weights onto differential pairs. Weight magnitude maps
/// linearly onto [0, g_max - g_min] above g_min; the bias row is mapped from
/// the high-conductance end.
MappedCrossbar program_weights(const DifferentialWeightMap& map, const DeviceParams& params,
                               const CrossbarConfig& cfg, const ProgramOptions& opt = {});

/// Reads the crossbar: samples currents at pulse start, then applies drift.
/// Throws ValidationError for an over-threshold or mis-sized pulse vector.
VmmResult vmm_read(MappedCrossbar& xbar, std::span<const RowPulse> pulses, double base_amplitude);

/// Elementwise G - G_ref.
Eigen::MatrixXd accumulated_drift(const CrossbarArray& xbar, const CrossbarArray& reference);

} // namespace aidx
