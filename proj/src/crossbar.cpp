#include "aidx/crossbar.hpp"

#include "aidx/error.hpp"
#include "aidx/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace aidx {

CrossbarArray::CrossbarArray(std::size_t rows, std::size_t cols, const CrossbarConfig& cfg,
                             const DeviceParams& params)
    : rows_(rows), cols_(cols), cfg_(cfg), cells_(rows * cols, MemristorState{0.5, params})
{
    require(rows >= 1 && cols >= 1, "crossbar needs at least one row and one column");
    require(cfg.g_max > cfg.g_min && cfg.g_min > 0.0, "crossbar needs 0 < g_min < g_max");
    require(cfg.line_resistance >= 0.0, "line resistance must be >= 0");
    require(cfg.max_dw > 0.0, "integrator max_dw must be > 0");
    params.validate();
}

double CrossbarArray::effective_conductance(std::size_t i, std::size_t j) const
{
    return kernels::wire_corrected(conductance(i, j), cfg_.line_resistance, i, j);
}

void CrossbarArray::set_conductance(std::size_t i, std::size_t j, double g)
{
    auto& c = cell(i, j);
    const double lo = 1.0 / c.params.r_off;
    const double hi = 1.0 / c.params.r_on;
    if (g < lo * (1 - 1e-12) || g > hi * (1 + 1e-12))
        throw ValidationError("conductance " + std::to_string(g) + " S outside device range");
    c.w = state_for_conductance(c.params, g);
}

Eigen::MatrixXd CrossbarArray::conductance_matrix() const
{
    Eigen::MatrixXd g(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) g(i, j) = conductance(i, j);
    return g;
}

std::vector<double> CrossbarArray::column_currents(std::span<const double> voltages) const
{
    require(voltages.size() == rows_, "voltage vector length must equal the row count");
    std::vector<double> out(cols_, 0.0);
    if (cfg_.policy == ExecPolicy::parallel)
        kernels::currents_omp(cells_, rows_, cols_, cfg_.line_resistance, voltages, out);
    else
        kernels::currents_serial(cells_, rows_, cols_, cfg_.line_resistance, voltages, out);
    return out;
}

void CrossbarArray::apply_drift(std::span<const RowPulse> pulses)
{
    require(pulses.size() == rows_, "pulse vector length must equal the row count");
    if (cfg_.policy == ExecPolicy::parallel)
        kernels::drift_omp(cells_, rows_, cols_, pulses, cfg_.max_dw);
    else
        kernels::drift_serial(cells_, rows_, cols_, pulses, cfg_.max_dw);
}

double CrossbarArray::subthreshold_limit() const
{
    double lim = std::numeric_limits<double>::infinity();
    for (const auto& c : cells_) lim = std::min({lim, -c.params.v_on, c.params.v_off});
    return lim;
}

DifferentialWeightMap DifferentialWeightMap::interleaved(Eigen::MatrixXd weights, bool has_bias)
{
    DifferentialWeightMap m;
    const auto cols = static_cast<std::size_t>(weights.cols());
    m.weights = std::move(weights);
    m.has_bias = has_bias;
    for (std::size_t j = 0; j < cols; ++j) {
        m.pos_columns.push_back(2 * j);
        m.neg_columns.push_back(2 * j + 1);
    }
    return m;
}

std::optional<std::size_t> DifferentialWeightMap::bias_row_index() const
{
    if (!has_bias || weights.rows() == 0) return std::nullopt;
    return static_cast<std::size_t>(weights.rows() - 1);
}

Eigen::MatrixXd MappedCrossbar::decoded_weights() const
{
    const auto rows = logical_rows();
    const auto cols = logical_cols();
    Eigen::MatrixXd w(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            w(i, j) = (array.effective_conductance(i, map.pos_columns[j]) -
                       array.effective_conductance(i, map.neg_columns[j])) * weight_scale;
    return w;
}

std::vector<double> MappedCrossbar::decode(std::span<const double> readout_voltages,
                                           double base_amplitude) const
{
    const auto currents = array.column_currents(readout_voltages);
    std::vector<double> out(logical_cols());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = (currents[map.pos_columns[j]] - currents[map.neg_columns[j]]) * weight_scale / base_amplitude;
    return out;
}

MappedCrossbar program_weights(const DifferentialWeightMap& map, const DeviceParams& params,
                               const CrossbarConfig& cfg, const ProgramOptions& opt)
{
    params.validate();
    const auto rows = static_cast<std::size_t>(map.weights.rows());
    const auto lcols = static_cast<std::size_t>(map.weights.cols());
    require(rows >= 1 && lcols >= 1, "weight matrix must be non-empty");
    require(map.pos_columns.size() == lcols && map.neg_columns.size() == lcols,
            "column pairing must cover every logical column");
    require(cfg.g_min >= 1.0 / params.r_off * (1 - 1e-12) && cfg.g_max <= 1.0 / params.r_on * (1 + 1e-12),
            "programming range [g_min, g_max] must lie inside [1/r_off, 1/r_on]");
    require(map.weights.allFinite(), "weights must be finite");

    std::size_t phys_cols = 0;
    for (std::size_t j = 0; j < lcols; ++j)
        phys_cols = std::max({phys_cols, map.pos_columns[j] + 1, map.neg_columns[j] + 1});

    MappedCrossbar out{CrossbarArray(rows, phys_cols, cfg, params), map, 1.0};

    const double span = cfg.g_max - cfg.g_min;
    const double wmax = map.weights.cwiseAbs().maxCoeff();
    out.weight_scale = wmax > 0.0 ? wmax / span : 1.0;

    const bool sample = !opt.identical_cells && opt.variation.scale > 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < phys_cols; ++j) {
            auto& c = out.array.cell(i, j);
            c.params = sample ? sample_variation(params, mix_seed(opt.seed, i, j), opt.variation) : params;
        }

    const auto bias_row = map.bias_row_index();
    for (std::size_t i = 0; i < rows; ++i) {
        // Unused columns stay at g_min.
        for (std::size_t j = 0; j < phys_cols; ++j) out.array.cell(i, j).w = state_for_conductance(params, cfg.g_min);
        for (std::size_t j = 0; j < lcols; ++j) {
            const double wt = map.weights(i, j);
            const double dg = std::abs(wt) / out.weight_scale;
            if (dg > span * (1 + 1e-12)) throw ValidationError("weight overflows the conductance range");
            double gp = cfg.g_min, gn = cfg.g_min;
            if (bias_row && *bias_row == i) {
                gp = gn = cfg.g_max;
                (wt >= 0.0 ? gn : gp) = cfg.g_max - dg;
            } else {
                (wt >= 0.0 ? gp : gn) = cfg.g_min + dg;
            }
            out.array.cell(i, map.pos_columns[j]).w = state_for_conductance(params, gp);
            out.array.cell(i, map.neg_columns[j]).w = state_for_conductance(params, gn);
        }
    }
    return out;
}

VmmResult vmm_read(MappedCrossbar& xbar, std::span<const RowPulse> pulses, double base_amplitude)
{
    auto& arr = xbar.array;
    require(pulses.size() == arr.rows(), "pulse count must equal crossbar rows");
    const double limit = arr.subthreshold_limit();
    std::vector<double> volts(pulses.size()), readout(pulses.size());
    for (std::size_t i = 0; i < pulses.size(); ++i) {
        const auto& p = pulses[i];
        if (!std::isfinite(p.voltage) || !std::isfinite(p.width) || p.width < 0.0)
            throw ValidationError("read pulses must be finite with width >= 0");
        if (std::abs(p.voltage) >= limit)
            throw ValidationError("read pulse of " + std::to_string(p.voltage) +
                                  " V reaches a switching threshold");
        volts[i] = p.voltage;
        readout[i] = p.readout;
    }
    VmmResult r;
    r.currents = arr.column_currents(volts);
    r.decoded = xbar.decode(readout, base_amplitude);
    arr.apply_drift(pulses);
    return r;
}

Eigen::MatrixXd accumulated_drift(const CrossbarArray& xbar, const CrossbarArray& reference)
{
    require(xbar.rows() == reference.rows() && xbar.cols() == reference.cols(),
            "accumulated_drift: crossbar shapes differ");
    return xbar.conductance_matrix() - reference.conductance_matrix();
}

} // namespace aidx
