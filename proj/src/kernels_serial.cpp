#include "aidx/kernels.hpp"

namespace aidx::kernels {

void drift_serial(std::span<MemristorState> cells, std::size_t rows, std::size_t cols,
                  std::span<const RowPulse> pulses, double max_dw)
{
    for (std::size_t i = 0; i < rows; ++i) {
        const RowPulse& p = pulses[i];
        if (p.voltage == 0.0 || p.width <= 0.0) continue;
        MemristorState* row = cells.data() + i * cols;
        for (std::size_t j = 0; j < cols; ++j)
            advance_state(row[j].w, row[j].params, p.voltage, p.width, max_dw);
    }
}

void currents_serial(std::span<const MemristorState> cells, std::size_t rows, std::size_t cols,
                     double line_resistance, std::span<const double> v, std::span<double> out)
{
    for (std::size_t j = 0; j < cols; ++j) out[j] = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        if (v[i] == 0.0) continue;
        const MemristorState* row = cells.data() + i * cols;
        for (std::size_t j = 0; j < cols; ++j)
            out[j] += wire_corrected(row[j].conductance(), line_resistance, i, j) * v[i];
    }
}

} // namespace aidx::kernels
