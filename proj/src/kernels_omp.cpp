#include "aidx/kernels.hpp"

#include <omp.h>

namespace aidx::kernels {

// Below this many cells the fork/join costs more than the work.
constexpr std::size_t kMinParallelCells = 4096;

void drift_omp(std::span<MemristorState> cells, std::size_t rows, std::size_t cols,
               std::span<const RowPulse> pulses, double max_dw)
{
    const auto n = static_cast<std::ptrdiff_t>(rows * cols);
#pragma omp parallel for schedule(static) if (rows * cols >= kMinParallelCells && !omp_in_parallel())
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const RowPulse& p = pulses[static_cast<std::size_t>(k) / cols];
        if (p.voltage == 0.0 || p.width <= 0.0) continue;
        MemristorState& c = cells[static_cast<std::size_t>(k)];
        advance_state(c.w, c.params, p.voltage, p.width, max_dw);
    }
}

void currents_omp(std::span<const MemristorState> cells, std::size_t rows, std::size_t cols,
                  double line_resistance, std::span<const double> v, std::span<double> out)
{
    // Parallel over columns; each column sums rows in index order so the
    // result matches the serial kernel exactly.
    const auto ncols = static_cast<std::ptrdiff_t>(cols);
#pragma omp parallel for schedule(static) if (rows * cols >= kMinParallelCells && !omp_in_parallel())
    for (std::ptrdiff_t jj = 0; jj < ncols; ++jj) {
        const auto j = static_cast<std::size_t>(jj);
        double acc = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            if (v[i] == 0.0) continue;
            acc += wire_corrected(cells[i * cols + j].conductance(), line_resistance, i, j) * v[i];
        }
        out[j] = acc;
    }
}

} // namespace aidx::kernels
