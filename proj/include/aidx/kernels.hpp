#pragma once

// Data-parallel crossbar kernels. The serial versions are the reference the
// OpenMP versions are tested (bit-for-bit) and benchmarked against.

#include "aidx/crossbar.hpp"

#include <span>

namespace aidx::kernels {

void drift_serial(std::span<MemristorState> cells, std::size_t rows, std::size_t cols,
                  std::span<const RowPulse> pulses, double max_dw);
void drift_omp(std::span<MemristorState> cells, std::size_t rows, std::size_t cols,
               std::span<const RowPulse> pulses, double max_dw);

/// out[j] = sum_i G_eff(i,j) * v[i]
void currents_serial(std::span<const MemristorState> cells, std::size_t rows, std::size_t cols,
                     double line_resistance, std::span<const double> v, std::span<double> out);
void currents_omp(std::span<const MemristorState> cells, std::size_t rows, std::size_t cols,
                  double line_resistance, std::span<const double> v, std::span<double> out);

/// First-order series wire correction, distance counted in segments from the
/// row driver and the column sense node.
inline double wire_corrected(double g, double line_resistance, std::size_t i, std::size_t j)
{
    if (line_resistance == 0.0) return g;
    const double segments = static_cast<double>(i + j + 2);
    return g / (1.0 + g * line_resistance * segments);
}

} // namespace aidx::kernels
