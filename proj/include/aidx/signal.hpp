#pragma once

#include "aidx/crossbar.hpp"
#include "aidx/device.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace aidx {

struct RatioBounds {
    double min = 0.25;
    double max = 4.0;
};

/// Read-pulse mapping: per-row amplitude ratio A and width ratio D for
/// positive inputs (relative to the negative-input pulse), plus the input
/// inversion schedule.
struct PulseConfig {
    std::vector<double> A;
    std::vector<double> D;
    double base_amplitude_v = 0.25;
    double base_width_s = 1e-7;
    double inversion_fraction = 0.0;
    /// Entry k says whether input sample k (index taken mod size) is negated
    /// before encoding. Empty means no inversion.
    std::vector<std::uint8_t> inversion_mask;
    RatioBounds bounds{};
    /// A and D hold one value per crossbar, broadcast to every row.
    bool scalar = false;

    static PulseConfig identity(std::size_t rows, double base_amplitude_v, double base_width_s);

    std::size_t rows() const { return A.size(); }
    bool inverted(std::size_t sample_index) const;
    bool within_bounds() const;
    bool is_identity() const;
    /// Structural checks plus the ratio bounds and base_amplitude * max(A) < v_limit.
    void validate(double v_limit) const;
};

/// Maps a normalized input vector (|x_i| <= 1) to row pulses. With `invert`
/// the vector is negated first. Throws when a pulse would reach v_limit.
std::vector<RowPulse> encode_input(std::span<const double> x, const PulseConfig& cfg, double v_limit,
                                   bool invert = false);

struct InversionResult {
    Eigen::MatrixXd samples;              ///< rows flipped where mask is set
    std::vector<std::uint8_t> mask;
};

/// Negates round(a * N) randomly chosen sample rows.
InversionResult invert_fraction(const Eigen::MatrixXd& samples, double a, std::uint64_t seed);

/// Seeded mask with round(a * n) set entries.
std::vector<std::uint8_t> inversion_mask(std::size_t n, double a, std::uint64_t seed);

struct InputDistribution {
    std::vector<double> support;
    std::vector<double> pmf;

    void validate() const;
    double mean() const;
    /// Empirical distribution of the given values (duplicates merged).
    static InputDistribution from_samples(std::span<const double> values);
    /// Distribution after negating a proportion a of the inputs:
    /// (1 - a) f(x) + a f(-x).
    InputDistribution inverted(double a) const;
};

/// Signed expectation of x after inverting a proportion a; for odd statistics
/// this is (1 - 2a) times the original value.
double inverted_signed_mean(const InputDistribution& dist, double a);

/// Time-averaged state rate E_x[g(x)], where g(x) is the state rate under the
/// mapped pulse amplitude, weighted by its width relative to base_width. The
/// cfg's inversion fraction is applied as a mixture.
double expected_drift_rate(const InputDistribution& dist, const DeviceParams& device, const PulseConfig& cfg,
                           double w, std::size_t row = 0);

} // namespace aidx
