#include "aidx/signal.hpp"

#include "aidx/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace aidx {

PulseConfig PulseConfig::identity(std::size_t rows, double base_amplitude_v, double base_width_s)
{
    PulseConfig c;
    c.A.assign(rows, 1.0);
    c.D.assign(rows, 1.0);
    c.base_amplitude_v = base_amplitude_v;
    c.base_width_s = base_width_s;
    return c;
}

bool PulseConfig::inverted(std::size_t sample_index) const
{
    if (inversion_mask.empty()) return false;
    return inversion_mask[sample_index % inversion_mask.size()] != 0;
}

bool PulseConfig::within_bounds() const
{
    auto ok = [&](double r) { return r >= bounds.min && r <= bounds.max; };
    return std::all_of(A.begin(), A.end(), ok) && std::all_of(D.begin(), D.end(), ok);
}

bool PulseConfig::is_identity() const
{
    auto one = [](double r) { return r == 1.0; };
    return std::all_of(A.begin(), A.end(), one) && std::all_of(D.begin(), D.end(), one) &&
           inversion_fraction == 0.0;
}

void PulseConfig::validate(double v_limit) const
{
    require(!A.empty() && A.size() == D.size(), "pulse config: A and D must be non-empty and equal length");
    require(base_amplitude_v > 0.0 && std::isfinite(base_amplitude_v), "pulse config: base amplitude must be > 0");
    require(base_width_s > 0.0 && std::isfinite(base_width_s), "pulse config: base width must be > 0");
    require(inversion_fraction >= 0.0 && inversion_fraction < 1.0, "pulse config: inversion fraction outside [0, 1)");
    require(bounds.min > 0.0 && bounds.max >= bounds.min, "pulse config: bad ratio bounds");
    for (std::size_t i = 0; i < A.size(); ++i)
        require(A[i] > 0.0 && D[i] > 0.0 && std::isfinite(A[i]) && std::isfinite(D[i]),
                "pulse config: ratios must be positive and finite");
    require(within_bounds(), "pulse config: ratio outside hardware bounds");
    const double amax = std::max(1.0, *std::max_element(A.begin(), A.end()));
    require(base_amplitude_v * amax < v_limit, "pulse config: largest pulse amplitude reaches the switching threshold");
}

std::vector<RowPulse> encode_input(std::span<const double> x, const PulseConfig& cfg, double v_limit, bool invert)
{
    require(x.size() == cfg.rows(), "encode_input: input length must equal config rows");
    std::vector<RowPulse> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = invert ? -x[i] : x[i];
        require(std::abs(xi) <= 1.0 + 1e-12, "encode_input: inputs must be normalized to |x| <= 1");
        RowPulse& p = out[i];
        p.readout = cfg.base_amplitude_v * xi;
        if (xi > 0.0) {
            p.voltage = cfg.base_amplitude_v * cfg.A[i] * xi;
            p.width = cfg.base_width_s * cfg.D[i];
        } else {
            p.voltage = cfg.base_amplitude_v * xi;
            p.width = cfg.base_width_s;
        }
        if (std::abs(p.voltage) >= v_limit)
            throw ValidationError("encode_input: pulse amplitude reaches the switching threshold");
    }
    return out;
}

std::vector<std::uint8_t> inversion_mask(std::size_t n, double a, std::uint64_t seed)
{
    require(a >= 0.0 && a < 1.0, "inversion fraction must lie in [0, 1)");
    std::vector<std::uint8_t> mask(n, 0);
    const auto count = static_cast<std::size_t>(std::llround(a * static_cast<double>(n)));
    if (count == 0) return mask;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < count; ++k) mask[idx[k]] = 1;
    return mask;
}

InversionResult invert_fraction(const Eigen::MatrixXd& samples, double a, std::uint64_t seed)
{
    InversionResult r{samples, inversion_mask(static_cast<std::size_t>(samples.rows()), a, seed)};
    for (Eigen::Index i = 0; i < samples.rows(); ++i)
        if (r.mask[static_cast<std::size_t>(i)]) r.samples.row(i) *= -1.0;
    if (a == 0.0) r.mask.clear();
    return r;
}

void InputDistribution::validate() const
{
    require(!support.empty() && support.size() == pmf.size(), "input distribution: support and pmf must match");
    double total = 0.0;
    for (double p : pmf) {
        require(p >= 0.0 && std::isfinite(p), "input distribution: masses must be >= 0");
        total += p;
    }
    require(std::abs(total - 1.0) < 1e-9, "input distribution: masses must sum to 1");
}

double InputDistribution::mean() const
{
    double m = 0.0;
    for (std::size_t k = 0; k < support.size(); ++k) m += support[k] * pmf[k];
    return m;
}

InputDistribution InputDistribution::from_samples(std::span<const double> values)
{
    require(!values.empty(), "input distribution: no samples");
    std::map<double, double> counts;
    for (double v : values) counts[v] += 1.0;
    InputDistribution d;
    const double n = static_cast<double>(values.size());
    for (auto [v, c] : counts) {
        d.support.push_back(v);
        d.pmf.push_back(c / n);
    }
    return d;
}

InputDistribution InputDistribution::inverted(double a) const
{
    require(a >= 0.0 && a < 1.0, "inversion fraction must lie in [0, 1)");
    std::map<double, double> mass;
    for (std::size_t k = 0; k < support.size(); ++k) {
        mass[support[k]] += (1.0 - a) * pmf[k];
        if (a > 0.0) mass[-support[k] + 0.0] += a * pmf[k];
    }
    InputDistribution d;
    for (auto [v, m] : mass) {
        d.support.push_back(v);
        d.pmf.push_back(m);
    }
    return d;
}

double inverted_signed_mean(const InputDistribution& dist, double a)
{
    return (1.0 - 2.0 * a) * dist.mean();
}

double expected_drift_rate(const InputDistribution& dist, const DeviceParams& device, const PulseConfig& cfg,
                           double w, std::size_t row)
{
    require(row < cfg.rows(), "expected_drift_rate: row out of range");
    const double a = cfg.inversion_fraction;
    auto g = [&](double x) {
        if (x > 0.0) return state_rate(device, w, cfg.base_amplitude_v * cfg.A[row] * x) * cfg.D[row];
        return state_rate(device, w, cfg.base_amplitude_v * x);
    };
    double e = 0.0;
    for (std::size_t k = 0; k < dist.support.size(); ++k) {
        const double x = dist.support[k];
        e += dist.pmf[k] * ((1.0 - a) * g(x) + (a > 0.0 ? a * g(-x) : 0.0));
    }
    return e;
}

} // namespace aidx
