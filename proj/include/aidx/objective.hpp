#pragma once

#include "aidx/crossbar.hpp"
#include "aidx/device.hpp"
#include "aidx/signal.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace aidx {

/// One crossbar's worth of work: its weights, the (normalized) inputs it sees
/// and the ideal outputs it should produce.
struct LayerWorkload {
    DifferentialWeightMap map;
    Eigen::MatrixXd inputs;    ///< N x (rows - bias), |x| <= 1
    Eigen::MatrixXd targets;   ///< N x logical outputs; empty = ideal VMM of `inputs`

    std::size_t rows() const { return static_cast<std::size_t>(map.weights.rows()); }
    /// Crossbar input for sample n: the sample plus a trailing 1 for the bias row.
    std::vector<double> crossbar_input(Eigen::Index n) const;
    /// Per-row empirical input distributions (the bias row is a point mass at 1).
    std::vector<InputDistribution> row_distributions() const;
    void validate() const;
};

struct DriftObjectiveOptions {
    int horizon_k = 500;
    std::vector<std::uint64_t> trial_seeds{1, 2, 3, 4, 5};
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    /// Multiplies E_k - E_0 before the regularization is added.
    double normalization = 1.0;
    /// Number of samples (from the front of the set) used to measure E_k.
    std::size_t eval_samples = 64;
    VariationModel variation{};
    CrossbarConfig crossbar{};
    std::uint64_t stream_seed = 0;
};

/// E_Drift(A, D): replays `horizon_k` inference reads on clones of the
/// programmed crossbars (one per trial seed) and measures the growth of the
/// output mean squared error.
class DriftObjective {
public:
    DriftObjective(LayerWorkload workload, DeviceParams device, DriftObjectiveOptions options);

    /// Normalized E_Drift plus L2 terms. Requires cfg within its hardware bounds.
    double evaluate(const PulseConfig& cfg) const;
    /// Same as evaluate() but the ratio bounds are not enforced; pulses must
    /// still stay below the switching thresholds.
    double evaluate_unbounded(const PulseConfig& cfg) const;
    /// Mean over trials of E_k - E_0, no scaling, no regularization.
    double raw_e_drift(const PulseConfig& cfg) const;
    double regularization(const PulseConfig& cfg) const;

    /// Crossbar for `trial` after `reads` inference operations under cfg.
    MappedCrossbar replay(const PulseConfig& cfg, std::size_t trial, int reads) const;
    /// Sum over eval samples of squared output error, averaged per sample.
    double output_mse(const MappedCrossbar& xbar, double base_amplitude) const;

    double e0() const { return e0_; }
    std::size_t rows() const { return workload_.rows(); }
    double v_limit() const { return v_limit_; }
    const LayerWorkload& workload() const { return workload_; }
    const DeviceParams& device() const { return device_; }
    const DriftObjectiveOptions& options() const { return options_; }
    const MappedCrossbar& programmed(std::size_t trial) const { return programmed_.at(trial); }
    std::size_t trials() const { return programmed_.size(); }
    /// Sample index read at stream position n of a trial.
    std::size_t stream_sample(std::size_t trial, std::size_t n) const;

    void set_normalization(double s) { options_.normalization = s; }
    void set_lambdas(double l1, double l2);

private:
    double trial_e_drift(const PulseConfig& cfg, std::size_t trial) const;

    LayerWorkload workload_;
    DeviceParams device_;
    DriftObjectiveOptions options_;
    std::vector<MappedCrossbar> programmed_;
    std::vector<std::vector<std::size_t>> order_;
    Eigen::MatrixXd targets_;
    double v_limit_ = 0.0;
    double e0_ = 0.0;
};

/// Sum of squared decision ratios: each per-row entry, or the single shared
/// entry for a scalar config.
double ratio_energy(const PulseConfig& cfg);

} // namespace aidx
