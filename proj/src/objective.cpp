#include "aidx/objective.hpp"

#include "aidx/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace aidx {

std::vector<double> LayerWorkload::crossbar_input(Eigen::Index n) const
{
    std::vector<double> x(rows());
    for (Eigen::Index i = 0; i < inputs.cols(); ++i) x[static_cast<std::size_t>(i)] = inputs(n, i);
    if (map.has_bias) x.back() = 1.0;
    return x;
}

std::vector<InputDistribution> LayerWorkload::row_distributions() const
{
    std::vector<InputDistribution> out;
    for (Eigen::Index i = 0; i < inputs.cols(); ++i) {
        std::vector<double> col(inputs.col(i).data(), inputs.col(i).data() + inputs.rows());
        out.push_back(InputDistribution::from_samples(col));
    }
    if (map.has_bias) out.push_back({{1.0}, {1.0}});
    return out;
}

void LayerWorkload::validate() const
{
    const auto data_rows = static_cast<Eigen::Index>(rows()) - (map.has_bias ? 1 : 0);
    require(inputs.rows() >= 1, "layer workload: no input samples");
    require(inputs.cols() == data_rows, "layer workload: input width does not match the weight rows");
    require(inputs.allFinite() && inputs.cwiseAbs().maxCoeff() <= 1.0 + 1e-12,
            "layer workload: inputs must be normalized to |x| <= 1");
    if (targets.size() != 0)
        require(targets.rows() == inputs.rows() && targets.cols() == map.weights.cols(),
                "layer workload: targets shape mismatch");
}

double ratio_energy(const PulseConfig& cfg)
{
    if (cfg.A.empty()) return 0.0;
    if (cfg.scalar) return cfg.A[0] * cfg.A[0] + cfg.D[0] * cfg.D[0];
    double s = 0.0;
    for (std::size_t i = 0; i < cfg.A.size(); ++i) s += cfg.A[i] * cfg.A[i] + cfg.D[i] * cfg.D[i];
    return s;
}

DriftObjective::DriftObjective(LayerWorkload workload, DeviceParams device, DriftObjectiveOptions options)
    : workload_(std::move(workload)), device_(device), options_(std::move(options))
{
    workload_.validate();
    device_.validate();
    require(options_.horizon_k >= 1, "drift objective: horizon_k must be >= 1");
    require(!options_.trial_seeds.empty(), "drift objective: need at least one trial seed");
    require(options_.lambda1 >= 0.0 && options_.lambda2 >= 0.0, "drift objective: lambdas must be >= 0");
    require(options_.eval_samples >= 1, "drift objective: eval_samples must be >= 1");

    const auto n = workload_.inputs.rows();
    if (workload_.targets.size() == 0) {
        Eigen::MatrixXd x(n, static_cast<Eigen::Index>(workload_.rows()));
        x.leftCols(workload_.inputs.cols()) = workload_.inputs;
        if (workload_.map.has_bias) x.col(x.cols() - 1).setOnes();
        targets_ = x * workload_.map.weights;
    } else {
        targets_ = workload_.targets;
    }

    for (auto seed : options_.trial_seeds) {
        ProgramOptions po;
        po.variation = options_.variation;
        po.seed = mix_seed(seed, 0x5eed);
        programmed_.push_back(program_weights(workload_.map, device_, options_.crossbar, po));
        std::vector<std::size_t> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(mix_seed(options_.stream_seed, seed, 1));
        std::shuffle(order.begin(), order.end(), rng);
        order_.push_back(std::move(order));
    }
    v_limit_ = programmed_.front().array.subthreshold_limit();

    double e0 = 0.0;
    for (const auto& xb : programmed_) e0 += output_mse(xb, 1.0);
    e0_ = e0 / static_cast<double>(programmed_.size());
}

void DriftObjective::set_lambdas(double l1, double l2)
{
    require(l1 >= 0.0 && l2 >= 0.0, "drift objective: lambdas must be >= 0");
    options_.lambda1 = l1;
    options_.lambda2 = l2;
}

std::size_t DriftObjective::stream_sample(std::size_t trial, std::size_t n) const
{
    const auto& order = order_.at(trial);
    return order[n % order.size()];
}

double DriftObjective::output_mse(const MappedCrossbar& xbar, double base_amplitude) const
{
    const auto n = std::min<Eigen::Index>(workload_.inputs.rows(), static_cast<Eigen::Index>(options_.eval_samples));
    double total = 0.0;
    for (Eigen::Index s = 0; s < n; ++s) {
        auto x = workload_.crossbar_input(s);
        for (auto& v : x) v *= base_amplitude;
        const auto out = xbar.decode(x, base_amplitude);
        for (std::size_t j = 0; j < out.size(); ++j) {
            const double e = targets_(s, static_cast<Eigen::Index>(j)) - out[j];
            total += e * e;
        }
    }
    return total / static_cast<double>(n);
}

MappedCrossbar DriftObjective::replay(const PulseConfig& cfg, std::size_t trial, int reads) const
{
    require(cfg.rows() == rows(), "pulse config rows do not match the crossbar");
    MappedCrossbar xb = programmed_.at(trial);
    for (int k = 0; k < reads; ++k) {
        const auto s = stream_sample(trial, static_cast<std::size_t>(k));
        const auto x = workload_.crossbar_input(static_cast<Eigen::Index>(s));
        const auto pulses = encode_input(x, cfg, v_limit_, cfg.inverted(s));
        xb.array.apply_drift(pulses);
    }
    return xb;
}

double DriftObjective::trial_e_drift(const PulseConfig& cfg, std::size_t trial) const
{
    const auto xb = replay(cfg, trial, options_.horizon_k);
    return output_mse(xb, 1.0);
}

double DriftObjective::raw_e_drift(const PulseConfig& cfg) const
{
    require(cfg.rows() == rows(), "pulse config rows do not match the crossbar");
    const auto t = static_cast<std::ptrdiff_t>(programmed_.size());
    std::vector<double> ek(programmed_.size());
#pragma omp parallel for schedule(static) if (t > 1)
    for (std::ptrdiff_t i = 0; i < t; ++i) ek[static_cast<std::size_t>(i)] = trial_e_drift(cfg, static_cast<std::size_t>(i));
    double sum = 0.0;
    for (double e : ek) sum += e;
    return sum / static_cast<double>(ek.size()) - e0_;
}

double DriftObjective::regularization(const PulseConfig& cfg) const
{
    if (options_.lambda1 == 0.0 && options_.lambda2 == 0.0) return 0.0;
    double sa = 0.0, sd = 0.0;
    const std::size_t n = cfg.scalar ? std::min<std::size_t>(1, cfg.A.size()) : cfg.A.size();
    for (std::size_t i = 0; i < n; ++i) {
        sa += cfg.A[i] * cfg.A[i];
        sd += cfg.D[i] * cfg.D[i];
    }
    return options_.lambda1 * sa + options_.lambda2 * sd;
}

double DriftObjective::evaluate(const PulseConfig& cfg) const
{
    cfg.validate(v_limit_);
    return raw_e_drift(cfg) * options_.normalization + regularization(cfg);
}

double DriftObjective::evaluate_unbounded(const PulseConfig& cfg) const
{
    PulseConfig open = cfg;
    open.bounds = {std::numeric_limits<double>::min(), std::numeric_limits<double>::max()};
    open.validate(v_limit_);
    return raw_e_drift(cfg) * options_.normalization + regularization(cfg);
}

} // namespace aidx
