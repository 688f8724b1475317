#include "aidx/network.hpp"

#include "aidx/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace aidx {

std::string to_string(Activation a)
{
    switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::identity: return "identity";
    }
    return "identity";
}

Activation parse_activation(const std::string& text)
{
    if (text == "relu") return Activation::relu;
    if (text == "sigmoid") return Activation::sigmoid;
    if (text == "identity" || text == "linear") return Activation::identity;
    throw ValidationError("unknown activation '" + text + "'");
}

std::string to_string(LayerKind k) { return k == LayerKind::dense ? "dense" : "conv"; }

LayerKind parse_layer_kind(const std::string& text)
{
    if (text == "dense") return LayerKind::dense;
    if (text == "conv") return LayerKind::conv;
    throw ValidationError("unknown layer kind '" + text + "'");
}

std::string to_string(TaskKind k) { return k == TaskKind::classification ? "classification" : "reconstruction"; }

TaskKind parse_task_kind(const std::string& text)
{
    if (text == "classification") return TaskKind::classification;
    if (text == "reconstruction") return TaskKind::reconstruction;
    throw ValidationError("unknown task kind '" + text + "'");
}

double activate(Activation a, double x)
{
    switch (a) {
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Activation::identity: return x;
    }
    return x;
}

Eigen::MatrixXd im2col(const Eigen::VectorXd& image, const ConvGeometry& g)
{
    require(g.kernel >= 1 && g.stride >= 1, "im2col: kernel and stride must be >= 1");
    require(g.in_height + 2 * g.padding >= g.kernel && g.in_width + 2 * g.padding >= g.kernel,
            "im2col: kernel larger than padded image");
    require(static_cast<std::size_t>(image.size()) == g.input_size(), "im2col: image size mismatch");
    const auto oh = g.out_height(), ow = g.out_width();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(oh * ow, g.patch_size());
    for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox) {
            const auto r = oy * ow + ox;
            std::size_t col = 0;
            for (std::size_t c = 0; c < g.in_channels; ++c)
                for (std::size_t ky = 0; ky < g.kernel; ++ky)
                    for (std::size_t kx = 0; kx < g.kernel; ++kx, ++col) {
                        const auto y = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.padding);
                        const auto x = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.padding);
                        if (y < 0 || x < 0 || y >= static_cast<long>(g.in_height) ||
                            x >= static_cast<long>(g.in_width))
                            continue;
                        out(r, col) = image((c * g.in_height + y) * g.in_width + x);
                    }
        }
    return out;
}

namespace {

Eigen::VectorXd dense_forward(const Eigen::MatrixXd& w, const Eigen::VectorXd& x)
{
    const auto n = w.rows() - 1;
    return w.topRows(n).transpose() * x + w.row(n).transpose();
}

/// Conv outputs are channel-major: (out_channel, position).
Eigen::VectorXd to_channel_major(const Eigen::MatrixXd& per_position)
{
    const auto positions = per_position.rows();
    const auto channels = per_position.cols();
    Eigen::VectorXd out(positions * channels);
    for (Eigen::Index c = 0; c < channels; ++c)
        for (Eigen::Index p = 0; p < positions; ++p) out(c * positions + p) = per_position(p, c);
    return out;
}

Eigen::VectorXd apply_activation(Activation a, Eigen::VectorXd v)
{
    for (auto& e : v) e = activate(a, e);
    return v;
}

} // namespace

Eigen::VectorXd Layer::forward(const Eigen::VectorXd& x) const
{
    if (kind == LayerKind::dense) {
        require(static_cast<std::size_t>(x.size()) == inputs(), "layer input size mismatch");
        return apply_activation(activation, dense_forward(weights, x));
    }
    const auto patches = im2col(x, conv);
    Eigen::MatrixXd y(patches.rows(), weights.cols());
    for (Eigen::Index p = 0; p < patches.rows(); ++p)
        y.row(p) = dense_forward(weights, patches.row(p).transpose()).transpose();
    return apply_activation(activation, to_channel_major(y));
}

Eigen::VectorXd Network::forward(const Eigen::VectorXd& x) const
{
    Eigen::VectorXd v = x;
    for (const auto& l : layers) v = l.forward(v);
    return v;
}

std::vector<Eigen::VectorXd> Network::activations(const Eigen::VectorXd& x) const
{
    std::vector<Eigen::VectorXd> out{x};
    for (const auto& l : layers) out.push_back(l.forward(out.back()));
    return out;
}

void Network::validate() const
{
    require(!layers.empty(), "network has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        require(L.weights.rows() >= 2 && L.weights.cols() >= 1, "layer " + std::to_string(l) + ": weights too small");
        require(L.weights.allFinite(), "layer " + std::to_string(l) + ": weights must be finite");
        require(L.input_scale > 0.0 && std::isfinite(L.input_scale),
                "layer " + std::to_string(l) + ": input_scale must be > 0");
        if (L.kind == LayerKind::conv) {
            require(L.inputs() == L.conv.patch_size(), "layer " + std::to_string(l) + ": weights rows != patch size + 1");
            require(L.outputs() == L.conv.out_channels, "layer " + std::to_string(l) + ": weight columns != out_channels");
        }
        if (l > 0) {
            const auto& P = layers[l - 1];
            const auto prev_out = P.kind == LayerKind::conv ? P.conv.output_size() : P.outputs();
            const auto in = L.kind == LayerKind::conv ? L.conv.input_size() : L.inputs();
            require(prev_out == in, "layer " + std::to_string(l) + ": input size does not match previous output");
        }
    }
}

void Network::calibrate_input_scales(const Eigen::MatrixXd& data, double quantile)
{
    require(quantile > 0.0 && quantile <= 1.0, "input scale quantile must be in (0, 1]");
    std::vector<std::vector<double>> mags(layers.size());
    for (Eigen::Index n = 0; n < data.rows(); ++n) {
        const auto acts = activations(data.row(n).transpose());
        for (std::size_t l = 0; l < layers.size(); ++l)
            for (double v : acts[l]) mags[l].push_back(std::abs(v));
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& m = mags[l];
        const auto k = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(m.size()))) - 1;
        std::nth_element(m.begin(), m.begin() + static_cast<long>(k), m.end());
        layers[l].input_scale = m[k] > 0.0 ? m[k] : 1.0;
    }
}

MappedNetwork map_network(const Network& net, const DeviceParams& device, const CrossbarConfig& xbar,
                          const ProgramOptions& program)
{
    net.validate();
    MappedNetwork out;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& L = net.layers[l];
        Eigen::MatrixXd w = L.weights;
        w.topRows(w.rows() - 1) *= L.input_scale;
        ProgramOptions po = program;
        po.seed = mix_seed(program.seed, l, 0x1a7e);
        out.push_back(LayerMapping{l, L.kind, L.conv, L.activation, L.input_scale,
                                   program_weights(DifferentialWeightMap::interleaved(std::move(w), true), device, xbar,
                                                   po)});
    }
    return out;
}

std::vector<double> crossbar_input(const LayerMapping& layer, std::span<const double> x)
{
    const auto n = layer.crossbar.logical_rows() - 1;
    require(x.size() == n, "crossbar_input: input length mismatch");
    std::vector<double> v(n + 1);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::clamp(x[i] / layer.input_scale, -1.0, 1.0);
    v[n] = 1.0;
    return v;
}

namespace {

/// Rows of vectors a layer reads: one for dense, one per patch for conv.
Eigen::MatrixXd read_vectors(const LayerMapping& layer, const Eigen::VectorXd& x)
{
    if (layer.kind == LayerKind::dense) return x.transpose();
    return im2col(x, layer.conv);
}

Eigen::VectorXd finish(const LayerMapping& layer, const Eigen::MatrixXd& y)
{
    Eigen::VectorXd out = layer.kind == LayerKind::dense ? Eigen::VectorXd(y.row(0).transpose()) : to_channel_major(y);
    return apply_activation(layer.activation, std::move(out));
}

} // namespace

Eigen::VectorXd forward_inference(MappedNetwork& net, const Eigen::VectorXd& x, std::span<const PulseConfig> cfgs,
                                  std::size_t sample_index)
{
    require(cfgs.size() == net.size(), "forward_inference: one pulse config per layer required");
    Eigen::VectorXd v = x;
    for (std::size_t l = 0; l < net.size(); ++l) {
        auto& layer = net[l];
        const auto& cfg = cfgs[l];
        require(cfg.rows() == layer.crossbar.logical_rows(), "forward_inference: config rows != crossbar rows");
        const double limit = layer.crossbar.array.subthreshold_limit();
        const bool inv = cfg.inverted(sample_index);
        const auto reads = read_vectors(layer, v);
        Eigen::MatrixXd y(reads.rows(), layer.crossbar.logical_cols());
        for (Eigen::Index r = 0; r < reads.rows(); ++r) {
            const Eigen::VectorXd row = reads.row(r).transpose();
            const auto in = crossbar_input(layer, std::span<const double>(row.data(), row.size()));
            const auto pulses = encode_input(in, cfg, limit, inv);
            const auto res = vmm_read(layer.crossbar, pulses, cfg.base_amplitude_v);
            for (std::size_t j = 0; j < res.decoded.size(); ++j)
                y(r, static_cast<Eigen::Index>(j)) = inv ? -res.decoded[j] : res.decoded[j];
        }
        v = finish(layer, y);
    }
    return v;
}

namespace {

// Readout scaling cancels in decode(); any positive amplitude gives the same output.
constexpr double kReadout = 0.1;

Eigen::MatrixXd readout_layer(const LayerMapping& layer, const Eigen::MatrixXd& reads)
{
    Eigen::MatrixXd y(reads.rows(), layer.crossbar.logical_cols());
    for (Eigen::Index r = 0; r < reads.rows(); ++r) {
        const Eigen::VectorXd row = reads.row(r).transpose();
        auto in = crossbar_input(layer, std::span<const double>(row.data(), row.size()));
        for (auto& e : in) e *= kReadout;
        const auto d = layer.crossbar.decode(in, kReadout);
        for (std::size_t j = 0; j < d.size(); ++j) y(r, static_cast<Eigen::Index>(j)) = d[j];
    }
    return y;
}

} // namespace

Eigen::VectorXd forward_readout(const MappedNetwork& net, const Eigen::VectorXd& x)
{
    Eigen::VectorXd v = x;
    for (const auto& layer : net) v = finish(layer, readout_layer(layer, read_vectors(layer, v)));
    return v;
}

std::vector<std::vector<double>> layer_inputs(const MappedNetwork& net, const Eigen::VectorXd& x)
{
    std::vector<std::vector<double>> out;
    Eigen::VectorXd v = x;
    for (const auto& layer : net) {
        require(layer.kind == LayerKind::dense, "layer_inputs: dense layers only");
        out.push_back(crossbar_input(layer, std::span<const double>(v.data(), v.size())));
        v = finish(layer, readout_layer(layer, read_vectors(layer, v)));
    }
    out.emplace_back(v.data(), v.data() + v.size());
    return out;
}

std::vector<Eigen::VectorXd> layer_error_estimate(const MappedNetwork& drifted, const MappedNetwork& reference,
                                                  const Eigen::VectorXd& x)
{
    require(drifted.size() == reference.size(), "layer_error_estimate: network depth mismatch");
    const auto V = layer_inputs(reference, x);
    std::vector<Eigen::VectorXd> E;
    for (std::size_t l = 0; l < reference.size(); ++l) {
        const Eigen::MatrixXd dW = drifted[l].crossbar.decoded_weights() - reference[l].crossbar.decoded_weights();
        const auto& v = V[l];
        require(static_cast<std::size_t>(dW.rows()) == v.size(), "layer_error_estimate: crossbar shape mismatch");
        Eigen::VectorXd e = Eigen::VectorXd::Zero(dW.cols());
        for (Eigen::Index j = 0; j < dW.cols(); ++j)
            for (std::size_t i = 0; i < v.size(); ++i) {
                double term = dW(static_cast<Eigen::Index>(i), j);
                // The bias input carries no upstream error.
                if (l > 0 && i + 1 < v.size())
                    term += activate(reference[l - 1].activation, E.back()(static_cast<Eigen::Index>(i))) -
                            activate(reference[l - 1].activation, 0.0);
                e(j) += v[i] * term;
            }
        E.push_back(std::move(e));
    }
    return E;
}

void TaskData::validate() const
{
    require(stream.rows() >= 1 && stream.cols() >= 1, "task: empty inference stream");
    require(eval.rows() >= 1 && eval.cols() == stream.cols(), "task: eval set empty or width mismatch");
    if (kind == TaskKind::classification)
        require(eval_labels.size() == static_cast<std::size_t>(eval.rows()), "task: one label per eval sample required");
    else
        require(eval_targets.size() == 0 || eval_targets.rows() == eval.rows(), "task: eval targets row mismatch");
}

double evaluate_metric(const MappedNetwork& net, const TaskData& data)
{
    double acc = 0.0;
    for (Eigen::Index n = 0; n < data.eval.rows(); ++n) {
        const Eigen::VectorXd out = forward_readout(net, data.eval.row(n).transpose());
        if (data.kind == TaskKind::classification) {
            Eigen::Index arg = 0;
            out.maxCoeff(&arg);
            acc += arg == data.eval_labels[static_cast<std::size_t>(n)] ? 1.0 : 0.0;
        } else {
            const Eigen::VectorXd t =
                data.eval_targets.size() ? data.eval_targets.row(n).transpose() : data.eval.row(n).transpose();
            acc += (out - t).squaredNorm() / static_cast<double>(t.size());
        }
    }
    return acc / static_cast<double>(data.eval.rows());
}

void compute_lifetime(TrajectoryMetrics& m, const TrajectoryOptions& opt)
{
    m.lifetime_censored = true;
    m.lifetime_ops = m.op_counts.empty() ? 0 : m.op_counts.back();
    if (m.metric.empty()) return;
    const double thr = opt.threshold_relative ? opt.lifetime_threshold * m.metric.front() : opt.lifetime_threshold;
    for (std::size_t c = 0; c < m.metric.size(); ++c)
        if (m.metric[c] < thr) {
            m.lifetime_ops = m.op_counts[c];
            m.lifetime_censored = false;
            return;
        }
}

TrajectoryMetrics run_trajectory(const Network& net, const DeviceParams& device, const TaskData& data,
                                 std::span<const PulseConfig> cfgs, const TrajectoryOptions& opt, std::uint64_t seed,
                                 MappedNetwork* final_state)
{
    data.validate();
    require(opt.checkpoint_every >= 1 && opt.total_ops >= opt.checkpoint_every,
            "trajectory: need total_ops >= checkpoint_every >= 1");
    ProgramOptions po;
    po.variation = opt.variation;
    po.seed = seed;
    auto mapped = map_network(net, device, opt.crossbar, po);
    require(cfgs.size() == mapped.size(), "trajectory: one pulse config per layer required");
    for (std::size_t l = 0; l < cfgs.size(); ++l) cfgs[l].validate(mapped[l].crossbar.array.subthreshold_limit());

    const auto n = static_cast<std::size_t>(data.stream.rows());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix_seed(seed, 0x57e4));
    std::shuffle(order.begin(), order.end(), rng);

    TrajectoryMetrics m;
    m.seed = seed;
    m.op_counts.push_back(0);
    m.metric.push_back(evaluate_metric(mapped, data));
    for (long k = 1; k <= opt.total_ops; ++k) {
        const auto s = order[static_cast<std::size_t>(k - 1) % n];
        forward_inference(mapped, data.stream.row(static_cast<Eigen::Index>(s)).transpose(), cfgs, s);
        if (k % opt.checkpoint_every == 0 || k == opt.total_ops) {
            m.op_counts.push_back(k);
            m.metric.push_back(evaluate_metric(mapped, data));
        }
    }
    if (data.kind == TaskKind::classification) compute_lifetime(m, opt);
    if (final_state) *final_state = std::move(mapped);
    return m;
}

TrajectoryMetrics average(std::span<const TrajectoryMetrics> runs, const TrajectoryOptions& opt, TaskKind kind)
{
    require(!runs.empty(), "average: no runs");
    TrajectoryMetrics avg;
    avg.op_counts = runs.front().op_counts;
    avg.metric.assign(avg.op_counts.size(), 0.0);
    for (const auto& r : runs) {
        require(r.op_counts == avg.op_counts, "average: runs use different checkpoints");
        for (std::size_t c = 0; c < r.metric.size(); ++c) avg.metric[c] += r.metric[c];
    }
    for (auto& v : avg.metric) v /= static_cast<double>(runs.size());
    if (kind == TaskKind::classification) compute_lifetime(avg, opt);
    return avg;
}

} // namespace aidx
