#pragma once

#include "aidx/crossbar.hpp"
#include "aidx/device.hpp"
#include "aidx/signal.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aidx {

enum class Activation { relu, sigmoid, identity };
enum class LayerKind { dense, conv };
enum class TaskKind { classification, reconstruction };

std::string to_string(Activation a);
Activation parse_activation(const std::string& text);
std::string to_string(LayerKind k);
LayerKind parse_layer_kind(const std::string& text);
std::string to_string(TaskKind k);
TaskKind parse_task_kind(const std::string& text);

double activate(Activation a, double x);

/// Square-kernel convolution lowered to a dense matrix product (im2col).
/// Images are channel-major: index = (c * height + y) * width + x.
struct ConvGeometry {
    std::size_t in_channels = 1;
    std::size_t in_height = 0;
    std::size_t in_width = 0;
    std::size_t out_channels = 1;
    std::size_t kernel = 3;
    std::size_t stride = 1;
    std::size_t padding = 0;

    std::size_t out_height() const { return (in_height + 2 * padding - kernel) / stride + 1; }
    std::size_t out_width() const { return (in_width + 2 * padding - kernel) / stride + 1; }
    std::size_t patch_size() const { return in_channels * kernel * kernel; }
    std::size_t input_size() const { return in_channels * in_height * in_width; }
    std::size_t output_size() const { return out_channels * out_height() * out_width(); }
};

/// Rows are output positions (row-major over y, x); columns follow
/// (c, ky, kx). Padding reads as zero.
Eigen::MatrixXd im2col(const Eigen::VectorXd& image, const ConvGeometry& g);

/// Floating-point layer. `weights` has one row per input (per patch element
/// for conv layers) plus a final bias row.
struct Layer {
    Eigen::MatrixXd weights;
    Activation activation = Activation::identity;
    LayerKind kind = LayerKind::dense;
    ConvGeometry conv{};
    /// Inputs are divided by this before being encoded (|x| <= 1 after).
    double input_scale = 1.0;

    std::size_t inputs() const { return static_cast<std::size_t>(weights.rows()) - 1; }
    std::size_t outputs() const { return static_cast<std::size_t>(weights.cols()); }
    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
};

struct Network {
    std::vector<Layer> layers;

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    /// Input of every layer followed by the final output.
    std::vector<Eigen::VectorXd> activations(const Eigen::VectorXd& x) const;
    void validate() const;
    /// Sets each layer's input_scale to the `quantile` of |input| entries seen
    /// on `data`; larger inputs are clipped when encoded.
    void calibrate_input_scales(const Eigen::MatrixXd& data, double quantile = 0.99);
};

/// A network layer living on a crossbar.
struct LayerMapping {
    std::size_t layer_index = 0;
    LayerKind kind = LayerKind::dense;
    ConvGeometry conv{};
    Activation activation = Activation::identity;
    double input_scale = 1.0;
    MappedCrossbar crossbar;
};

using MappedNetwork = std::vector<LayerMapping>;

/// Programs every layer; data rows are pre-multiplied by the layer's
/// input_scale so the decoded output is in the layer's own units.
MappedNetwork map_network(const Network& net, const DeviceParams& device, const CrossbarConfig& xbar,
                          const ProgramOptions& program);

/// Normalized crossbar input for one read: x / input_scale clipped to [-1, 1]
/// plus the bias entry.
std::vector<double> crossbar_input(const LayerMapping& layer, std::span<const double> x);

/// One inference. Every crossbar read drifts the devices. `sample_index`
/// selects the inversion mask entry.
Eigen::VectorXd forward_inference(MappedNetwork& net, const Eigen::VectorXd& x, std::span<const PulseConfig> cfgs,
                                  std::size_t sample_index);

/// Same computation at the present state without disturbing any device.
Eigen::VectorXd forward_readout(const MappedNetwork& net, const Eigen::VectorXd& x);
/// Per-layer inputs (normalized crossbar inputs including bias) and final output.
std::vector<std::vector<double>> layer_inputs(const MappedNetwork& net, const Eigen::VectorXd& x);

/// Error propagation estimate, per layer l and output column j:
/// E_{j,l+1} = sum_i V_{i,l+1} (s(E_{i,l}) + dW_{ij,l+1}), with V the
/// normalized layer input, dW the decoded weight drift and s(e) = act(e) - act(0).
/// Dense layers only.
std::vector<Eigen::VectorXd> layer_error_estimate(const MappedNetwork& drifted, const MappedNetwork& reference,
                                                  const Eigen::VectorXd& x);

struct TaskData {
    TaskKind kind = TaskKind::classification;
    Eigen::MatrixXd stream;          ///< inputs replayed as inference operations
    std::vector<int> stream_labels;  ///< optional, used for training
    Eigen::MatrixXd eval;            ///< held-out inputs for checkpoints
    std::vector<int> eval_labels;    ///< classification
    Eigen::MatrixXd eval_targets;    ///< reconstruction (defaults to eval)

    void validate() const;
};

struct TrajectoryOptions {
    long total_ops = 10000;
    long checkpoint_every = 500;
    double lifetime_threshold = 0.7;
    /// Threshold is a fraction of the initial accuracy instead of an absolute accuracy.
    bool threshold_relative = true;
    CrossbarConfig crossbar{};
    VariationModel variation{};
};

struct TrajectoryMetrics {
    std::vector<long> op_counts;
    std::vector<double> metric;   ///< accuracy or reconstruction MSE
    long lifetime_ops = 0;        ///< first checkpoint below threshold (classification)
    bool lifetime_censored = false;
    std::uint64_t seed = 0;
};

double evaluate_metric(const MappedNetwork& net, const TaskData& data);

/// Maps the network with `seed`, replays total_ops inferences from the
/// stream and evaluates the metric at every checkpoint on the held-out set.
/// The crossbars after the last operation are moved into `final_state` when given.
TrajectoryMetrics run_trajectory(const Network& net, const DeviceParams& device, const TaskData& data,
                                 std::span<const PulseConfig> cfgs, const TrajectoryOptions& opt, std::uint64_t seed,
                                 MappedNetwork* final_state = nullptr);

/// Lifetime from a metric series (classification only).
void compute_lifetime(TrajectoryMetrics& m, const TrajectoryOptions& opt);

/// Element-wise mean over seeds (all series must share checkpoints).
TrajectoryMetrics average(std::span<const TrajectoryMetrics> runs, const TrajectoryOptions& opt, TaskKind kind);

} // namespace aidx
