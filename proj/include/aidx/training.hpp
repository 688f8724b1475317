#pragma once

#include "aidx/datasets.hpp"
#include "aidx/network.hpp"

#include <cstdint>
#include <vector>

namespace aidx {

struct SgdOptions {
    int epochs = 30;
    double learning_rate = 0.05;
    std::size_t batch = 16;
    double weight_decay = 0.0;
    std::uint64_t seed = 5;
};

/// Fully connected network with He/Xavier-style seeded initialization.
/// `sizes` lists layer widths including the input; `hidden` applies to all
/// but the last layer.
Network make_mlp(const std::vector<std::size_t>& sizes, Activation hidden, Activation output, std::uint64_t seed);

/// Softmax cross-entropy on the final (identity) layer.
void train_classifier(Network& net, const Dataset& data, const SgdOptions& opt);
/// Mean squared error against the input itself.
void train_autoencoder(Network& net, const Eigen::MatrixXd& x, const SgdOptions& opt);

double software_accuracy(const Network& net, const Dataset& data);
double software_mse(const Network& net, const Eigen::MatrixXd& x);

} // namespace aidx
