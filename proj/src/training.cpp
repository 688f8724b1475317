#include "aidx/training.hpp"

#include "aidx/error.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace aidx {

Network make_mlp(const std::vector<std::size_t>& sizes, Activation hidden, Activation output, std::uint64_t seed)
{
    require(sizes.size() >= 2, "make_mlp: need at least input and output sizes");
    std::mt19937_64 rng(seed);
    Network net;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const auto in = static_cast<Eigen::Index>(sizes[l]);
        const auto out = static_cast<Eigen::Index>(sizes[l + 1]);
        const bool last = l + 2 == sizes.size();
        const Activation act = last ? output : hidden;
        const double sd = std::sqrt((act == Activation::relu ? 2.0 : 1.0) / static_cast<double>(in));
        std::normal_distribution<double> nd(0.0, sd);
        Layer layer;
        layer.weights = Eigen::MatrixXd::Zero(in + 1, out);
        for (Eigen::Index i = 0; i < in; ++i)
            for (Eigen::Index j = 0; j < out; ++j) layer.weights(i, j) = nd(rng);
        layer.activation = act;
        net.layers.push_back(std::move(layer));
    }
    return net;
}

namespace {

double act_grad(Activation a, double pre, double post)
{
    switch (a) {
    case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: return post * (1.0 - post);
    case Activation::identity: return 1.0;
    }
    return 1.0;
}

/// One minibatch step. `loss_grad` maps the final output to dL/d(output pre-activation).
template <class LossGrad>
void sgd_epoch(Network& net, const Eigen::MatrixXd& x, const SgdOptions& opt, std::mt19937_64& rng, LossGrad loss_grad)
{
    for (const auto& l : net.layers)
        require(l.kind == LayerKind::dense, "training supports dense layers only");
    std::vector<std::size_t> idx(static_cast<std::size_t>(x.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto L = net.layers.size();
    for (std::size_t start = 0; start < idx.size(); start += opt.batch) {
        const auto end = std::min(idx.size(), start + opt.batch);
        std::vector<Eigen::MatrixXd> grad(L);
        for (std::size_t l = 0; l < L; ++l) grad[l] = Eigen::MatrixXd::Zero(net.layers[l].weights.rows(), net.layers[l].weights.cols());
        for (std::size_t b = start; b < end; ++b) {
            const auto n = static_cast<Eigen::Index>(idx[b]);
            std::vector<Eigen::VectorXd> in{x.row(n).transpose()}, pre;
            for (const auto& layer : net.layers) {
                const auto k = layer.weights.rows() - 1;
                pre.push_back(layer.weights.topRows(k).transpose() * in.back() + layer.weights.row(k).transpose());
                Eigen::VectorXd post = pre.back();
                for (auto& e : post) e = activate(layer.activation, e);
                in.push_back(std::move(post));
            }
            Eigen::VectorXd delta = loss_grad(in.back(), pre.back(), idx[b]);
            for (std::size_t l = L; l-- > 0;) {
                const auto k = net.layers[l].weights.rows() - 1;
                grad[l].topRows(k) += in[l] * delta.transpose();
                grad[l].row(k) += delta.transpose();
                if (l == 0) break;
                Eigen::VectorXd back = net.layers[l].weights.topRows(k) * delta;
                for (Eigen::Index i = 0; i < back.size(); ++i)
                    back(i) *= act_grad(net.layers[l - 1].activation, pre[l - 1](i), in[l](i));
                delta = std::move(back);
            }
        }
        const double step = opt.learning_rate / static_cast<double>(end - start);
        for (std::size_t l = 0; l < L; ++l) {
            auto& w = net.layers[l].weights;
            w -= step * grad[l];
            const auto k = w.rows() - 1;
            w.topRows(k) *= 1.0 - opt.learning_rate * opt.weight_decay;
        }
    }
}

} // namespace

void train_classifier(Network& net, const Dataset& data, const SgdOptions& opt)
{
    require(data.labels.size() == data.size(), "train_classifier: labels required");
    require(net.layers.back().activation == Activation::identity, "train_classifier: output layer must be identity");
    std::mt19937_64 rng(opt.seed);
    for (int e = 0; e < opt.epochs; ++e)
        sgd_epoch(net, data.x, opt, rng, [&](const Eigen::VectorXd& out, const Eigen::VectorXd&, std::size_t n) {
            Eigen::VectorXd p = (out.array() - out.maxCoeff()).exp();
            p /= p.sum();
            p(data.labels[n]) -= 1.0;
            return p;
        });
}

void train_autoencoder(Network& net, const Eigen::MatrixXd& x, const SgdOptions& opt)
{
    std::mt19937_64 rng(opt.seed);
    const Activation out_act = net.layers.back().activation;
    for (int e = 0; e < opt.epochs; ++e)
        sgd_epoch(net, x, opt, rng, [&](const Eigen::VectorXd& out, const Eigen::VectorXd& pre, std::size_t n) {
            Eigen::VectorXd d = 2.0 * (out - x.row(static_cast<Eigen::Index>(n)).transpose()) / static_cast<double>(out.size());
            for (Eigen::Index i = 0; i < d.size(); ++i) d(i) *= act_grad(out_act, pre(i), out(i));
            return d;
        });
}

double software_accuracy(const Network& net, const Dataset& data)
{
    double hits = 0.0;
    for (std::size_t n = 0; n < data.size(); ++n) {
        Eigen::Index arg = 0;
        net.forward(data.x.row(static_cast<Eigen::Index>(n)).transpose()).maxCoeff(&arg);
        hits += arg == data.labels[n] ? 1.0 : 0.0;
    }
    return hits / static_cast<double>(data.size());
}

double software_mse(const Network& net, const Eigen::MatrixXd& x)
{
    double s = 0.0;
    for (Eigen::Index n = 0; n < x.rows(); ++n) {
        const Eigen::VectorXd t = x.row(n).transpose();
        s += (net.forward(t) - t).squaredNorm() / static_cast<double>(t.size());
    }
    return s / static_cast<double>(x.rows());
}

} // namespace aidx
