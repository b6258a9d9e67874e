#include "dlm/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "dlm/cues.hpp"
#include "dlm/embeddings.hpp"
#include "dlm/error.hpp"
#include "dlm/matrix_io.hpp"
#include "dlm/random.hpp"

namespace dlm {

namespace {

Eigen::MatrixXd logistic(const Eigen::MatrixXd& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

// Numerically stable sum of elementwise BCE computed from logits.
double bce_sum_from_logits(const Eigen::MatrixXd& z, const Eigen::MatrixXd& y) {
    return (z.array().max(0.0) - z.array() * y.array() + (1.0 + (-z.array().abs()).exp()).log()).sum();
}

struct ForwardTrace {
    std::vector<Eigen::MatrixXd> activations;  // a_0 = inputs, a_l after activation
    std::vector<Eigen::MatrixXd> pre;          // z_l
};

ForwardTrace trace(const FeedforwardNetwork& net, const Eigen::MatrixXd& inputs) {
    ForwardTrace t;
    t.activations.push_back(inputs);
    const auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Eigen::MatrixXd z = t.activations.back() * layers[l].weights;
        z.rowwise() += layers[l].bias;
        t.pre.push_back(z);
        if (l + 1 < layers.size())
            t.activations.push_back(z.cwiseMax(0.0));
        else
            t.activations.push_back(logistic(z));
    }
    return t;
}

void check_shapes(const FeedforwardNetwork& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
    const auto& sizes = net.layer_sizes();
    if (static_cast<std::size_t>(inputs.cols()) != sizes.front())
        throw data_error("network: input has " + std::to_string(inputs.cols()) + " columns, expected " +
                         std::to_string(sizes.front()));
    if (static_cast<std::size_t>(targets.cols()) != sizes.back() || targets.rows() != inputs.rows())
        throw data_error("network: target shape does not match the output layer");
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(idx[k]));
    return out;
}

double chunked_loss(const FeedforwardNetwork& net, const Eigen::MatrixXd& s, const FormMatrix& c,
                    std::span<const std::size_t> idx) {
    constexpr std::size_t chunk = 2048;
    double total = 0.0;
    for (std::size_t start = 0; start < idx.size(); start += chunk) {
        auto part = idx.subspan(start, std::min(chunk, idx.size() - start));
        Eigen::MatrixXd x = gather_rows(s, part);
        Eigen::MatrixXd y = c.dense_rows(part);
        auto t = trace(net, x);
        total += bce_sum_from_logits(t.pre.back(), y);
    }
    return total / (static_cast<double>(idx.size()) * static_cast<double>(c.cols()));
}

}  // namespace

FeedforwardNetwork::FeedforwardNetwork(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw config_error("network needs at least an input and an output layer");
    for (auto s : sizes_)
        if (s == 0) throw config_error("network layer sizes must be positive");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        DenseLayer layer;
        layer.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sizes_[l]), static_cast<Eigen::Index>(sizes_[l + 1]));
        layer.bias = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(sizes_[l + 1]));
        layers_.push_back(std::move(layer));
    }
}

FeedforwardNetwork FeedforwardNetwork::glorot(std::vector<std::size_t> layer_sizes, std::uint64_t seed) {
    FeedforwardNetwork net(std::move(layer_sizes));
    Rng rng(seed);
    for (auto& layer : net.layers_) {
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.weights.rows() + layer.weights.cols()));
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = uniform(rng, -limit, limit);
    }
    return net;
}

std::size_t FeedforwardNetwork::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
}

bool FeedforwardNetwork::all_finite() const {
    return std::all_of(layers_.begin(), layers_.end(),
                       [](const DenseLayer& l) { return l.weights.allFinite() && l.bias.allFinite(); });
}

Eigen::MatrixXd FeedforwardNetwork::forward(const Eigen::MatrixXd& inputs) const {
    if (static_cast<std::size_t>(inputs.cols()) != sizes_.front())
        throw data_error("network: input has " + std::to_string(inputs.cols()) + " columns, expected " +
                         std::to_string(sizes_.front()));
    return trace(*this, inputs).activations.back();
}

Eigen::VectorXd FeedforwardNetwork::forward(const Eigen::VectorXd& input) const {
    Eigen::MatrixXd row = input.transpose();
    return forward(row).row(0).transpose();
}

double bce_loss(const FeedforwardNetwork& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
    check_shapes(net, inputs, targets);
    auto t = trace(net, inputs);
    return bce_sum_from_logits(t.pre.back(), targets) / static_cast<double>(targets.size());
}

NetworkGradient bce_gradient(const FeedforwardNetwork& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
    check_shapes(net, inputs, targets);
    auto t = trace(net, inputs);
    const auto& layers = net.layers();
    NetworkGradient g;
    g.loss = bce_sum_from_logits(t.pre.back(), targets) / static_cast<double>(targets.size());
    g.layers.resize(layers.size());

    Eigen::MatrixXd delta = (t.activations.back() - targets) / static_cast<double>(targets.size());
    for (std::size_t l = layers.size(); l-- > 0;) {
        g.layers[l].weights = t.activations[l].transpose() * delta;
        g.layers[l].bias = delta.colwise().sum();
        if (l > 0) {
            delta = (delta * layers[l].weights.transpose()).cwiseProduct(
                (t.pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return g;
}

FeedforwardNetwork train_network(const SemanticMatrix& semantics, const FormMatrix& forms, const TrainingOptions& options,
                                 TrainingHistory* history) {
    const std::size_t n = semantics.rows();
    if (n != forms.rows()) throw data_error("train_network: semantic and form matrices are not row-aligned");
    if (n == 0) throw data_error("train_network: no training rows");
    if (options.batch_size == 0 || options.epochs < 0 || options.patience < 1 || options.step_size <= 0.0)
        throw config_error("train_network: invalid training options");
    if (!(options.validation_fraction >= 0.0 && options.validation_fraction < 1.0))
        throw config_error("train_network: validation fraction must lie in [0, 1)");

    std::vector<std::size_t> sizes{semantics.dims()};
    sizes.insert(sizes.end(), options.hidden.begin(), options.hidden.end());
    sizes.push_back(forms.cols());
    FeedforwardNetwork net = FeedforwardNetwork::glorot(sizes, options.seed);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto& ids = semantics.row_ids.size() == n ? semantics.row_ids : forms.row_ids();
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
    Rng rng(options.seed ^ 0x9E3779B97F4A7C15ULL);
    shuffle(std::span<std::size_t>(order), rng);

    auto n_val = static_cast<std::size_t>(std::llround(options.validation_fraction * static_cast<double>(n)));
    if (n_val >= n) n_val = n - 1;
    std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

    // Adam moments
    std::vector<DenseLayer> m1, m2;
    for (const auto& l : net.layers()) {
        m1.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()), Eigen::RowVectorXd::Zero(l.bias.size())});
        m2.push_back(m1.back());
    }
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::uint64_t step = 0;

    TrainingHistory local;
    TrainingHistory& hist = history ? *history : local;
    hist = {};
    FeedforwardNetwork best = net;
    double best_val = std::numeric_limits<double>::infinity();
    int waited = 0;

    for (int epoch = 1; epoch <= options.epochs; ++epoch) {
        shuffle(std::span<std::size_t>(train), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < train.size(); start += options.batch_size) {
            std::span<const std::size_t> batch(train.data() + start, std::min(options.batch_size, train.size() - start));
            Eigen::MatrixXd x = gather_rows(semantics.values, batch);
            Eigen::MatrixXd y = forms.dense_rows(batch);
            NetworkGradient g = bce_gradient(net, x, y);
            if (!std::isfinite(g.loss)) throw numerical_error("train_network: non-finite loss in epoch " + std::to_string(epoch));
            epoch_loss += g.loss * static_cast<double>(batch.size());
            ++step;
            auto& layers = net.layers();
            for (std::size_t l = 0; l < layers.size(); ++l) {
                if (options.optimizer == Optimizer::sgd) {
                    layers[l].weights -= options.step_size * g.layers[l].weights;
                    layers[l].bias -= options.step_size * g.layers[l].bias;
                    continue;
                }
                const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
                const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
                auto update = [&](auto& param, auto& mom1, auto& mom2, const auto& grad) {
                    mom1 = beta1 * mom1 + (1.0 - beta1) * grad;
                    mom2 = beta2 * mom2 + (1.0 - beta2) * grad.cwiseProduct(grad);
                    param.array() -= options.step_size * (mom1.array() / c1) / ((mom2.array() / c2).sqrt() + eps);
                };
                update(layers[l].weights, m1[l].weights, m2[l].weights, g.layers[l].weights);
                update(layers[l].bias, m1[l].bias, m2[l].bias, g.layers[l].bias);
            }
        }
        if (!net.all_finite()) throw numerical_error("train_network: non-finite parameters in epoch " + std::to_string(epoch));
        hist.train_loss.push_back(epoch_loss / static_cast<double>(train.size()));
        net.trained_epochs = epoch;

        if (val.empty()) {
            best = net;
            hist.best_epoch = epoch;
            continue;
        }
        double v = chunked_loss(net, semantics.values, forms, val);
        if (!std::isfinite(v)) throw numerical_error("train_network: non-finite validation loss in epoch " + std::to_string(epoch));
        hist.validation_loss.push_back(v);
        if (v < best_val) {
            best_val = v;
            best = net;
            hist.best_epoch = epoch;
            waited = 0;
        } else if (++waited >= options.patience) {
            hist.stopped_early = true;
            break;
        }
    }
    best.trained_epochs = net.trained_epochs;
    return best;
}

void save_network(const std::filesystem::path& path, const FeedforwardNetwork& net) {
    std::vector<Eigen::MatrixXd> mats;
    for (const auto& l : net.layers()) {
        mats.push_back(l.weights);
        mats.push_back(l.bias);
    }
    save_matrices(path, mats);
    nlohmann::ordered_json meta;
    meta["layer_sizes"] = net.layer_sizes();
    meta["hidden_activation"] = "relu";
    meta["output_activation"] = "logistic";
    meta["trained_epochs"] = net.trained_epochs;
    std::ofstream out(path.string() + ".json");
    out << meta.dump(2) << '\n';
}

FeedforwardNetwork load_network(const std::filesystem::path& path) {
    auto mats = load_matrices(path);
    std::ifstream in(path.string() + ".json");
    if (!in) throw data_error("missing network metadata " + path.string() + ".json");
    auto meta = nlohmann::json::parse(in);
    FeedforwardNetwork net(meta.at("layer_sizes").get<std::vector<std::size_t>>());
    if (mats.size() != 2 * net.layers().size()) throw data_error(path.string() + ": layer count mismatch");
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        auto& layer = net.layers()[l];
        if (mats[2 * l].rows() != layer.weights.rows() || mats[2 * l].cols() != layer.weights.cols() ||
            mats[2 * l + 1].size() != layer.bias.size())
            throw data_error(path.string() + ": layer " + std::to_string(l) + " shape mismatch");
        layer.weights = mats[2 * l];
        layer.bias = mats[2 * l + 1];
    }
    net.trained_epochs = meta.value("trained_epochs", 0);
    return net;
}

}  // namespace dlm
