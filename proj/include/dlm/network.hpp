#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dlm {

struct SemanticMatrix;
class FormMatrix;

struct DenseLayer {
    Eigen::MatrixXd weights;  // fan_in x fan_out
    Eigen::RowVectorXd bias;
};

// Fully connected network: rectified linear hidden layers, logistic outputs.
// Rows are samples; forward maps an n x input matrix to n x output supports.
class FeedforwardNetwork {
public:
    FeedforwardNetwork() = default;
    // Zero-initialized parameters for the given layer sizes (at least input and output).
    explicit FeedforwardNetwork(std::vector<std::size_t> layer_sizes);

    // Uniform Glorot initialization, zero biases.
    static FeedforwardNetwork glorot(std::vector<std::size_t> layer_sizes, std::uint64_t seed);

    const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::size_t parameter_count() const;
    bool all_finite() const;

    Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;
    Eigen::VectorXd forward(const Eigen::VectorXd& input) const;

    int trained_epochs = 0;

private:
    std::vector<std::size_t> sizes_;
    std::vector<DenseLayer> layers_;
};

// Mean binary cross-entropy over all outputs of all rows.
double bce_loss(const FeedforwardNetwork& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

// Loss and its gradient with respect to every layer's weights and bias.
struct NetworkGradient {
    double loss = 0.0;
    std::vector<DenseLayer> layers;
};
NetworkGradient bce_gradient(const FeedforwardNetwork& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

enum class Optimizer { sgd, adam };

struct TrainingOptions {
    std::vector<std::size_t> hidden{1000};
    int epochs = 100;
    int patience = 5;
    double validation_fraction = 0.05;  // 0 disables early stopping
    std::size_t batch_size = 512;
    double step_size = 1e-3;
    Optimizer optimizer = Optimizer::adam;
    std::uint64_t seed = 1;
};

struct TrainingHistory {
    std::vector<double> train_loss;
    std::vector<double> validation_loss;
    int best_epoch = 0;  // 1-based; parameters restored from here
    bool stopped_early = false;
};

// Rows are put in canonical row-id order before seeded shuffling, so the result does
// not depend on the incoming row order.
FeedforwardNetwork train_network(const SemanticMatrix& semantics, const FormMatrix& forms, const TrainingOptions& options,
                                 TrainingHistory* history = nullptr);

void save_network(const std::filesystem::path& path, const FeedforwardNetwork& net);
FeedforwardNetwork load_network(const std::filesystem::path& path);

}  // namespace dlm
