#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

namespace dlm {

enum class MappingKind { comprehension, production };
enum class Learning { eol, fil };

std::string_view to_string(MappingKind k);
std::string_view to_string(Learning l);
Learning parse_learning(std::string_view s);

struct LinearMapping {
    Eigen::MatrixXd weights;  // input_dims x output_dims
    MappingKind kind = MappingKind::comprehension;
    Learning learning = Learning::eol;
    double ridge = 0.0;

    Eigen::Index input_dims() const { return weights.rows(); }
    Eigen::Index output_dims() const { return weights.cols(); }
};

struct SolveOptions {
    std::optional<std::span<const double>> row_weights;  // none = EOL
    double ridge = 0.0;
    MappingKind kind = MappingKind::comprehension;
};

// Minimizes sum_i w_i |x_i B - y_i|^2 + ridge |B|_F^2 through the weighted normal
// equations (X'WX + ridge I) B = X'WY with a Cholesky solve. Row weights given
// means frequency-informed learning.
LinearMapping solve_linear(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const SolveOptions& options = {});
LinearMapping solve_linear(const Eigen::SparseMatrix<double, Eigen::RowMajor>& x, const Eigen::MatrixXd& y,
                           const SolveOptions& options = {});

Eigen::MatrixXd apply_mapping(const LinearMapping& m, const Eigen::MatrixXd& rows);
Eigen::MatrixXd apply_mapping(const LinearMapping& m, const Eigen::SparseMatrix<double, Eigen::RowMajor>& rows);

// Binary weights plus a JSON sidecar (path + ".json") with kind, learning, ridge
// and the cue inventory hash.
void save_mapping(const std::filesystem::path& path, const LinearMapping& m, const std::string& inventory_hash);
LinearMapping load_mapping(const std::filesystem::path& path);

}  // namespace dlm
